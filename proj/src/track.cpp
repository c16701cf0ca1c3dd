#include "frenet_racer/track.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "frenet_racer/errors.hpp"

namespace frenet_racer {

namespace {

struct CsvRow {
  double x, y, wl, wr;
};

std::vector<CsvRow> parse_rows(std::string_view text, std::string_view name) {
  std::vector<CsvRow> rows;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string line(text.substr(pos, nl == std::string_view::npos
                                          ? std::string_view::npos
                                          : nl - pos));
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r,") == std::string::npos) continue;

    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    CsvRow r{};
    std::string extra;
    if (!(ss >> r.x >> r.y >> r.wl >> r.wr) || (ss >> extra)) {
      throw ParseError(std::string(name) + ":" + std::to_string(line_no) +
                       ": expected 'x_m, y_m, w_tr_left_m, w_tr_right_m'");
    }
    if (!std::isfinite(r.x) || !std::isfinite(r.y) || !std::isfinite(r.wl) ||
        !std::isfinite(r.wr)) {
      throw ParseError(std::string(name) + ":" + std::to_string(line_no) +
                       ": non-finite value");
    }
    if (r.wl <= 0.0 || r.wr <= 0.0) {
      throw ParseError(std::string(name) + ":" + std::to_string(line_no) +
                       ": track widths must be positive");
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

TrackGeometry TrackGeometry::from_csv(std::string_view text,
                                      std::string_view name) {
  std::vector<CsvRow> rows = parse_rows(text, name);
  if (rows.size() < 2) {
    throw ParseError(std::string(name) + ": need at least 2 centerline points");
  }

  bool closed = false;
  const CsvRow& first = rows.front();
  const CsvRow& last = rows.back();
  if (rows.size() >= 4 &&
      std::hypot(first.x - last.x, first.y - last.y) <= 0.01) {
    closed = true;
    rows.pop_back();  // drop the duplicated closing point
  }

  std::vector<Vec2> pts(rows.size());
  std::vector<double> wl(rows.size()), wr(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    pts[i] = {rows[i].x, rows[i].y};
    wl[i] = rows[i].wl;
    wr[i] = rows[i].wr;
  }
  return TrackGeometry(PathSpline(pts, closed), std::move(wl), std::move(wr),
                       std::string(name));
}

TrackGeometry TrackGeometry::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open track file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_csv(buf.str(), path);
}

TrackGeometry::TrackGeometry(PathSpline spline, std::vector<double> wl,
                             std::vector<double> wr, std::string name)
    : spline_(std::move(spline)),
      w_left_(std::move(wl)),
      w_right_(std::move(wr)),
      name_(std::move(name)) {
  const int n = spline_.knot_count();
  cum_s_.resize(n);
  for (int i = 0; i < n; ++i) cum_s_[i] = spline_.arc_at_knot(i);

  max_half_width_ = 0.0;
  for (int i = 0; i < n; ++i) {
    max_half_width_ = std::max({max_half_width_, w_left_[i], w_right_[i]});
  }

  left_boundary_.resize(n);
  right_boundary_.resize(n);
  for (int i = 0; i < n; ++i) {
    // Tangent at knot i: start of span i, or end of the last span for the
    // final knot of an open track.
    Vec2 d;
    if (i < spline_.span_count()) {
      d = spline_.derivative(i, 0.0);
    } else {
      const int last = spline_.span_count() - 1;
      d = spline_.derivative(last, spline_.span_width(last));
    }
    const double sp = d.norm();
    const Vec2 nrm{-d.y / sp, d.x / sp};
    const Vec2 p = spline_.knots()[i];
    left_boundary_[i] = p + nrm * w_left_[i];
    right_boundary_[i] = p - nrm * w_right_[i];
  }

  bounds_.min_x = bounds_.min_y = std::numeric_limits<double>::infinity();
  bounds_.max_x = bounds_.max_y = -std::numeric_limits<double>::infinity();
  for (const auto* b : {&left_boundary_, &right_boundary_}) {
    for (const Vec2& p : *b) {
      bounds_.min_x = std::min(bounds_.min_x, p.x);
      bounds_.max_x = std::max(bounds_.max_x, p.x);
      bounds_.min_y = std::min(bounds_.min_y, p.y);
      bounds_.max_y = std::max(bounds_.max_y, p.y);
    }
  }

  check_boundary_intersections();
}

void TrackGeometry::check_boundary_intersections() const {
  // Gather all boundary segments; a valid corridor has no proper crossings
  // between any two non-adjacent segments.
  struct Seg {
    Vec2 a, b;
    int polyline;
    int index;
    double min_x, max_x, min_y, max_y;
  };
  std::vector<Seg> segs;
  const bool wrap = closed();
  int poly_id = 0;
  for (const auto* b : {&left_boundary_, &right_boundary_}) {
    const int n = static_cast<int>(b->size());
    const int count = wrap ? n : n - 1;
    for (int i = 0; i < count; ++i) {
      Seg s;
      s.a = (*b)[i];
      s.b = (*b)[(i + 1) % n];
      s.polyline = poly_id;
      s.index = i;
      s.min_x = std::min(s.a.x, s.b.x);
      s.max_x = std::max(s.a.x, s.b.x);
      s.min_y = std::min(s.a.y, s.b.y);
      s.max_y = std::max(s.a.y, s.b.y);
      segs.push_back(s);
    }
    ++poly_id;
  }
  const int m = static_cast<int>(segs.size());
  const int per = wrap ? point_count() : point_count() - 1;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const Seg& p = segs[i];
      const Seg& q = segs[j];
      if (p.min_x > q.max_x || q.min_x > p.max_x || p.min_y > q.max_y ||
          q.min_y > p.max_y) {
        continue;
      }
      if (p.polyline == q.polyline) {
        const int gap = std::min(q.index - p.index, per - (q.index - p.index));
        if (gap <= 1) continue;  // consecutive segments share a vertex
      }
      if (segments_cross(p.a, p.b, q.a, q.b)) {
        throw ValidationError(
            name_ + ": track boundaries self-intersect near (" +
            std::to_string(0.5 * (p.a.x + p.b.x)) + ", " +
            std::to_string(0.5 * (p.a.y + p.b.y)) + ")");
      }
    }
  }
}

double TrackGeometry::width_at(const std::vector<double>& w, double s) const {
  const int n = point_count();
  const double L = total_length();
  if (closed()) {
    s = std::fmod(s, L);
    if (s < 0.0) s += L;
  } else {
    s = clamp(s, 0.0, L);
  }
  // Find i with cum_s_[i] <= s < next knot arc.
  const auto it = std::upper_bound(cum_s_.begin(), cum_s_.end(), s);
  int i = static_cast<int>(it - cum_s_.begin()) - 1;
  if (i < 0) i = 0;
  const int j = (i + 1) % n;
  const double s0 = cum_s_[i];
  const double s1 = (i + 1 < n) ? cum_s_[i + 1] : L;
  if (s1 <= s0) return w[i];
  const double t = clamp((s - s0) / (s1 - s0), 0.0, 1.0);
  return w[i] + t * (w[j] - w[i]);
}

double TrackGeometry::width_left_at(double s) const {
  return width_at(w_left_, s);
}

double TrackGeometry::width_right_at(double s) const {
  return width_at(w_right_, s);
}

FrenetPose TrackGeometry::to_frenet(double x, double y, double heading) const {
  const Vec2 q{x, y};
  const PathSpline::Projection pr = spline_.project(q);
  if (pr.distance > 2.0 * max_half_width_) {
    throw OutOfCorridorError(
        "point (" + std::to_string(x) + ", " + std::to_string(y) +
        ") is " + std::to_string(pr.distance) +
        " m from the centerline (max " +
        std::to_string(2.0 * max_half_width_) + " m)");
  }
  FrenetPose out;
  out.s = pr.s;
  out.n = pr.tangent.cross(q - pr.foot);
  out.psi = wrap_angle(heading - std::atan2(pr.tangent.y, pr.tangent.x));
  return out;
}

CartesianPoint TrackGeometry::to_cartesian(double s, double n) const {
  const PathSpline::Param p = spline_.locate(s);
  const Vec2 c = spline_.position(p.span, p.u);
  const Vec2 d = spline_.derivative(p.span, p.u);
  const double sp = d.norm();
  const Vec2 t{d.x / sp, d.y / sp};
  CartesianPoint out;
  out.x = c.x - t.y * n;
  out.y = c.y + t.x * n;
  out.tangent_heading = std::atan2(t.y, t.x);
  return out;
}

double ray_polylines_distance(
    const Vec2& origin, const Vec2& dir,
    const std::vector<const std::vector<Vec2>*>& polylines, bool closed,
    double fallback) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto* poly : polylines) {
    const int n = static_cast<int>(poly->size());
    const int count = closed ? n : n - 1;
    for (int i = 0; i < count; ++i) {
      const Vec2& p = (*poly)[i];
      const Vec2 d = (*poly)[(i + 1) % n] - p;
      const double denom = dir.cross(d);
      if (denom == 0.0) continue;  // parallel; neighbours cover the joint
      const Vec2 rel = p - origin;
      const double t = rel.cross(d) / denom;
      const double v = rel.cross(dir) / denom;
      if (t >= 0.0 && v >= 0.0 && v <= 1.0 && t < best) best = t;
    }
  }
  return std::isfinite(best) ? best : fallback;
}

std::vector<double> TrackGeometry::lidar_scan(double x, double y,
                                              double heading,
                                              const LidarConfig& cfg,
                                              Rng& rng) const {
  if (cfg.n_beams < 1) throw ValidationError("lidar needs at least one beam");
  std::vector<double> out(cfg.n_beams);
  const Vec2 origin{x, y};
  const std::vector<const std::vector<Vec2>*> polys{&left_boundary_,
                                                    &right_boundary_};
  for (int k = 0; k < cfg.n_beams; ++k) {
    const double frac =
        cfg.n_beams == 1 ? 0.5 : static_cast<double>(k) / (cfg.n_beams - 1);
    const double a = heading - 0.5 * cfg.fov + frac * cfg.fov;
    const Vec2 dir{std::cos(a), std::sin(a)};
    double r = ray_polylines_distance(origin, dir, polys, closed(),
                                      cfg.max_range);
    r = std::min(r, cfg.max_range);
    if (cfg.noise_std > 0.0) {
      r = clamp(r + cfg.noise_std * rng.normal(), 0.0, cfg.max_range);
    }
    out[k] = r;
  }
  return out;
}

bool TrackGeometry::check_collision(const FrenetPose& pose,
                                    double vehicle_half_width) const {
  const double wl = width_left_at(pose.s);
  const double wr = width_right_at(pose.s);
  return pose.n + vehicle_half_width >= wl ||
         pose.n - vehicle_half_width <= -wr;
}

double TrackGeometry::progress(double s_prev, double s_now) const {
  double d = s_now - s_prev;
  if (!closed()) return d;
  const double L = total_length();
  d = std::fmod(d, L);
  if (d <= -0.5 * L) {
    d += L;
  } else if (d > 0.5 * L) {
    d -= L;
  }
  return d;
}

}  // namespace frenet_racer

#include "frenet_racer/spline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "frenet_racer/errors.hpp"

namespace frenet_racer {

namespace {

// 7-point Gauss-Legendre rule mapped to [0, 1].  Weights sum to 1.
constexpr int kGaussN = 7;
constexpr double kGaussX[kGaussN] = {
    0.5 - 0.5 * 0.9491079123427585, 0.5 - 0.5 * 0.7415311855993945,
    0.5 - 0.5 * 0.4058451513773972, 0.5,
    0.5 + 0.5 * 0.4058451513773972, 0.5 + 0.5 * 0.7415311855993945,
    0.5 + 0.5 * 0.9491079123427585};
constexpr double kGaussW[kGaussN] = {
    0.5 * 0.1294849661688697, 0.5 * 0.2797053914892766,
    0.5 * 0.3818300505051189, 0.5 * 0.4179591836734694,
    0.5 * 0.3818300505051189, 0.5 * 0.2797053914892766,
    0.5 * 0.1294849661688697};

// Thomas algorithm.  a = sub-diagonal (a[0] unused), b = diagonal,
// c = super-diagonal (c[n-1] unused), d = right-hand side.
std::vector<double> solve_tridiagonal(const std::vector<double>& a,
                                      std::vector<double> b,
                                      const std::vector<double>& c,
                                      std::vector<double> d) {
  const int n = static_cast<int>(b.size());
  for (int i = 1; i < n; ++i) {
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    d[i] -= w * d[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = d[n - 1] / b[n - 1];
  for (int i = n - 2; i >= 0; --i) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
  return x;
}

// Tridiagonal plus corner entries A[0][n-1] = beta, A[n-1][0] = alpha,
// via the Sherman-Morrison correction.
std::vector<double> solve_cyclic_tridiagonal(const std::vector<double>& a,
                                             std::vector<double> b,
                                             const std::vector<double>& c,
                                             const std::vector<double>& d,
                                             double alpha, double beta) {
  const int n = static_cast<int>(b.size());
  const double gamma = -b[0];
  b[0] -= gamma;
  b[n - 1] -= alpha * beta / gamma;
  std::vector<double> x = solve_tridiagonal(a, b, c, d);
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = alpha;
  const std::vector<double> z = solve_tridiagonal(a, b, c, u);
  const double fact = (x[0] + beta * x[n - 1] / gamma) /
                      (1.0 + z[0] + beta * z[n - 1] / gamma);
  for (int i = 0; i < n; ++i) x[i] -= fact * z[i];
  return x;
}

// Second derivatives of the interpolating cubic spline at the knots, for one
// coordinate.  h[i] is the parameter width of span i.
std::vector<double> spline_second_derivatives(const std::vector<double>& y,
                                              const std::vector<double>& h,
                                              bool periodic) {
  const int n = static_cast<int>(y.size());
  if (periodic) {
    // One equation per knot; indices wrap.
    std::vector<double> a(n), b(n), c(n), d(n);
    for (int i = 0; i < n; ++i) {
      const double h_prev = h[(i + n - 1) % n];
      const double h_next = h[i];
      const double y_prev = y[(i + n - 1) % n];
      const double y_next = y[(i + 1) % n];
      a[i] = h_prev;
      b[i] = 2.0 * (h_prev + h_next);
      c[i] = h_next;
      d[i] = 6.0 * ((y_next - y[i]) / h_next - (y[i] - y_prev) / h_prev);
    }
    return solve_cyclic_tridiagonal(a, b, c, d, h[n - 1], h[n - 1]);
  }
  // Natural: M_0 = M_{n-1} = 0, interior knots solve the usual system.
  std::vector<double> m(n, 0.0);
  if (n <= 2) return m;
  const int k = n - 2;
  std::vector<double> a(k), b(k), c(k), d(k);
  for (int j = 0; j < k; ++j) {
    const int i = j + 1;
    a[j] = h[i - 1];
    b[j] = 2.0 * (h[i - 1] + h[i]);
    c[j] = h[i];
    d[j] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
  }
  const std::vector<double> inner = solve_tridiagonal(a, b, c, d);
  for (int j = 0; j < k; ++j) m[j + 1] = inner[j];
  return m;
}

}  // namespace

PathSpline::PathSpline(const std::vector<Vec2>& points, bool closed)
    : knots_(points), closed_(closed) {
  const int n = static_cast<int>(points.size());
  if (n < (closed ? 3 : 2)) {
    throw ValidationError("spline needs at least " +
                          std::string(closed ? "3" : "2") + " points");
  }
  const int n_spans = closed ? n : n - 1;

  std::vector<double> h(n_spans);
  for (int i = 0; i < n_spans; ++i) {
    const Vec2 d = points[(i + 1) % n] - points[i];
    h[i] = d.norm();
    if (!(h[i] > 0.0)) {
      throw ValidationError("spline points must be pairwise distinct "
                            "(duplicate at index " + std::to_string(i) + ")");
    }
  }

  std::vector<double> xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = points[i].x;
    ys[i] = points[i].y;
  }
  const std::vector<double> mx = spline_second_derivatives(xs, h, closed);
  const std::vector<double> my = spline_second_derivatives(ys, h, closed);

  spans_.resize(n_spans);
  for (int i = 0; i < n_spans; ++i) {
    const int j = (i + 1) % n;
    Span& sp = spans_[i];
    sp.h = h[i];
    sp.a = points[i];
    sp.c = Vec2{mx[i] / 2.0, my[i] / 2.0};
    sp.d = Vec2{(mx[j] - mx[i]) / (6.0 * h[i]), (my[j] - my[i]) / (6.0 * h[i])};
    sp.b = Vec2{(xs[j] - xs[i]) / h[i] - h[i] * (2.0 * mx[i] + mx[j]) / 6.0,
                (ys[j] - ys[i]) / h[i] - h[i] * (2.0 * my[i] + my[j]) / 6.0};
  }

  span_len_.resize(n_spans);
  knot_arc_.resize(n);
  knot_arc_[0] = 0.0;
  for (int i = 0; i < n_spans; ++i) {
    span_len_[i] = arc_in_span(i, spans_[i].h);
    if (i + 1 < n) knot_arc_[i + 1] = knot_arc_[i] + span_len_[i];
  }
  total_length_ = closed ? knot_arc_[n - 1] + span_len_[n - 1]
                         : knot_arc_[n - 1];
}

Vec2 PathSpline::position(int span, double u) const {
  const Span& s = spans_[span];
  return {((s.d.x * u + s.c.x) * u + s.b.x) * u + s.a.x,
          ((s.d.y * u + s.c.y) * u + s.b.y) * u + s.a.y};
}

Vec2 PathSpline::derivative(int span, double u) const {
  const Span& s = spans_[span];
  return {(3.0 * s.d.x * u + 2.0 * s.c.x) * u + s.b.x,
          (3.0 * s.d.y * u + 2.0 * s.c.y) * u + s.b.y};
}

Vec2 PathSpline::second_derivative(int span, double u) const {
  const Span& s = spans_[span];
  return {6.0 * s.d.x * u + 2.0 * s.c.x, 6.0 * s.d.y * u + 2.0 * s.c.y};
}

double PathSpline::span_speed(int span, double u) const {
  return derivative(span, u).norm();
}

double PathSpline::arc_in_span(int span, double u) const {
  double acc = 0.0;
  for (int k = 0; k < kGaussN; ++k) {
    acc += kGaussW[k] * span_speed(span, u * kGaussX[k]);
  }
  return acc * u;
}

PathSpline::Param PathSpline::locate(double s) const {
  if (closed_) {
    s = std::fmod(s, total_length_);
    if (s < 0.0) s += total_length_;
  } else {
    s = clamp(s, 0.0, total_length_);
  }
  // Find the span whose arclength range contains s.
  int lo = 0;
  int hi = span_count() - 1;
  while (lo < hi) {
    const int mid = (lo + hi + 1) / 2;
    if (knot_arc_[mid] <= s) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  const int span = lo;
  const double target = s - knot_arc_[span];
  const double h = spans_[span].h;
  const double len = span_len_[span];
  double u = clamp(h * target / len, 0.0, h);
  for (int it = 0; it < 40; ++it) {
    const double f = arc_in_span(span, u) - target;
    if (std::abs(f) < 1e-12 * (1.0 + h)) break;
    const double sp = span_speed(span, u);
    u = clamp(u - f / sp, 0.0, h);
  }
  return {span, u};
}

Vec2 PathSpline::position_at_arc(double s) const {
  const Param p = locate(s);
  return position(p.span, p.u);
}

Vec2 PathSpline::tangent_at_arc(double s) const {
  const Param p = locate(s);
  const Vec2 d = derivative(p.span, p.u);
  const double sp = d.norm();
  return {d.x / sp, d.y / sp};
}

void PathSpline::refine_in_span(const Vec2& q, int span, double& best_d2,
                                double& best_s) const {
  const double h = spans_[span].h;

  const auto consider = [&](double u) {
    const Vec2 p = position(span, u);
    const double d2 = (p - q).squared_norm();
    double s = knot_arc_[span] + arc_in_span(span, u);
    if (closed_ && s >= total_length_) s -= total_length_;
    const double ref = std::isfinite(best_d2) ? best_d2 : d2;
    const double tol = 1e-12 * (1.0 + ref);
    if (d2 < best_d2 - tol ||
        (std::abs(d2 - best_d2) <= tol && s < best_s)) {
      best_d2 = d2;
      best_s = s;
    }
  };

  // g(u) = (C(u) - q) . C'(u); interior minima are roots of g.
  constexpr int kSamples = 9;
  double us[kSamples];
  double gs[kSamples];
  for (int k = 0; k < kSamples; ++k) {
    us[k] = h * static_cast<double>(k) / (kSamples - 1);
    gs[k] = (position(span, us[k]) - q).dot(derivative(span, us[k]));
  }
  consider(0.0);
  consider(h);
  for (int k = 0; k + 1 < kSamples; ++k) {
    if (!(gs[k] <= 0.0 && gs[k + 1] >= 0.0) &&
        !(gs[k] >= 0.0 && gs[k + 1] <= 0.0)) {
      continue;  // no sign change: no interior stationary point here
    }
    double lo = us[k], hi = us[k + 1];
    double g_lo = gs[k];
    double u = std::abs(gs[k]) < std::abs(gs[k + 1]) ? lo : hi;
    for (int it = 0; it < 30; ++it) {
      const Vec2 e = position(span, u) - q;
      const Vec2 d1 = derivative(span, u);
      const double g = e.dot(d1);
      if (std::abs(g) < 1e-14 * (1.0 + d1.squared_norm())) break;
      if ((g < 0.0) == (g_lo < 0.0)) {
        lo = u;
        g_lo = g;
      } else {
        hi = u;
      }
      const double gp = d1.squared_norm() + e.dot(second_derivative(span, u));
      double next = gp > 0.0 ? u - g / gp : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - u) < 1e-15 * h) {
        u = next;
        break;
      }
      u = next;
    }
    consider(u);
  }
}

PathSpline::Projection PathSpline::project(const Vec2& q) const {
  const int n = knot_count();
  // Rank knots by distance and refine around the closest few.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto d2_of = [&](int i) { return (knots_[i] - q).squared_norm(); };
  const int k_best = std::min(n, 8);
  std::partial_sort(order.begin(), order.begin() + k_best, order.end(),
                    [&](int a, int b) { return d2_of(a) < d2_of(b); });

  std::vector<int> cand;
  cand.reserve(2 * k_best);
  for (int j = 0; j < k_best; ++j) {
    const int k = order[j];
    if (closed_) {
      cand.push_back((k + n - 1) % n);
      cand.push_back(k);
    } else {
      if (k > 0) cand.push_back(k - 1);
      if (k < span_count()) cand.push_back(k);
    }
  }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  double best_d2 = std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  for (int span : cand) refine_in_span(q, span, best_d2, best_s);

  Projection out;
  out.s = best_s;
  const Param p = locate(best_s);
  out.foot = position(p.span, p.u);
  const Vec2 d = derivative(p.span, p.u);
  const double sp = d.norm();
  out.tangent = {d.x / sp, d.y / sp};
  out.distance = (out.foot - q).norm();
  return out;
}

}  // namespace frenet_racer

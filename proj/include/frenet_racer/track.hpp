#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "frenet_racer/geometry.hpp"
#include "frenet_racer/rng.hpp"
#include "frenet_racer/spline.hpp"

namespace frenet_racer {

// Pose expressed in the track's Frenet frame: arclength s along the
// centerline, signed lateral offset n (positive to the left of the direction
// of travel), and heading psi relative to the centerline tangent, wrapped to
// (-pi, pi].
struct FrenetPose {
  double s = 0.0;
  double n = 0.0;
  double psi = 0.0;
};

// Result of mapping a Frenet coordinate back to the plane.
struct CartesianPoint {
  double x = 0.0;
  double y = 0.0;
  double tangent_heading = 0.0;  // heading of the centerline tangent at s
};

struct LidarConfig {
  int n_beams = 20;
  double fov = M_PI;        // total field of view, centred on the heading
  double max_range = 20.0;  // saturation distance
  double noise_std = 0.0;   // additive Gaussian range noise
};

// A racetrack: centerline spline, lateral corridor widths, boundaries.
//
// CSV format, one centerline point per line:
//   x_m, y_m, w_tr_left_m, w_tr_right_m
// '#' starts a comment; blank lines are ignored.  The track is closed when
// the first and last points coincide within 1 cm (the duplicate closing row
// is dropped).
class TrackGeometry {
 public:
  static TrackGeometry from_csv(std::string_view text, std::string_view name = "<csv>");
  static TrackGeometry from_file(const std::string& path);

  const std::string& name() const { return name_; }
  bool closed() const { return spline_.closed(); }
  double total_length() const { return spline_.length(); }
  const PathSpline& centerline() const { return spline_; }
  int point_count() const { return spline_.knot_count(); }
  const std::vector<Vec2>& centerline_points() const { return spline_.knots(); }
  // Arclength of each centerline point; starts at 0, strictly increasing.
  const std::vector<double>& cumulative_arclength() const { return cum_s_; }
  const std::vector<double>& width_left() const { return w_left_; }
  const std::vector<double>& width_right() const { return w_right_; }

  // Corridor half-widths at arclength s (linear interpolation between the
  // centerline points).
  double width_left_at(double s) const;
  double width_right_at(double s) const;
  double max_half_width() const { return max_half_width_; }

  // Boundary polylines (one vertex per centerline point).
  const std::vector<Vec2>& left_boundary() const { return left_boundary_; }
  const std::vector<Vec2>& right_boundary() const { return right_boundary_; }

  // Axis-aligned bounding box of the two boundaries.
  struct Bounds {
    double min_x, max_x, min_y, max_y;
  };
  const Bounds& bounds() const { return bounds_; }

  // Cartesian pose -> Frenet pose.  Throws OutOfCorridorError when (x, y) is
  // further from the centerline than 2 * max_half_width.
  FrenetPose to_frenet(double x, double y, double heading) const;

  // Frenet -> Cartesian.  s is wrapped (closed) or clamped (open); n may be
  // any value, including outside the corridor.
  CartesianPoint to_cartesian(double s, double n) const;

  // Distances to the track boundary along n_beams rays spread over the field
  // of view, centred on `heading`.  Ranges saturate at max_range; Gaussian
  // noise is added per beam when noise_std > 0, and noisy ranges are clamped
  // back to [0, max_range].
  std::vector<double> lidar_scan(double x, double y, double heading,
                                 const LidarConfig& cfg, Rng& rng) const;

  // True when a vehicle of the given half-width at this Frenet pose touches
  // or crosses the corridor boundary.
  bool check_collision(const FrenetPose& pose, double vehicle_half_width) const;

  // Signed arclength progressed from s_prev to s_now, unwrapping across the
  // start/finish line of a closed track.  The result is the representative in
  // (-L/2, L/2] of (s_now - s_prev) mod L.
  double progress(double s_prev, double s_now) const;

 private:
  TrackGeometry(PathSpline spline, std::vector<double> wl,
                std::vector<double> wr, std::string name);

  double width_at(const std::vector<double>& w, double s) const;
  void check_boundary_intersections() const;

  PathSpline spline_;
  std::vector<double> w_left_, w_right_;
  std::vector<double> cum_s_;
  std::vector<Vec2> left_boundary_, right_boundary_;
  Bounds bounds_{};
  double max_half_width_ = 0.0;
  std::string name_;
};

// Ray-cast against one or more polylines: smallest positive t with
// origin + t * dir on a segment, or fallback if no hit.
double ray_polylines_distance(const Vec2& origin, const Vec2& dir,
                              const std::vector<const std::vector<Vec2>*>& polylines,
                              bool closed, double fallback);

}  // namespace frenet_racer

#pragma once

#include <vector>

#include "frenet_racer/geometry.hpp"

namespace frenet_racer {

// C2 parametric cubic spline through a sequence of 2D points, parameterized by
// cumulative chord length.  Closed curves use periodic end conditions (the
// curve is C2 across the seam); open curves use natural end conditions.
//
// The spline provides exact-to-quadrature arclength, arclength -> parameter
// inversion, and closest-point projection, which together back the Frenet
// frame conversions of the track module.
class PathSpline {
 public:
  // points: distinct vertices (for a closed curve, do NOT repeat the first
  // point at the end; pass closed=true instead).
  PathSpline(const std::vector<Vec2>& points, bool closed);

  bool closed() const { return closed_; }
  int span_count() const { return static_cast<int>(spans_.size()); }
  int knot_count() const { return static_cast<int>(knots_.size()); }
  const std::vector<Vec2>& knots() const { return knots_; }

  // Total arclength of the curve.
  double length() const { return total_length_; }
  // Arclength at knot i (0 for the first knot).
  double arc_at_knot(int i) const { return knot_arc_[i]; }
  // Chord-parameter width of span i.
  double span_width(int i) const { return spans_[i].h; }

  // Position / derivatives w.r.t. the chord parameter, at local coordinate
  // u in [0, h_i] inside span i.
  Vec2 position(int span, double u) const;
  Vec2 derivative(int span, double u) const;
  Vec2 second_derivative(int span, double u) const;

  // Location of an arclength value along the curve.
  struct Param {
    int span;
    double u;
  };
  // s outside [0, length) is wrapped for closed curves and clamped for open
  // ones.
  Param locate(double s) const;

  Vec2 position_at_arc(double s) const;
  // Unit tangent at arclength s.
  Vec2 tangent_at_arc(double s) const;

  // Closest point on the curve to q.
  struct Projection {
    double s;         // arclength of the foot point
    double distance;  // |q - foot|
    Vec2 foot;
    Vec2 tangent;  // unit tangent at the foot point
  };
  Projection project(const Vec2& q) const;

  // Arclength from the start of span i to local coordinate u.
  double arc_in_span(int span, double u) const;

 private:
  struct Span {
    // position(u) = a + b u + c u^2 + d u^3 componentwise, u in [0, h]
    Vec2 a, b, c, d;
    double h;
  };

  double span_speed(int span, double u) const;  // |derivative|
  void refine_in_span(const Vec2& q, int span, double& best_d2,
                      double& best_s) const;

  std::vector<Vec2> knots_;
  std::vector<Span> spans_;
  std::vector<double> knot_arc_;   // arclength at each knot, starts at 0
  std::vector<double> span_len_;   // arclength of each span
  double total_length_ = 0.0;
  bool closed_ = false;
};

}  // namespace frenet_racer

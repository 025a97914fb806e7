#pragma once

#include <functional>

#include "shapeopt/types.hpp"

namespace shapeopt {

/// Closed-form vector field with its Jacobian (rows = components,
/// columns = d/dx, d/dy). Used for the body force f, Dirichlet data g and
/// target velocity y_d.
struct AnalyticField {
  std::function<Vec2(const Vec2&)> value;
  std::function<Mat2(const Vec2&)> jacobian;

  Vec2 operator()(const Vec2& x) const { return value(x); }
};

AnalyticField zero_field();

/// Rigid rotation omega * (-y, x); divergence free with zero flux through
/// any closed curve.
AnalyticField rotation_field(double omega);

/// Swirl profile phi(r) * t_hat with phi(r) = (r - r_inner)(r - r_outer),
/// t_hat = (-y, x) / r. Vanishes on both circles.
struct SwirlTarget {
  double r_inner = 0.2;
  double r_outer = 1.0;

  Vec2 value(const Vec2& x) const;
  Mat2 jacobian(const Vec2& x) const;

  /// -alpha * Laplacian of the swirl: -alpha (3 - r_inner r_outer / r^2) t_hat.
  /// With this force (swirl, p = 0) solves the Stokes problem on the
  /// annulus r_inner < r < r_outer.
  Vec2 force(double alpha, const Vec2& x) const;
  Mat2 force_jacobian(double alpha, const Vec2& x) const;
};

/// The default target y_d with r_inner = 0.2, r_outer = 1. Throws
/// OriginEvaluation for |x| < 1e-12.
Vec2 evaluate_target(const Vec2& x);

AnalyticField target_velocity(const SwirlTarget& target = {});
AnalyticField swirl_force(double alpha, const SwirlTarget& target = {});

}  // namespace shapeopt

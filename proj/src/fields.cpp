#include "shapeopt/fields.hpp"

#include <cmath>

#include "shapeopt/errors.hpp"

namespace shapeopt {

namespace {

constexpr double kOriginTol = 1e-12;

double checked_radius(const Vec2& x) {
  const double r = x.norm();
  if (r < kOriginTol) throw OriginEvaluation("swirl field evaluated at the origin");
  return r;
}

// Field psi(r) * (-y, x) and its Jacobian, given psi and dpsi/dr.
Mat2 rotational_jacobian(const Vec2& x, double r, double psi, double dpsi) {
  const Vec2 grad_psi = dpsi * x / r;
  const Vec2 rot(-x.y(), x.x());
  Mat2 j;
  j << 0.0, -psi, psi, 0.0;
  j += rot * grad_psi.transpose();
  return j;
}

}  // namespace

AnalyticField zero_field() {
  return {[](const Vec2&) { return Vec2::Zero().eval(); }, [](const Vec2&) { return Mat2::Zero().eval(); }};
}

AnalyticField rotation_field(double omega) {
  return {[omega](const Vec2& x) { return Vec2(-omega * x.y(), omega * x.x()); },
          [omega](const Vec2&) {
            Mat2 j;
            j << 0.0, -omega, omega, 0.0;
            return j;
          }};
}

// phi(r) t_hat = psi(r) (-y, x) with psi = phi / r = r - (a + b) + ab / r.
Vec2 SwirlTarget::value(const Vec2& x) const {
  const double r = checked_radius(x);
  const double psi = (r - r_inner) * (r - r_outer) / r;
  return Vec2(-psi * x.y(), psi * x.x());
}

Mat2 SwirlTarget::jacobian(const Vec2& x) const {
  const double r = checked_radius(x);
  const double ab = r_inner * r_outer;
  const double psi = r - (r_inner + r_outer) + ab / r;
  const double dpsi = 1.0 - ab / (r * r);
  return rotational_jacobian(x, r, psi, dpsi);
}

// Vector Laplacian of phi t_hat is (phi'' + phi'/r - phi/r^2) t_hat = (3 - ab/r^2) t_hat.
Vec2 SwirlTarget::force(double alpha, const Vec2& x) const {
  const double r = checked_radius(x);
  const double ab = r_inner * r_outer;
  const double kappa = -alpha * (3.0 / r - ab / (r * r * r));
  return Vec2(-kappa * x.y(), kappa * x.x());
}

Mat2 SwirlTarget::force_jacobian(double alpha, const Vec2& x) const {
  const double r = checked_radius(x);
  const double ab = r_inner * r_outer;
  const double kappa = -alpha * (3.0 / r - ab / (r * r * r));
  const double dkappa = -alpha * (-3.0 / (r * r) + 3.0 * ab / (r * r * r * r));
  return rotational_jacobian(x, r, kappa, dkappa);
}

Vec2 evaluate_target(const Vec2& x) { return SwirlTarget{}.value(x); }

AnalyticField target_velocity(const SwirlTarget& target) {
  return {[target](const Vec2& x) { return target.value(x); },
          [target](const Vec2& x) { return target.jacobian(x); }};
}

AnalyticField swirl_force(double alpha, const SwirlTarget& target) {
  return {[target, alpha](const Vec2& x) { return target.force(alpha, x); },
          [target, alpha](const Vec2& x) { return target.force_jacobian(alpha, x); }};
}

}  // namespace shapeopt

#include <cmath>

#include <doctest.h>

#include "shapeopt/errors.hpp"
#include "shapeopt/quadrature.hpp"
#include "shapeopt/stokes.hpp"

using namespace shapeopt;

namespace {

TriMesh annulus(double r_inner, int n_theta, int n_r) {
  return generate_annulus_mesh(circle_curve(r_inner), 1.0, n_theta, n_r);
}

// (a, b) with the element quadrature used for loads, on full MINI velocities.
double l2_product(const TriMesh& m, const FlowField& a, const FlowField& b) {
  double s = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const double area = m.geometry(t).area;
    for (const auto& q : kTriangleRule4) s += q.weight * area * a.velocity(m, t, q.bary).dot(b.velocity(m, t, q.bary));
  }
  return s;
}

double max_abs(const std::vector<Vec2>& v) {
  double m = 0.0;
  for (const auto& x : v) m = std::max(m, x.cwiseAbs().maxCoeff());
  return m;
}

const AnalyticField kWavy{
    [](const Vec2& x) { return Vec2(std::sin(3.0 * x.x()), std::cos(2.0 * x.y())); },
    [](const Vec2& x) {
      Mat2 j;
      j << 3.0 * std::cos(3.0 * x.x()), 0.0, 0.0, -2.0 * std::sin(2.0 * x.y());
      return j;
    }};

}  // namespace

TEST_CASE("bubble function") {
  CHECK(bubble({1.0 / 3, 1.0 / 3, 1.0 / 3}) == doctest::Approx(1.0));
  CHECK(bubble({0.5, 0.5, 0.0}) == 0.0);
  const TriMesh m = annulus(0.4, 8, 2);
  const ElementGeometry g = m.geometry(0);
  CHECK(bubble_gradient(g, {1.0 / 3, 1.0 / 3, 1.0 / 3}).norm() < 1e-13);
}

TEST_CASE("assembly: kernel, symmetry and alpha scaling") {
  const TriMesh m = annulus(0.4, 16, 4);
  const SaddleSystem s1 = assemble_stokes(m, 1.0);
  const SaddleSystem s10 = assemble_stokes(m, 10.0);

  const Eigen::SparseMatrix<double> a1 = s1.velocity_block();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(a1.cols());
  CHECK((a1 * ones).cwiseAbs().maxCoeff() < 1e-13);

  const Eigen::SparseMatrix<double> sym = s1.matrix - Eigen::SparseMatrix<double>(s1.matrix.transpose());
  CHECK(sym.norm() == 0.0);

  CHECK((Eigen::SparseMatrix<double>(s10.velocity_block() - 10.0 * a1)).norm() < 1e-14 * a1.norm());
  CHECK((Eigen::SparseMatrix<double>(s10.coupling_block() - s1.coupling_block())).norm() == 0.0);

  // b(c, pi_j) = 0 for a constant velocity c.
  const Eigen::SparseMatrix<double> b = s1.coupling_block();
  Eigen::VectorXd c(b.cols());
  c.head(m.num_nodes()).setConstant(0.7);
  c.tail(m.num_nodes()).setConstant(-1.3);
  CHECK((b * c).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("zero data gives the zero solution") {
  const TriMesh m = annulus(0.4, 16, 4);
  const FlowField y = solve_state(m, 0.5, zero_field(), zero_field());
  CHECK(max_abs(y.velocity_nodal) == 0.0);
  CHECK(max_abs(y.velocity_bubble) == 0.0);
  for (double p : y.pressure_nodal) CHECK(p == 0.0);
}

TEST_CASE("rigid rotation is reproduced exactly") {
  const TriMesh m = annulus(0.4, 16, 4);
  const AnalyticField rot = rotation_field(0.8);
  const FlowField y = solve_state(m, 0.1, zero_field(), rot);
  for (int i = 0; i < m.num_nodes(); ++i) CHECK((y.velocity_nodal[i] - rot(m.node(i))).norm() < 1e-12);
  CHECK(max_abs(y.velocity_bubble) < 1e-12);
  for (double p : y.pressure_nodal) CHECK(std::abs(p) < 1e-12);
}

TEST_CASE("incompatible boundary data is rejected") {
  const TriMesh m = annulus(0.4, 16, 4);
  const AnalyticField inner_normal{
      [](const Vec2& x) { return x.norm() < 0.7 ? Vec2(-x.normalized()) : Vec2(Vec2::Zero()); },
      [](const Vec2&) { return Mat2(Mat2::Zero()); }};
  CHECK_THROWS_AS(solve_state(m, 1.0, zero_field(), inner_normal), CompatibilityViolated);
  CHECK_NOTHROW(check_compatibility(m, rotation_field(2.0)));
}

TEST_CASE("state solution: boundary data, zero-mean pressure, divergence") {
  const TriMesh m = annulus(0.4, 32, 8);
  const double alpha = 0.01;
  const AnalyticField g = rotation_field(0.3);
  const FlowField y = solve_state(m, alpha, kWavy, g);

  for (int i = 0; i < m.num_nodes(); ++i) {
    if (m.marker(i) != NodeMarker::Interior) CHECK(y.velocity_nodal[i] == g(m.node(i)));
  }

  double mean = 0.0, pmax = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangle(t);
    mean += m.geometry(t).area * (y.pressure_nodal[tri[0]] + y.pressure_nodal[tri[1]] + y.pressure_nodal[tri[2]]) / 3;
  }
  for (double p : y.pressure_nodal) pmax = std::max(pmax, std::abs(p));
  CHECK(std::abs(mean) <= 1e-10 * m.total_area() * pmax);

  // -int div(y) pi_j for every P1 pressure function (full MINI velocity).
  std::vector<double> div(m.num_nodes(), 0.0), scale(m.num_nodes(), 0.0);
  for (int t = 0; t < m.num_triangles(); ++t) {
    const ElementGeometry geo = m.geometry(t);
    for (const auto& q : kTriangleRule4) {
      const Mat2 dy = y.gradient(m, t, geo, q.bary);
      for (int k = 0; k < 3; ++k) {
        div[m.triangle(t)[k]] += q.weight * geo.area * dy.trace() * q.bary[k];
        scale[m.triangle(t)[k]] += q.weight * geo.area * dy.cwiseAbs().sum() * q.bary[k];
      }
    }
  }
  double worst = 0.0, total = 0.0;
  for (int i = 0; i < m.num_nodes(); ++i) {
    worst = std::max(worst, std::abs(div[i]));
    total = std::max(total, scale[i]);
  }
  CHECK(worst <= 1e-10 * total);
}

TEST_CASE("energy identity for the homogeneous part") {
  const TriMesh m = annulus(0.4, 32, 8);
  const double alpha = 0.05;
  const AnalyticField f = swirl_force(alpha);
  const AnalyticField g = rotation_field(0.3);
  FlowField w = solve_state(m, alpha, f, g);
  for (int i = 0; i < m.num_nodes(); ++i) w.velocity_nodal[i] -= g(m.node(i));

  double energy = 0.0, load = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const ElementGeometry geo = m.geometry(t);
    for (const auto& q : kTriangleRule4) {
      energy += q.weight * geo.area * alpha * w.gradient(m, t, geo, q.bary).squaredNorm();
      load += q.weight * geo.area * f(geo.map(q.bary)).dot(w.velocity(m, t, q.bary));
    }
  }
  CHECK(energy == doctest::Approx(load).epsilon(1e-8));
}

TEST_CASE("alpha scaling") {
  const TriMesh m = annulus(0.4, 32, 8);
  const double c = 7.5;
  const AnalyticField f1{kWavy.value, kWavy.jacobian};
  const AnalyticField fc{[&](const Vec2& x) { return Vec2(c * kWavy(x)); },
                         [&](const Vec2& x) { return Mat2(c * kWavy.jacobian(x)); }};
  const FlowField y1 = solve_state(m, 0.2, f1, zero_field());
  const FlowField yc = solve_state(m, 0.2 * c, fc, zero_field());
  double du = 0.0, dp = 0.0, pn = 0.0;
  for (int i = 0; i < m.num_nodes(); ++i) {
    du = std::max(du, (yc.velocity_nodal[i] - y1.velocity_nodal[i]).norm());
    dp = std::max(dp, std::abs(yc.pressure_nodal[i] - c * y1.pressure_nodal[i]));
    pn = std::max(pn, std::abs(c * y1.pressure_nodal[i]));
  }
  CHECK(du <= 1e-10 * max_abs(y1.velocity_nodal));
  CHECK(dp <= 1e-10 * pn);
}

TEST_CASE("adjoint: zero misfit, symmetry and non-triviality") {
  const TriMesh m = annulus(0.4, 32, 8);
  const StokesSolver solver(m, 0.3);

  const FlowField rot = solve_state(solver, zero_field(), rotation_field(1.1));
  const FlowField v0 = solve_adjoint(solver, rot, rotation_field(1.1));
  CHECK(max_abs(v0.velocity_nodal) < 1e-12);

  const AnalyticField yd = target_velocity();
  const FlowField y = solve_state(solver, swirl_force(0.3), zero_field());
  const FlowField v = solve_adjoint(solver, y, yd);
  const FlowField v2 = solver.solve([](int, const Bary&, const Vec2& x) { return kWavy(x); }, {});

  double lhs = 0.0, rhs = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) {
    const ElementGeometry geo = m.geometry(t);
    for (const auto& q : kTriangleRule4) {
      const Vec2 x = geo.map(q.bary);
      lhs += q.weight * geo.area * (y.velocity(m, t, q.bary) - yd(x)).dot(v2.velocity(m, t, q.bary));
      rhs += q.weight * geo.area * kWavy(x).dot(v.velocity(m, t, q.bary));
    }
  }
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("case 1 initial mesh, alpha = 1: nonzero adjoint and positive cost") {
  const TriMesh m = annulus(0.4, 64, 16);
  const StokesSolver solver(m, 1.0);
  const AnalyticField yd = target_velocity();
  const FlowField y = solve_state(solver, swirl_force(1.0), zero_field());
  const FlowField v = solve_adjoint(solver, y, yd);
  CHECK(max_abs(v.velocity_nodal) > 1e-4);
  CHECK(compute_cost(m, y, yd) > 0.0);
}

TEST_CASE("cost functional") {
  const TriMesh m = annulus(0.4, 16, 4);
  const FlowField rot = solve_state(m, 1.0, zero_field(), rotation_field(0.5));
  CHECK(compute_cost(m, rot, rotation_field(0.5)) < 1e-28);

  const AnalyticField unit{[](const Vec2&) { return Vec2(1.0, 0.0); }, [](const Vec2&) { return Mat2(Mat2::Zero()); }};
  CHECK(compute_cost(m, FlowField::zeros(m), unit) == doctest::Approx(0.5 * m.total_area()).epsilon(1e-14));
  CHECK(l2_product(m, rot, rot) > 0.0);
}

TEST_CASE("manufactured swirl converges at MINI rates") {
  // The swirl has zero pressure, which the scheme reproduces to roundoff, so
  // the pressure rate is taken from the same flow with p = xy added.
  const double alpha = 0.01;
  const AnalyticField yd = target_velocity();
  const AnalyticField swirl = swirl_force(alpha);
  const AnalyticField f_p{[&](const Vec2& x) { return Vec2(swirl(x) + Vec2(x.y(), x.x())); }, swirl.jacobian};
  auto zero_p = [](const Vec2&) { return 0.0; };
  auto xy = [](const Vec2& x) { return x.x() * x.y(); };
  ErrorNorms prev, prev_p;
  for (int level = 0; level < 3; ++level) {
    const int nt = 16 << level, nr = 4 << level;
    const TriMesh m = annulus(0.2, nt, nr);
    const ErrorNorms e = flow_errors(m, solve_state(m, alpha, swirl, zero_field()), yd, zero_p);
    const ErrorNorms ep = flow_errors(m, solve_state(m, alpha, f_p, zero_field()), yd, xy);
    CHECK(e.pressure_l2 < 1e-12);
    if (level > 0) {
      CHECK(prev.velocity_l2 / e.velocity_l2 >= 3.2);
      CHECK(prev.velocity_l2 / e.velocity_l2 <= 4.8);
      CHECK(prev.velocity_h1 / e.velocity_h1 >= 1.6);
      CHECK(prev.velocity_h1 / e.velocity_h1 <= 2.4);
      CHECK(prev_p.pressure_l2 / ep.pressure_l2 >= 1.6);
      CHECK(prev_p.pressure_l2 / ep.pressure_l2 <= 4.8);
    }
    prev = e;
    prev_p = ep;
  }
}

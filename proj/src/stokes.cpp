#include "shapeopt/stokes.hpp"

#include <algorithm>
#include <cmath>

#include "shapeopt/errors.hpp"
#include "shapeopt/quadrature.hpp"

namespace shapeopt {

double bubble(const Bary& b) { return 27.0 * b[0] * b[1] * b[2]; }

Vec2 bubble_gradient(const ElementGeometry& g, const Bary& b) {
  return 27.0 * (b[1] * b[2] * g.grad_lambda[0] + b[0] * b[2] * g.grad_lambda[1] +
                 b[0] * b[1] * g.grad_lambda[2]);
}

FlowField FlowField::zeros(const TriMesh& mesh) {
  FlowField f;
  f.velocity_nodal.assign(mesh.num_nodes(), Vec2::Zero());
  f.velocity_bubble.assign(mesh.num_triangles(), Vec2::Zero());
  f.pressure_nodal.assign(mesh.num_nodes(), 0.0);
  return f;
}

Vec2 FlowField::velocity(const TriMesh& mesh, int t, const Bary& b) const {
  const auto& tri = mesh.triangle(t);
  return b[0] * velocity_nodal[tri[0]] + b[1] * velocity_nodal[tri[1]] + b[2] * velocity_nodal[tri[2]] +
         bubble(b) * velocity_bubble[t];
}

Mat2 FlowField::nodal_gradient(const TriMesh& mesh, int t, const ElementGeometry& g) const {
  const auto& tri = mesh.triangle(t);
  Mat2 d = Mat2::Zero();
  for (int k = 0; k < 3; ++k) d += velocity_nodal[tri[k]] * g.grad_lambda[k].transpose();
  return d;
}

Mat2 FlowField::gradient(const TriMesh& mesh, int t, const ElementGeometry& g, const Bary& b) const {
  return nodal_gradient(mesh, t, g) + velocity_bubble[t] * bubble_gradient(g, b).transpose();
}

double FlowField::pressure(const TriMesh& mesh, int t, const Bary& b) const {
  const auto& tri = mesh.triangle(t);
  return b[0] * pressure_nodal[tri[0]] + b[1] * pressure_nodal[tri[1]] + b[2] * pressure_nodal[tri[2]];
}

Eigen::SparseMatrix<double> SaddleSystem::velocity_block() const {
  return matrix.block(0, 0, 2 * n_nodes, 2 * n_nodes);
}

Eigen::SparseMatrix<double> SaddleSystem::coupling_block() const {
  return matrix.block(2 * n_nodes, 0, n_nodes, 2 * n_nodes);
}

SaddleSystem assemble_stokes(const TriMesh& mesh, double alpha) {
  if (!(alpha > 0.0)) throw Error("viscosity alpha must be positive");
  SaddleSystem sys;
  sys.n_nodes = mesh.num_nodes();
  sys.alpha = alpha;
  sys.condensation.resize(mesh.num_triangles());
  sys.bubble_load.assign(mesh.num_triangles(), Vec2::Zero());

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(mesh.num_triangles()) * 72);

  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    const ElementGeometry g = mesh.geometry(t);

    // a(lambda_i e_c, lambda_j e_c); nodal/bubble cross terms vanish since
    // the bubble has zero mean gradient.
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double a = alpha * g.area * g.grad_lambda[i].dot(g.grad_lambda[j]);
        trip.emplace_back(sys.ux(tri[i]), sys.ux(tri[j]), a);
        trip.emplace_back(sys.uy(tri[i]), sys.uy(tri[j]), a);
      }
    }

    // b(lambda_i e_c, lambda_j) = -int d_c lambda_i * lambda_j = -d_c lambda_i * |T| / 3
    for (int j = 0; j < 3; ++j) {
      for (int i = 0; i < 3; ++i) {
        const double bx = -g.grad_lambda[i].x() * g.area / 3.0;
        const double by = -g.grad_lambda[i].y() * g.area / 3.0;
        trip.emplace_back(sys.p(tri[j]), sys.ux(tri[i]), bx);
        trip.emplace_back(sys.p(tri[j]), sys.uy(tri[i]), by);
        trip.emplace_back(sys.ux(tri[i]), sys.p(tri[j]), bx);
        trip.emplace_back(sys.uy(tri[i]), sys.p(tri[j]), by);
      }
    }

    ElementCondensation& ec = sys.condensation[t];
    for (const auto& qp : kTriangleRule4) {
      const Vec2 gb = bubble_gradient(g, qp.bary);
      const double w = qp.weight * g.area;
      ec.stiffness += alpha * w * gb.squaredNorm();
      for (int j = 0; j < 3; ++j) {
        ec.coupling(0, j) -= w * gb.x() * qp.bary[j];
        ec.coupling(1, j) -= w * gb.y() * qp.bary[j];
      }
    }
    // Eliminating the bubble leaves -C in the pressure block,
    // C_jk = sum_c coupling(c, j) coupling(c, k) / stiffness.
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) {
        const double c = (ec.coupling(0, j) * ec.coupling(0, k) + ec.coupling(1, j) * ec.coupling(1, k)) /
                         ec.stiffness;
        trip.emplace_back(sys.p(tri[j]), sys.p(tri[k]), -c);
      }
      trip.emplace_back(sys.p(tri[j]), sys.multiplier(), g.area / 3.0);
      trip.emplace_back(sys.multiplier(), sys.p(tri[j]), g.area / 3.0);
    }
  }

  sys.matrix.resize(sys.size(), sys.size());
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  sys.rhs = Eigen::VectorXd::Zero(sys.size());
  return sys;
}

namespace {

void accumulate_load(const TriMesh& mesh, const SaddleSystem& sys, const BodyLoad& load,
                     Eigen::VectorXd& rhs, std::vector<Vec2>& bubble_load) {
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    const ElementGeometry g = mesh.geometry(t);
    Vec2 fb = Vec2::Zero();
    for (const auto& qp : kTriangleRule4) {
      const Vec2 f = load(t, qp.bary, g.map(qp.bary));
      const double w = qp.weight * g.area;
      for (int k = 0; k < 3; ++k) {
        rhs[sys.ux(tri[k])] += w * f.x() * qp.bary[k];
        rhs[sys.uy(tri[k])] += w * f.y() * qp.bary[k];
      }
      fb += w * bubble(qp.bary) * f;
    }
    bubble_load[t] += fb;
    const ElementCondensation& ec = sys.condensation[t];
    for (int j = 0; j < 3; ++j) {
      rhs[sys.p(tri[j])] -= (ec.coupling(0, j) * fb.x() + ec.coupling(1, j) * fb.y()) / ec.stiffness;
    }
  }
}

}  // namespace

void add_body_load(const TriMesh& mesh, SaddleSystem& sys, const BodyLoad& load) {
  accumulate_load(mesh, sys, load, sys.rhs, sys.bubble_load);
}

StokesSolver::StokesSolver(const TriMesh& mesh, double alpha)
    : mesh_(mesh), system_(assemble_stokes(mesh, alpha)) {
  std::vector<char> constrained(system_.size(), 0);
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    if (mesh.marker(i) != NodeMarker::Interior) {
      boundary_nodes_.push_back(i);
      system_.dirichlet.emplace_back(system_.ux(i), 0.0);
      system_.dirichlet.emplace_back(system_.uy(i), 0.0);
      constrained[system_.ux(i)] = 1;
      constrained[system_.uy(i)] = 1;
    }
  }

  // Symmetric elimination: drop constrained rows and columns, unit diagonal.
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(system_.matrix.nonZeros());
  for (int col = 0; col < system_.matrix.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(system_.matrix, col); it; ++it) {
      if (constrained[it.row()] || constrained[it.col()]) continue;
      trip.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (int dof = 0; dof < system_.size(); ++dof) {
    if (constrained[dof]) trip.emplace_back(dof, dof, 1.0);
  }
  constrained_.resize(system_.size(), system_.size());
  constrained_.setFromTriplets(trip.begin(), trip.end());
  constrained_.makeCompressed();

  lu_.analyzePattern(constrained_);
  lu_.factorize(constrained_);
  if (lu_.info() != Eigen::Success) {
    throw SolverBreakdown("sparse LU factorization of the Stokes system failed: " + lu_.lastErrorMessage());
  }
}

FlowField StokesSolver::solve(const BodyLoad& load, const std::vector<Vec2>& boundary_values) const {
  const SaddleSystem& sys = system_;
  Eigen::VectorXd load_rhs = sys.rhs;
  std::vector<Vec2> bubble_load = sys.bubble_load;
  accumulate_load(mesh_, sys, load, load_rhs, bubble_load);

  Eigen::VectorXd lift = Eigen::VectorXd::Zero(sys.size());
  if (!boundary_values.empty()) {
    for (int i : boundary_nodes_) {
      lift[sys.ux(i)] = boundary_values[i].x();
      lift[sys.uy(i)] = boundary_values[i].y();
    }
  }
  Eigen::VectorXd rhs = load_rhs - sys.matrix * lift;
  for (int i : boundary_nodes_) {
    rhs[sys.ux(i)] = lift[sys.ux(i)];
    rhs[sys.uy(i)] = lift[sys.uy(i)];
  }

  Eigen::VectorXd x = lu_.solve(rhs);
  x += lu_.solve(rhs - constrained_ * x);  // one step of iterative refinement
  const double rhs_norm = rhs.norm();
  const double res = (constrained_ * x - rhs).norm();
  if (!x.allFinite() || (rhs_norm > 0.0 ? res / rhs_norm : res) >= kSolverTolerance) {
    throw SolverBreakdown("Stokes solve residual " + std::to_string(res) + " relative to " +
                          std::to_string(rhs_norm) + " misses the tolerance");
  }

  FlowField out;
  const int n = sys.n_nodes;
  out.velocity_nodal.resize(n);
  out.pressure_nodal.resize(n);
  for (int i = 0; i < n; ++i) {
    out.velocity_nodal[i] = Vec2(x[sys.ux(i)], x[sys.uy(i)]);
    out.pressure_nodal[i] = x[sys.p(i)];
  }
  out.velocity_bubble.resize(mesh_.num_triangles());
  for (int t = 0; t < mesh_.num_triangles(); ++t) {
    const auto& tri = mesh_.triangle(t);
    const ElementCondensation& ec = sys.condensation[t];
    const Eigen::Vector3d p(out.pressure_nodal[tri[0]], out.pressure_nodal[tri[1]],
                            out.pressure_nodal[tri[2]]);
    out.velocity_bubble[t] = (bubble_load[t] - ec.coupling * p) / ec.stiffness;
  }
  return out;
}

void check_compatibility(const TriMesh& mesh, const AnalyticField& g) {
  double flux = 0.0;
  double perimeter = 0.0;
  double gmax = 0.0;
  for (const auto& e : mesh.boundary_edges()) {
    const Vec2 a = mesh.node(e.v1);
    const Vec2 b = mesh.node(e.v2);
    const Vec2 tangent = b - a;
    const Vec2 normal_len(tangent.y(), -tangent.x());  // outward, scaled by edge length
    for (const auto& ep : kEdgeRule) flux += ep.weight * g((1.0 - ep.s) * a + ep.s * b).dot(normal_len);
    perimeter += tangent.norm();
    gmax = std::max(gmax, g(a).norm());
  }
  if (std::abs(flux) > 1e-8 * perimeter * gmax) {
    throw CompatibilityViolated("boundary data has net flux " + std::to_string(flux));
  }
}

FlowField solve_state(const StokesSolver& solver, const AnalyticField& f, const AnalyticField& g) {
  const TriMesh& mesh = solver.mesh();
  check_compatibility(mesh, g);
  std::vector<Vec2> bc(mesh.num_nodes(), Vec2::Zero());
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    if (mesh.marker(i) != NodeMarker::Interior) bc[i] = g(mesh.node(i));
  }
  return solver.solve([&f](int, const Bary&, const Vec2& x) { return f(x); }, bc);
}

FlowField solve_state(const TriMesh& mesh, double alpha, const AnalyticField& f, const AnalyticField& g) {
  return solve_state(StokesSolver(mesh, alpha), f, g);
}

FlowField solve_adjoint(const StokesSolver& solver, const FlowField& y, const AnalyticField& y_d) {
  const TriMesh& mesh = solver.mesh();
  return solver.solve(
      [&](int t, const Bary& b, const Vec2& x) { return Vec2(y.velocity(mesh, t, b) - y_d(x)); }, {});
}

FlowField solve_adjoint(const TriMesh& mesh, double alpha, const FlowField& y, const AnalyticField& y_d) {
  return solve_adjoint(StokesSolver(mesh, alpha), y, y_d);
}

double compute_cost(const TriMesh& mesh, const FlowField& y, const AnalyticField& y_d) {
  double j = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementGeometry g = mesh.geometry(t);
    for (const auto& qp : kTriangleRule4) {
      j += qp.weight * g.area * (y.velocity(mesh, t, qp.bary) - y_d(g.map(qp.bary))).squaredNorm();
    }
  }
  return 0.5 * j;
}

std::vector<Vec2> boundary_reactions(const TriMesh& mesh, double alpha, const FlowField& u,
                                     const BodyLoad& load) {
  std::vector<Vec2> r(mesh.num_nodes(), Vec2::Zero());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    if (mesh.marker(tri[0]) == NodeMarker::Interior && mesh.marker(tri[1]) == NodeMarker::Interior &&
        mesh.marker(tri[2]) == NodeMarker::Interior) {
      continue;
    }
    const ElementGeometry g = mesh.geometry(t);
    const Mat2 du = u.nodal_gradient(mesh, t, g);
    const double p_mean =
        (u.pressure_nodal[tri[0]] + u.pressure_nodal[tri[1]] + u.pressure_nodal[tri[2]]) / 3.0;
    std::array<Vec2, 3> load_k{Vec2::Zero(), Vec2::Zero(), Vec2::Zero()};
    for (const auto& qp : kTriangleRule4) {
      const Vec2 f = load(t, qp.bary, g.map(qp.bary));
      for (int k = 0; k < 3; ++k) load_k[k] += qp.weight * g.area * qp.bary[k] * f;
    }
    for (int k = 0; k < 3; ++k) {
      if (mesh.marker(tri[k]) == NodeMarker::Interior) continue;
      const Vec2& gl = g.grad_lambda[k];
      r[tri[k]] += alpha * g.area * (du * gl) - g.area * p_mean * gl - load_k[k];
    }
  }
  return r;
}

ErrorNorms flow_errors(const TriMesh& mesh, const FlowField& y, const AnalyticField& exact_velocity,
                       const std::function<double(const Vec2&)>& exact_pressure) {
  ErrorNorms e;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementGeometry g = mesh.geometry(t);
    for (const auto& qp : kTriangleRule4) {
      const Vec2 x = g.map(qp.bary);
      const double w = qp.weight * g.area;
      e.velocity_l2 += w * (y.velocity(mesh, t, qp.bary) - exact_velocity(x)).squaredNorm();
      e.velocity_h1 += w * (y.gradient(mesh, t, g, qp.bary) - exact_velocity.jacobian(x)).squaredNorm();
      const double dp = y.pressure(mesh, t, qp.bary) - exact_pressure(x);
      e.pressure_l2 += w * dp * dp;
    }
  }
  e.velocity_l2 = std::sqrt(e.velocity_l2);
  e.velocity_h1 = std::sqrt(e.velocity_h1);
  e.pressure_l2 = std::sqrt(e.pressure_l2);
  return e;
}

}  // namespace shapeopt

#include "shapeopt/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <optional>

#include <Eigen/SparseCholesky>

namespace shapeopt {

ShapeProblem ShapeProblem::swirl(double alpha) {
  return ShapeProblem{alpha, swirl_force(alpha), zero_field(), target_velocity()};
}

Eigen::SparseMatrix<double> laplacian_stiffness(const TriMesh& mesh) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(9 * mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    const ElementGeometry geo = mesh.geometry(t);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        trips.emplace_back(tri[a], tri[b], geo.area * geo.grad_lambda[a].dot(geo.grad_lambda[b]));
      }
    }
  }
  Eigen::SparseMatrix<double> k(mesh.num_nodes(), mesh.num_nodes());
  k.setFromTriplets(trips.begin(), trips.end());
  return k;
}

double h1_seminorm(const TriMesh& mesh, const DisplacementField& d) {
  double e = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    const ElementGeometry geo = mesh.geometry(t);
    Mat2 dd = Mat2::Zero();
    for (int k = 0; k < 3; ++k) dd += d[tri[k]] * geo.grad_lambda[k].transpose();
    e += geo.area * dd.squaredNorm();
  }
  return std::sqrt(e);
}

namespace {

// Solves K u = rhs for both components with u fixed to `fixed` on the
// nodes where constrained[i] is set.
DisplacementField solve_vector_laplacian(const TriMesh& mesh, const std::vector<char>& constrained,
                                         const DisplacementField& fixed, const DisplacementField& rhs) {
  const int n = mesh.num_nodes();
  std::vector<int> index(n, -1);
  int m = 0;
  for (int i = 0; i < n; ++i) {
    if (!constrained[i]) index[i] = m++;
  }

  const Eigen::SparseMatrix<double> k = laplacian_stiffness(mesh);
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::MatrixXd b(m, 2);
  for (int i = 0; i < n; ++i) {
    if (index[i] >= 0) b.row(index[i]) = rhs[i].transpose();
  }
  for (int col = 0; col < k.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(k, col); it; ++it) {
      const int r = index[it.row()];
      if (r < 0) continue;
      const int c = index[it.col()];
      if (c >= 0) {
        trips.emplace_back(r, c, it.value());
      } else {
        b.row(r) -= it.value() * fixed[it.col()].transpose();
      }
    }
  }
  Eigen::SparseMatrix<double> reduced(m, m);
  reduced.setFromTriplets(trips.begin(), trips.end());

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(reduced);
  if (ldlt.info() != Eigen::Success) throw SolverBreakdown("vector Laplacian factorization failed");
  const Eigen::MatrixXd u = ldlt.solve(b);
  if (ldlt.info() != Eigen::Success) throw SolverBreakdown("vector Laplacian solve failed");
  const double bn = b.norm();
  if (bn > 0.0 && (reduced * u - b).norm() > kSolverTolerance * bn) {
    throw SolverBreakdown("vector Laplacian residual above tolerance");
  }

  DisplacementField out(n);
  for (int i = 0; i < n; ++i) out[i] = index[i] >= 0 ? Vec2(u.row(index[i]).transpose()) : fixed[i];
  return out;
}

}  // namespace

DisplacementField harmonic_extension(const TriMesh& mesh, const std::vector<Vec2>& inner_values) {
  const auto& loop = mesh.inner_loop();
  if (inner_values.size() != loop.size()) throw Error("inner boundary value count does not match the loop");
  const int n = mesh.num_nodes();
  std::vector<char> constrained(n, 0);
  for (int i = 0; i < n; ++i) constrained[i] = mesh.marker(i) != NodeMarker::Interior;
  DisplacementField fixed(n, Vec2::Zero());
  for (std::size_t k = 0; k < loop.size(); ++k) fixed[loop[k]] = inner_values[k];
  return solve_vector_laplacian(mesh, constrained, fixed, DisplacementField(n, Vec2::Zero()));
}

Descent descent_direction(const TriMesh& mesh, const BoundaryDensity& density, DescentKind kind) {
  const int n = mesh.num_nodes();
  Descent out;
  if (kind == DescentKind::H1) {
    DisplacementField load(n, Vec2::Zero());
    for (std::size_t k = 0; k < density.nodes.size(); ++k) {
      load[density.nodes[k]] = density.w[k] * density.s[k] * density.normal[k];
    }
    std::vector<char> constrained(n, 0);
    for (int i = 0; i < n; ++i) constrained[i] = mesh.marker(i) == NodeMarker::OuterFixed;
    out.d = solve_vector_laplacian(mesh, constrained, DisplacementField(n, Vec2::Zero()), load);
  } else {
    std::vector<Vec2> inner(density.nodes.size());
    for (std::size_t k = 0; k < inner.size(); ++k) inner[k] = density.w[k] * density.normal[k];
    out.d = harmonic_extension(mesh, inner);
  }

  out.slope = density.pair(out.d);
  out.h1_norm = h1_seminorm(mesh, out.d);
  out.density = density;
  return out;
}

Descent descent_direction(const TriMesh& mesh, const ShapeProblem& problem, const FlowField& y,
                          const FlowField& v, DescentKind kind) {
  return descent_direction(
      mesh, boundary_gradient_density(mesh, problem.alpha, y, v, problem.f, problem.g, problem.y_d), kind);
}

LineSearchResult armijo_step(const TriMesh& mesh, double cost, const Descent& descent,
                             const ShapeProblem& problem, const OptimizerSettings& settings) {
  double max_d = 0.0;
  for (const Vec2& di : descent.d) max_d = std::max(max_d, di.norm());
  if (!(max_d > 0.0)) throw LineSearchFailed("descent direction is zero");

  double h = settings.step_cap * min_edge_length(mesh) / max_d;
  for (int b = 0; b <= settings.max_backtracks; ++b, h *= 0.5) {
    std::optional<TriMesh> trial;
    try {
      trial.emplace(deform_mesh(mesh, descent.d, h));
    } catch (const StepTooLarge&) {
      continue;
    }
    auto solver = std::make_shared<const StokesSolver>(*trial, problem.alpha);
    FlowField y = solve_state(*solver, problem.f, problem.g);
    const double j = compute_cost(*trial, y, problem.y_d);
    if (j <= cost - settings.armijo_c * h * descent.slope) {
      return LineSearchResult{h, b, std::move(*trial), std::move(solver), std::move(y), j};
    }
  }
  throw LineSearchFailed("no sufficient decrease after " + std::to_string(settings.max_backtracks) +
                         " backtracks");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::MaxIterations: return "max_iters";
    case Termination::GradientTolerance: return "grad_tol";
    case Termination::Stagnation: return "stagnation";
    case Termination::LineSearchFailed: return "line_search_failed";
  }
  return "unknown";
}

OptState optimize(const TriMesh& initial, const ShapeProblem& problem, const OptimizerSettings& settings,
                  const IterationObserver& observer) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();

  auto solver = std::make_shared<const StokesSolver>(initial, problem.alpha);
  OptState state{initial, 0, 0.0, {}, 0.0, {}, {}, {}, Termination::MaxIterations};
  state.y = solve_state(*solver, problem.f, problem.g);
  state.cost = compute_cost(initial, state.y, problem.y_d);

  double reference = settings.grad_ref;
  double previous_cost = state.cost;
  const double initial_cost = state.cost;

  while (true) {
    const double quality = mesh_quality(state.mesh);
    if (quality < settings.min_quality) {
      throw MeshQualityAbort("mesh quality " + std::to_string(quality) + " below " +
                                 std::to_string(settings.min_quality) + " at iteration " +
                                 std::to_string(state.k),
                             state.mesh, state.history);
    }

    state.v = solve_adjoint(*solver, state.y, problem.y_d);
    const Descent descent = descent_direction(state.mesh, problem, state.y, state.v, settings.descent);
    state.d = descent.d;

    IterationRecord rec;
    rec.k = state.k;
    rec.cost = state.cost;
    rec.grad_norm = descent.h1_norm;
    rec.step = state.step;
    rec.mesh_quality = quality;
    rec.mean_inner_radius = mean_inner_radius(state.mesh);
    rec.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    state.history.push_back(rec);
    if (observer) observer(state);

    if (state.k == 0 && !(reference > 0.0)) reference = descent.h1_norm;
    if (state.k >= settings.max_iters) {
      state.termination = Termination::MaxIterations;
      break;
    }
    if (descent.h1_norm < settings.grad_tol * reference) {
      state.termination = Termination::GradientTolerance;
      break;
    }
    if (state.k > 0 && std::abs(state.cost - previous_cost) < settings.stagnation_tol * initial_cost) {
      state.termination = Termination::Stagnation;
      break;
    }

    std::optional<LineSearchResult> step;
    try {
      step.emplace(armijo_step(state.mesh, state.cost, descent, problem, settings));
    } catch (const LineSearchFailed&) {
      state.termination = Termination::LineSearchFailed;
      break;
    }
    previous_cost = state.cost;
    state.mesh = std::move(step->mesh);
    solver = std::move(step->solver);
    state.y = std::move(step->y);
    state.cost = step->cost;
    state.step = step->step;
    ++state.k;
  }
  return state;
}

}  // namespace shapeopt

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "shapeopt/errors.hpp"
#include "shapeopt/fields.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/shape_calculus.hpp"
#include "shapeopt/stokes.hpp"

namespace shapeopt {

/// Data of the tracking problem: viscosity, body force, Dirichlet data and
/// target velocity.
struct ShapeProblem {
  double alpha = 0.01;
  AnalyticField f;
  AnalyticField g;
  AnalyticField y_d;

  /// The swirl experiment: f = -alpha Lap y_d, g = 0, y_d the swirl target.
  static ShapeProblem swirl(double alpha);
};

enum class DescentKind { H1, RawNormal };

struct Descent {
  DisplacementField d;
  BoundaryDensity density;
  /// dJ(Omega; d) through the boundary pairing.
  double slope = 0.0;
  /// sqrt(int |Dd|^2).
  double h1_norm = 0.0;
};

/// Scalar P1 stiffness int grad(phi_i) . grad(phi_j) over the mesh.
Eigen::SparseMatrix<double> laplacian_stiffness(const TriMesh& mesh);

/// sqrt(int |Dd|^2) of the P1 interpolant of d.
double h1_seminorm(const TriMesh& mesh, const DisplacementField& d);

/// Discrete harmonic field equal to inner_values[k] at inner_loop()[k] and
/// zero on the outer loop.
DisplacementField harmonic_extension(const TriMesh& mesh, const std::vector<Vec2>& inner_values);

/// H1: int Dd : DV = sum_i w_i s_i (V . n)_i for all V with V = 0 on the
/// outer boundary, and d = 0 there.
/// RawNormal: d = w n on the inner loop, 0 on the outer one, extended
/// harmonically into the interior.
Descent descent_direction(const TriMesh& mesh, const BoundaryDensity& density,
                          DescentKind kind = DescentKind::H1);
Descent descent_direction(const TriMesh& mesh, const ShapeProblem& problem, const FlowField& y,
                          const FlowField& v, DescentKind kind = DescentKind::H1);

struct OptimizerSettings {
  int max_iters = 30;
  /// Stop once ||d_k|| < grad_tol * reference, where the reference is
  /// grad_ref if positive and ||d_0|| otherwise.
  double grad_tol = 1e-6;
  double grad_ref = 0.0;
  /// Largest nodal displacement of the first trial, in units of the
  /// shortest edge.
  double step_cap = 1.0;
  double armijo_c = 1e-4;
  int max_backtracks = 30;
  double stagnation_tol = 1e-12;
  double min_quality = 0.05;
  DescentKind descent = DescentKind::H1;
};

struct LineSearchResult {
  double step = 0.0;
  int backtracks = 0;
  TriMesh mesh;
  std::shared_ptr<const StokesSolver> solver;
  FlowField y;
  double cost = 0.0;
};

/// Backtracking on x -> x - h d starting from h0 = step_cap * min_edge / max|d_i|.
/// Halves h while J(h) > cost - c h slope or the trial mesh degenerates.
/// Throws LineSearchFailed after max_backtracks halvings.
LineSearchResult armijo_step(const TriMesh& mesh, double cost, const Descent& descent,
                             const ShapeProblem& problem, const OptimizerSettings& settings);

struct IterationRecord {
  int k = 0;
  double cost = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;  // the step that produced this iterate; 0 for k = 0
  double mesh_quality = 0.0;
  double mean_inner_radius = 0.0;
  double wall_seconds = 0.0;  // since the start of optimize()
};

enum class Termination { MaxIterations, GradientTolerance, Stagnation, LineSearchFailed };

std::string to_string(Termination t);

struct OptState {
  TriMesh mesh;
  int k = 0;
  double cost = 0.0;
  DisplacementField d;
  double step = 0.0;
  FlowField y;
  FlowField v;
  std::vector<IterationRecord> history;
  Termination termination = Termination::MaxIterations;
};

/// An accepted iterate fell below the minimum mesh quality.
class MeshQualityAbort : public Error {
 public:
  MeshQualityAbort(const std::string& what, TriMesh mesh, std::vector<IterationRecord> history)
      : Error(what), mesh_(std::move(mesh)), history_(std::move(history)) {}
  const TriMesh& mesh() const { return mesh_; }
  const std::vector<IterationRecord>& history() const { return history_; }

 private:
  TriMesh mesh_;
  std::vector<IterationRecord> history_;
};

/// Called once per accepted iterate (including the initial one) after its
/// record is appended to state.history.
using IterationObserver = std::function<void(const OptState&)>;

/// Solve state, solve adjoint, boundary density, descent direction, Armijo
/// update; repeat until max_iters, the gradient tolerance, cost stagnation
/// or a failed line search.
OptState optimize(const TriMesh& initial, const ShapeProblem& problem, const OptimizerSettings& settings,
                  const IterationObserver& observer = {});

}  // namespace shapeopt

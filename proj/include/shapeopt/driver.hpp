#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "shapeopt/config.hpp"
#include "shapeopt/optimizer.hpp"

namespace shapeopt {

/// Legacy VTK 2.0 ASCII unstructured grid: nodal velocity and pressure.
void write_vtk(const std::string& path, const TriMesh& mesh, const FlowField& y);

/// iter,cost,grad_norm,step,mesh_quality,mean_inner_radius
void write_history_csv(const std::string& path, const std::vector<IterationRecord>& history);
/// iter,wall_seconds
void write_timing_csv(const std::string& path, const std::vector<IterationRecord>& history);
/// node_id,x,y for inner-loop nodes in loop order (1-based ids).
void write_boundary_csv(const std::string& path, const TriMesh& mesh);

/// Test directions for gradient checks, all zero on the outer loop and
/// harmonic inside. On the inner loop, with n the vertex normal, tau its
/// rotation and theta the polar angle:
///   normal:   n
///   wobble:   (1 + 0.5 cos theta) n
///   skewed:   (1 + 0.3 sin 2 theta) n + 0.4 tau
///   tangent:  tau
PerturbationField perturbation_field(const TriMesh& mesh, const std::string& name);

struct GradientComparison {
  std::string field;
  double boundary = 0.0;
  double distributed = 0.0;
  double fd = 0.0;

  /// Largest of the three pairwise |a - b| / max(|a|, |b|, 1e-14).
  double max_relative_gap() const;
};

std::vector<GradientComparison> compare_gradients(const TriMesh& mesh, const ShapeProblem& problem,
                                                  const std::vector<std::string>& fields, double t = 1e-3);

void write_gradient_csv(const std::string& path, const std::vector<GradientComparison>& rows);

inline constexpr double kGradientTolerance = 0.05;

struct RunResult {
  int exit_code = 0;
  std::string termination;
  int iterations = 0;
  double final_cost = 0.0;
  double mean_inner_radius = 0.0;
  double radius_rms_error = 0.0;
  double wall_seconds = 0.0;
};

/// Runs one optimization and fills config.output_dir (created if its parent
/// exists). Exit code 0 on max_iters, grad_tol or stagnation, 2 on a failed
/// line search or a mesh-quality abort. I/O failures throw Error.
RunResult run_experiment(const OptConfig& config, std::ostream* log = nullptr);

/// One run per alpha, concurrently, in output_dir/alpha_<value>.
std::vector<RunResult> run_sweep(const OptConfig& config, const std::vector<double>& alphas,
                                 std::ostream* log = nullptr);

}  // namespace shapeopt

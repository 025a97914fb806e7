#pragma once

#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "shapeopt/fields.hpp"
#include "shapeopt/mesh.hpp"

namespace shapeopt {

/// Cubic bubble 27 * l1 * l2 * l3 and its gradient on one triangle.
double bubble(const Bary& b);
Vec2 bubble_gradient(const ElementGeometry& g, const Bary& b);

/// Discrete MINI velocity (P1 nodal part + one bubble coefficient per
/// triangle) and P1 pressure.
struct FlowField {
  std::vector<Vec2> velocity_nodal;
  std::vector<Vec2> velocity_bubble;
  std::vector<double> pressure_nodal;

  static FlowField zeros(const TriMesh& mesh);

  Vec2 velocity(const TriMesh& mesh, int t, const Bary& b) const;
  /// Full velocity Jacobian (nodal + bubble) at a point of triangle t.
  Mat2 gradient(const TriMesh& mesh, int t, const ElementGeometry& g, const Bary& b) const;
  /// Constant Jacobian of the nodal (P1) part on triangle t.
  Mat2 nodal_gradient(const TriMesh& mesh, int t, const ElementGeometry& g) const;
  double pressure(const TriMesh& mesh, int t, const Bary& b) const;
};

/// Static-condensation data of one element: bubble stiffness
/// a(b e_c, b e_c) (same for both components) and coupling
/// b(b e_c, lambda_j) for c = x, y and local pressure node j.
struct ElementCondensation {
  double stiffness = 0.0;
  Eigen::Matrix<double, 2, 3> coupling = Eigen::Matrix<double, 2, 3>::Zero();
};

/// Condensed velocity-pressure system. Unknown layout:
///   [u_x (n_v) | u_y (n_v) | p (n_v) | mean-pressure multiplier]
/// The matrix is stored before Dirichlet elimination; the velocity-velocity
/// block is a(.,.), the pressure-velocity block is b(.,.) and its transpose,
/// and the pressure-pressure block holds the condensed bubble contribution.
struct SaddleSystem {
  int n_nodes = 0;
  double alpha = 0.0;
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
  /// Constrained dofs (all boundary velocity components). Values are
  /// supplied per solve; stored as 0 here.
  std::vector<std::pair<int, double>> dirichlet;
  std::vector<ElementCondensation> condensation;
  std::vector<Vec2> bubble_load;

  int ux(int i) const { return i; }
  int uy(int i) const { return n_nodes + i; }
  int p(int i) const { return 2 * n_nodes + i; }
  int multiplier() const { return 3 * n_nodes; }
  int size() const { return 3 * n_nodes + 1; }

  Eigen::SparseMatrix<double> velocity_block() const;
  /// Rows: pressure nodes; columns: velocity dofs.
  Eigen::SparseMatrix<double> coupling_block() const;
};

SaddleSystem assemble_stokes(const TriMesh& mesh, double alpha);

/// Right-hand side density evaluated at quadrature points of triangle t.
using BodyLoad = std::function<Vec2(int t, const Bary& b, const Vec2& x)>;

/// Adds (load, phi) for nodal and bubble test functions; the bubble part is
/// condensed into the pressure rows and kept for reconstruction.
void add_body_load(const TriMesh& mesh, SaddleSystem& system, const BodyLoad& load);

/// Factorized system for one (mesh, alpha) with every boundary velocity dof
/// constrained. State and adjoint solves share one factorization.
class StokesSolver {
 public:
  StokesSolver(const TriMesh& mesh, double alpha);

  const TriMesh& mesh() const { return mesh_; }
  double alpha() const { return system_.alpha; }
  const SaddleSystem& system() const { return system_; }

  /// boundary_values[i] is used for boundary nodes only; pass an empty
  /// vector for homogeneous data. Throws SolverBreakdown when the relative
  /// residual is not below 1e-9.
  FlowField solve(const BodyLoad& load, const std::vector<Vec2>& boundary_values) const;

 private:
  TriMesh mesh_;
  SaddleSystem system_;
  Eigen::SparseMatrix<double> constrained_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<int> boundary_nodes_;
};

inline constexpr double kSolverTolerance = 1e-9;

/// Throws CompatibilityViolated unless |int_Gamma g.n ds| <=
/// 1e-8 * perimeter * max|g|.
void check_compatibility(const TriMesh& mesh, const AnalyticField& g);

/// -alpha Lap y + grad p = f, div y = 0, y = g on the boundary.
FlowField solve_state(const StokesSolver& solver, const AnalyticField& f, const AnalyticField& g);
FlowField solve_state(const TriMesh& mesh, double alpha, const AnalyticField& f, const AnalyticField& g);

/// -alpha Lap v + grad q = y - y_d, div v = 0, v = 0 on the boundary.
FlowField solve_adjoint(const StokesSolver& solver, const FlowField& y, const AnalyticField& y_d);
FlowField solve_adjoint(const TriMesh& mesh, double alpha, const FlowField& y, const AnalyticField& y_d);

/// 1/2 * int |y - y_d|^2 with the degree-4 rule.
double compute_cost(const TriMesh& mesh, const FlowField& y, const AnalyticField& y_d);

/// Discrete boundary flux of a solved field: for every boundary node i,
///   R_i = a(u, phi_i) + b(phi_i, p) - (load, phi_i),
/// the variational counterpart of int (alpha Du n - p n) phi_i ds.
/// Interior entries are zero.
std::vector<Vec2> boundary_reactions(const TriMesh& mesh, double alpha, const FlowField& u,
                                     const BodyLoad& load);

struct ErrorNorms {
  double velocity_l2 = 0.0;
  double velocity_h1 = 0.0;  // seminorm of the full (nodal + bubble) gradient error
  double pressure_l2 = 0.0;
};

ErrorNorms flow_errors(const TriMesh& mesh, const FlowField& y, const AnalyticField& exact_velocity,
                       const std::function<double(const Vec2&)>& exact_pressure);

}  // namespace shapeopt

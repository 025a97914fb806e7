#pragma once

#include <string>
#include <vector>

#include "shapeopt/fields.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/stokes.hpp"

namespace shapeopt {

/// Shape-gradient density on the free boundary, one entry per inner-loop
/// node (in loop order). dJ(V) ~ sum_i w_i s_i (V_i . n_i).
struct BoundaryDensity {
  std::vector<int> nodes;
  std::vector<double> w;
  std::vector<double> s;       // half the length of the two adjacent inner edges
  std::vector<Vec2> normal;    // unit outward normal of the domain

  double pair(const PerturbationField& v) const;
};

/// Unit outward normals at inner-loop nodes: normalized sum of the two
/// adjacent edge normals. Loop order.
std::vector<Vec2> inner_vertex_normals(const TriMesh& mesh);

/// w = 1/2 |y - y_d|^2 + alpha D(y - g) : Dv at each inner node.
///
/// Since y - g and v vanish on the boundary, D(y - g) = d_n(y - g) n^T and
/// Dv = d_n v n^T with d_n v tangential, so only tangential wall shears
/// enter. They are taken from the lumped discrete boundary reactions
/// t = R_i / s_i (see boundary_reactions), which converge one order faster
/// than the P1 gradients of the wall triangles:
///   alpha D(y - g) : Dv = (t_v . tau) (t_y . tau / alpha - (Dg n) . tau).
BoundaryDensity boundary_gradient_density(const TriMesh& mesh, double alpha, const FlowField& y,
                                          const FlowField& v, const AnalyticField& f,
                                          const AnalyticField& g, const AnalyticField& y_d);

/// Volume form of dJ(Omega; V) for the state (y, p) and adjoint (v, q),
/// with V interpolated as a P1 field. This is the exact derivative of the
/// discrete cost under node transport x -> x + tV, so it is linear in V.
/// Moving Dirichlet data enters through the discrete adjoint reaction at
/// boundary nodes, which is the variational form of the boundary traction
/// (alpha Dv n - q n).
double distributed_shape_derivative(const TriMesh& mesh, double alpha, const FlowField& y,
                                    const FlowField& v, const PerturbationField& velocity,
                                    const AnalyticField& f, const AnalyticField& g,
                                    const AnalyticField& y_d);

/// Cost on the mesh transported by x -> x + tV (solves the state there).
double transported_cost(const TriMesh& mesh, double alpha, const PerturbationField& velocity, double t,
                        const AnalyticField& f, const AnalyticField& g, const AnalyticField& y_d);

/// Central difference [J(Omega_{+t}) - J(Omega_{-t})] / (2t).
double fd_shape_derivative(const TriMesh& mesh, double alpha, const PerturbationField& velocity,
                           const AnalyticField& f, const AnalyticField& g, const AnalyticField& y_d,
                           double t);

/// CSV columns node_id,x,y,w,s,nx,ny (1-based node ids).
void write_density_csv(const std::string& path, const TriMesh& mesh, const BoundaryDensity& density);

}  // namespace shapeopt

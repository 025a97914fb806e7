#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "shapeopt/types.hpp"

namespace shapeopt {

enum class NodeMarker : int { Interior = 0, OuterFixed = 1, InnerFree = 2 };
enum class EdgeMarker : int { OuterFixed = 1, InnerFree = 2 };

using Triangle = std::array<int, 3>;

struct BoundaryEdge {
  int v1;
  int v2;
  EdgeMarker marker;

  friend bool operator==(const BoundaryEdge&, const BoundaryEdge&) = default;
};

/// Affine data of one triangle: vertex coordinates, area and the (constant)
/// gradients of the barycentric coordinates.
struct ElementGeometry {
  std::array<Vec2, 3> x;
  double area = 0.0;
  std::array<Vec2, 3> grad_lambda;

  Vec2 map(const Bary& b) const { return b[0] * x[0] + b[1] * x[1] + b[2] * x[2]; }
};

/// Conforming triangulation of an annular domain: a fixed outer loop and a
/// free inner loop. Immutable; node positions may be replaced through
/// with_nodes(), which shares the topology.
///
/// Boundary edges are stored oriented as in their owning (counterclockwise)
/// triangle, so the domain lies to the left and the outward normal is the
/// right-hand normal of v1 -> v2.
class TriMesh {
 public:
  TriMesh(std::vector<Vec2> nodes, std::vector<Triangle> triangles,
          std::vector<BoundaryEdge> boundary_edges, std::vector<NodeMarker> node_markers);

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_triangles() const { return static_cast<int>(topo_->triangles.size()); }

  const std::vector<Vec2>& nodes() const { return nodes_; }
  const Vec2& node(int i) const { return nodes_[i]; }
  const std::vector<Triangle>& triangles() const { return topo_->triangles; }
  const Triangle& triangle(int t) const { return topo_->triangles[t]; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return topo_->boundary_edges; }
  const std::vector<NodeMarker>& node_markers() const { return topo_->node_markers; }
  NodeMarker marker(int i) const { return topo_->node_markers[i]; }

  /// Triangle owning boundary edge e.
  int edge_triangle(int e) const { return topo_->edge_triangle[e]; }

  /// Inner-loop node ids in traversal order (domain on the left).
  const std::vector<int>& inner_loop() const { return topo_->inner_loop; }
  const std::vector<int>& outer_loop() const { return topo_->outer_loop; }
  /// Boundary edge index of the inner edge leaving inner_loop()[k].
  const std::vector<int>& inner_loop_edges() const { return topo_->inner_loop_edges; }

  double signed_area(int t) const;
  ElementGeometry geometry(int t) const;
  double total_area() const;

  /// Same connectivity with new coordinates. Throws ValidationError when a
  /// triangle area is not strictly positive.
  TriMesh with_nodes(std::vector<Vec2> nodes) const;

  friend bool operator==(const TriMesh& a, const TriMesh& b);

 private:
  struct Topology {
    std::vector<Triangle> triangles;
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<NodeMarker> node_markers;
    std::vector<int> edge_triangle;
    std::vector<int> inner_loop;
    std::vector<int> inner_loop_edges;
    std::vector<int> outer_loop;
  };

  TriMesh(std::vector<Vec2> nodes, std::shared_ptr<const Topology> topo);
  void check_areas() const;

  std::vector<Vec2> nodes_;
  std::shared_ptr<const Topology> topo_;
};

/// Closed curve parametrized on [0, 2*pi).
using ParametricCurve = std::function<Vec2(double)>;

ParametricCurve circle_curve(double radius);
ParametricCurve ellipse_curve(double semi_x, double semi_y);

/// Structured polar triangulation between inner_curve and the circle of
/// radius outer_radius: n_theta angular samples, n_r element layers.
TriMesh generate_annulus_mesh(const ParametricCurve& inner_curve, double outer_radius,
                              int n_theta, int n_r);

/// node_i' = node_i - h * d_i. Throws StepTooLarge if any triangle area drops
/// to area_epsilon(mesh) or below.
TriMesh deform_mesh(const TriMesh& mesh, const DisplacementField& d, double h);

/// 1e-12 * bounding-box area / n_t.
double area_epsilon(const TriMesh& mesh);

/// 2 * inradius / circumradius; 1 for an equilateral triangle.
double triangle_quality(const Vec2& p0, const Vec2& p1, const Vec2& p2);

/// min over triangles of triangle_quality.
double mesh_quality(const TriMesh& mesh);

double min_edge_length(const TriMesh& mesh);

/// Length of the closed inner boundary polygon.
double inner_perimeter(const TriMesh& mesh);

double mean_inner_radius(const TriMesh& mesh);

/// sqrt(mean_i (|x_i| - target)^2) over inner-loop nodes.
double inner_radius_rms_error(const TriMesh& mesh, double target_radius);

}  // namespace shapeopt

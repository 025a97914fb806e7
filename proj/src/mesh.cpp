#include "shapeopt/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "shapeopt/errors.hpp"

namespace shapeopt {

namespace {

std::pair<int, int> edge_key(int a, int b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Walks the edges carrying `marker` as one closed loop. Fills the node order
// and the edge index leaving each node.
void trace_loop(const std::vector<BoundaryEdge>& edges, EdgeMarker marker, int n_nodes,
                std::vector<int>& loop, std::vector<int>& loop_edges) {
  std::vector<int> outgoing(n_nodes, -1);
  std::vector<int> in_count(n_nodes, 0);
  int count = 0;
  int start = -1;
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    const auto& be = edges[e];
    if (be.marker != marker) continue;
    ++count;
    if (outgoing[be.v1] != -1) {
      throw ValidationError("boundary node " + std::to_string(be.v1 + 1) +
                            " has two outgoing edges of marker " +
                            std::to_string(static_cast<int>(marker)));
    }
    outgoing[be.v1] = e;
    ++in_count[be.v2];
    if (start == -1 || be.v1 < start) start = be.v1;
  }
  if (count < 3) {
    throw ValidationError("boundary loop with marker " + std::to_string(static_cast<int>(marker)) +
                          " has fewer than 3 edges");
  }
  for (int i = 0; i < n_nodes; ++i) {
    if ((outgoing[i] != -1) != (in_count[i] == 1) || in_count[i] > 1) {
      throw ValidationError("boundary edges of marker " + std::to_string(static_cast<int>(marker)) +
                            " do not form a simple loop at node " + std::to_string(i + 1));
    }
  }
  loop.clear();
  loop_edges.clear();
  int node = start;
  do {
    int e = outgoing[node];
    loop.push_back(node);
    loop_edges.push_back(e);
    node = edges[e].v2;
  } while (node != start && static_cast<int>(loop.size()) <= count);
  if (static_cast<int>(loop.size()) != count) {
    throw ValidationError("boundary edges of marker " + std::to_string(static_cast<int>(marker)) +
                          " form more than one loop");
  }
}

}  // namespace

TriMesh::TriMesh(std::vector<Vec2> nodes, std::vector<Triangle> triangles,
                 std::vector<BoundaryEdge> boundary_edges, std::vector<NodeMarker> node_markers)
    : nodes_(std::move(nodes)) {
  const int nv = static_cast<int>(nodes_.size());
  if (static_cast<int>(node_markers.size()) != nv) {
    throw ValidationError("node marker count does not match node count");
  }
  for (const auto& t : triangles) {
    for (int v : t) {
      if (v < 0 || v >= nv) throw ValidationError("triangle references unknown node");
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      throw ValidationError("triangle with repeated vertex");
    }
  }

  auto topo = std::make_shared<Topology>();

  // Each undirected edge -> owning triangles, with the direction it has there.
  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> owners;
  for (int t = 0; t < static_cast<int>(triangles.size()); ++t) {
    for (int k = 0; k < 3; ++k) {
      int a = triangles[t][k];
      int b = triangles[t][(k + 1) % 3];
      owners[edge_key(a, b)].push_back({t, a});
    }
  }
  std::size_t open_edges = 0;
  for (const auto& [key, list] : owners) {
    if (list.size() > 2) throw ValidationError("edge shared by more than two triangles");
    if (list.size() == 1) ++open_edges;
  }

  topo->edge_triangle.reserve(boundary_edges.size());
  std::map<std::pair<int, int>, int> seen;
  for (auto& be : boundary_edges) {
    if (be.v1 < 0 || be.v1 >= nv || be.v2 < 0 || be.v2 >= nv) {
      throw ValidationError("boundary edge references unknown node");
    }
    if (be.marker != EdgeMarker::OuterFixed && be.marker != EdgeMarker::InnerFree) {
      throw ValidationError("boundary edge marker must be 1 or 2");
    }
    auto key = edge_key(be.v1, be.v2);
    if (seen.count(key)) throw ValidationError("duplicate boundary edge");
    seen[key] = 1;
    auto it = owners.find(key);
    if (it == owners.end() || it->second.size() != 1) {
      std::ostringstream msg;
      msg << "boundary edge (" << be.v1 + 1 << ", " << be.v2 + 1
          << ") does not belong to exactly one triangle";
      throw ValidationError(msg.str());
    }
    const auto [tri, first] = it->second.front();
    if (be.v1 != first) std::swap(be.v1, be.v2);
    topo->edge_triangle.push_back(tri);
  }
  if (open_edges != boundary_edges.size()) {
    throw ValidationError("mesh has unmarked boundary edges");
  }

  trace_loop(boundary_edges, EdgeMarker::InnerFree, nv, topo->inner_loop, topo->inner_loop_edges);
  std::vector<int> outer_edges;
  trace_loop(boundary_edges, EdgeMarker::OuterFixed, nv, topo->outer_loop, outer_edges);

  std::vector<NodeMarker> expected(nv, NodeMarker::Interior);
  for (int v : topo->outer_loop) expected[v] = NodeMarker::OuterFixed;
  for (int v : topo->inner_loop) {
    if (expected[v] != NodeMarker::Interior) {
      throw ValidationError("node " + std::to_string(v + 1) + " lies on both boundary loops");
    }
    expected[v] = NodeMarker::InnerFree;
  }
  for (int i = 0; i < nv; ++i) {
    if (node_markers[i] != expected[i]) {
      throw ValidationError("node " + std::to_string(i + 1) +
                            " marker is inconsistent with the boundary edges");
    }
  }

  topo->triangles = std::move(triangles);
  topo->boundary_edges = std::move(boundary_edges);
  topo->node_markers = std::move(node_markers);
  topo_ = std::move(topo);
  check_areas();
}

TriMesh::TriMesh(std::vector<Vec2> nodes, std::shared_ptr<const Topology> topo)
    : nodes_(std::move(nodes)), topo_(std::move(topo)) {
  if (nodes_.size() != topo_->node_markers.size()) {
    throw ValidationError("node count does not match mesh topology");
  }
  check_areas();
}

void TriMesh::check_areas() const {
  for (int t = 0; t < num_triangles(); ++t) {
    double a = signed_area(t);
    if (!(a > 0.0)) {
      throw ValidationError("triangle " + std::to_string(t + 1) +
                            " has non-positive signed area " + std::to_string(a));
    }
  }
}

double TriMesh::signed_area(int t) const {
  const auto& tri = topo_->triangles[t];
  return 0.5 * cross(nodes_[tri[1]] - nodes_[tri[0]], nodes_[tri[2]] - nodes_[tri[0]]);
}

ElementGeometry TriMesh::geometry(int t) const {
  const auto& tri = topo_->triangles[t];
  ElementGeometry g;
  for (int k = 0; k < 3; ++k) g.x[k] = nodes_[tri[k]];
  g.area = signed_area(t);
  const double inv2a = 1.0 / (2.0 * g.area);
  for (int k = 0; k < 3; ++k) {
    const Vec2& p = g.x[(k + 1) % 3];
    const Vec2& q = g.x[(k + 2) % 3];
    g.grad_lambda[k] = Vec2(p.y() - q.y(), q.x() - p.x()) * inv2a;
  }
  return g;
}

double TriMesh::total_area() const {
  double sum = 0.0;
  for (int t = 0; t < num_triangles(); ++t) sum += signed_area(t);
  return sum;
}

TriMesh TriMesh::with_nodes(std::vector<Vec2> nodes) const { return TriMesh(std::move(nodes), topo_); }

bool operator==(const TriMesh& a, const TriMesh& b) {
  if (a.nodes_ != b.nodes_) return false;
  if (a.topo_ == b.topo_) return true;
  return a.triangles() == b.triangles() && a.boundary_edges() == b.boundary_edges() &&
         a.node_markers() == b.node_markers();
}

ParametricCurve circle_curve(double radius) {
  return [radius](double th) { return Vec2(radius * std::cos(th), radius * std::sin(th)); };
}

ParametricCurve ellipse_curve(double semi_x, double semi_y) {
  return [semi_x, semi_y](double th) { return Vec2(semi_x * std::cos(th), semi_y * std::sin(th)); };
}

TriMesh generate_annulus_mesh(const ParametricCurve& inner_curve, double outer_radius, int n_theta,
                              int n_r) {
  if (n_theta < 8) throw ValidationError("n_theta must be >= 8, got " + std::to_string(n_theta));
  if (n_r < 2) throw ValidationError("n_r must be >= 2, got " + std::to_string(n_r));
  if (!(outer_radius > 0.0)) throw ValidationError("outer_radius must be positive");

  const int rings = n_r + 1;
  auto id = [n_theta](int i, int j) { return j * n_theta + (i % n_theta); };

  std::vector<Vec2> nodes(static_cast<std::size_t>(n_theta) * rings);
  std::vector<NodeMarker> markers(nodes.size(), NodeMarker::Interior);
  for (int i = 0; i < n_theta; ++i) {
    const double th = 2.0 * std::numbers::pi * i / n_theta;
    const Vec2 inner = inner_curve(th);
    const Vec2 outer(outer_radius * std::cos(th), outer_radius * std::sin(th));
    if (!(inner.norm() < outer_radius)) {
      throw ValidationError("inner curve leaves the outer circle at angle " + std::to_string(th));
    }
    for (int j = 0; j < rings; ++j) {
      const double s = static_cast<double>(j) / n_r;
      nodes[id(i, j)] = (j == n_r) ? outer : (j == 0 ? inner : Vec2((1.0 - s) * inner + s * outer));
    }
    markers[id(i, 0)] = NodeMarker::InnerFree;
    markers[id(i, n_r)] = NodeMarker::OuterFixed;
  }

  // Quad (i, j): a = (i, j), b = (i+1, j), c = (i+1, j+1), d = (i, j+1).
  // The diagonal alternates with the parity of i + j.
  std::vector<Triangle> tris;
  tris.reserve(2 * static_cast<std::size_t>(n_theta) * n_r);
  for (int j = 0; j < n_r; ++j) {
    for (int i = 0; i < n_theta; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      if ((i + j) % 2 == 0) {
        tris.push_back({a, c, b});
        tris.push_back({a, d, c});
      } else {
        tris.push_back({a, d, b});
        tris.push_back({b, d, c});
      }
    }
  }

  std::vector<BoundaryEdge> edges;
  edges.reserve(2 * static_cast<std::size_t>(n_theta));
  for (int i = 0; i < n_theta; ++i) edges.push_back({id(i, n_r), id(i + 1, n_r), EdgeMarker::OuterFixed});
  for (int i = 0; i < n_theta; ++i) edges.push_back({id(i + 1, 0), id(i, 0), EdgeMarker::InnerFree});

  try {
    return TriMesh(std::move(nodes), std::move(tris), std::move(edges), std::move(markers));
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("inner curve is not a simple curve inside the outer circle: ") +
                          e.what());
  }
}

double area_epsilon(const TriMesh& mesh) {
  Vec2 lo = mesh.node(0), hi = mesh.node(0);
  for (const auto& p : mesh.nodes()) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec2 ext = hi - lo;
  return 1e-12 * ext.x() * ext.y() / mesh.num_triangles();
}

TriMesh deform_mesh(const TriMesh& mesh, const DisplacementField& d, double h) {
  if (static_cast<int>(d.size()) != mesh.num_nodes()) {
    throw ValidationError("displacement field size does not match node count");
  }
  if (!(h >= 0.0)) throw ValidationError("step h must be nonnegative");
  std::vector<Vec2> moved(mesh.nodes());
  for (std::size_t i = 0; i < moved.size(); ++i) moved[i] -= h * d[i];

  const double eps = area_epsilon(mesh);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    const double a = 0.5 * cross(moved[tri[1]] - moved[tri[0]], moved[tri[2]] - moved[tri[0]]);
    if (!(a > eps)) {
      throw StepTooLarge("step h = " + std::to_string(h) + " collapses triangle " +
                         std::to_string(t + 1) + " (area " + std::to_string(a) + ")");
    }
  }
  return mesh.with_nodes(std::move(moved));
}

double triangle_quality(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
  const double a = (p1 - p2).norm();
  const double b = (p0 - p2).norm();
  const double c = (p0 - p1).norm();
  const double area = 0.5 * cross(p1 - p0, p2 - p0);
  // 2 r / R with r = 2A / (a + b + c), R = abc / (4A)
  return 16.0 * area * area / ((a + b + c) * a * b * c);
}

double mesh_quality(const TriMesh& mesh) {
  double q = 1.0;
  for (const auto& tri : mesh.triangles()) {
    q = std::min(q, triangle_quality(mesh.node(tri[0]), mesh.node(tri[1]), mesh.node(tri[2])));
  }
  return q;
}

double min_edge_length(const TriMesh& mesh) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& tri : mesh.triangles()) {
    for (int k = 0; k < 3; ++k) {
      m = std::min(m, (mesh.node(tri[k]) - mesh.node(tri[(k + 1) % 3])).norm());
    }
  }
  return m;
}

double inner_perimeter(const TriMesh& mesh) {
  const auto& loop = mesh.inner_loop();
  double len = 0.0;
  for (std::size_t k = 0; k < loop.size(); ++k) {
    len += (mesh.node(loop[(k + 1) % loop.size()]) - mesh.node(loop[k])).norm();
  }
  return len;
}

double mean_inner_radius(const TriMesh& mesh) {
  double sum = 0.0;
  for (int v : mesh.inner_loop()) sum += mesh.node(v).norm();
  return sum / static_cast<double>(mesh.inner_loop().size());
}

double inner_radius_rms_error(const TriMesh& mesh, double target_radius) {
  double sum = 0.0;
  for (int v : mesh.inner_loop()) {
    const double e = mesh.node(v).norm() - target_radius;
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(mesh.inner_loop().size()));
}

}  // namespace shapeopt

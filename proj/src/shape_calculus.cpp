#include "shapeopt/shape_calculus.hpp"

#include <fstream>
#include <iomanip>

#include "shapeopt/errors.hpp"
#include "shapeopt/quadrature.hpp"

namespace shapeopt {

namespace {

Vec2 edge_normal(const Vec2& a, const Vec2& b) {
  const Vec2 t = b - a;
  return Vec2(t.y(), -t.x()) / t.norm();
}

double contract(const Mat2& a, const Mat2& b) { return (a.array() * b.array()).sum(); }

}  // namespace

double BoundaryDensity::pair(const PerturbationField& v) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) sum += w[k] * s[k] * v[nodes[k]].dot(normal[k]);
  return sum;
}

std::vector<Vec2> inner_vertex_normals(const TriMesh& mesh) {
  const auto& loop = mesh.inner_loop();
  const std::size_t n = loop.size();
  std::vector<Vec2> normals(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2& prev = mesh.node(loop[(k + n - 1) % n]);
    const Vec2& here = mesh.node(loop[k]);
    const Vec2& next = mesh.node(loop[(k + 1) % n]);
    normals[k] = (edge_normal(prev, here) + edge_normal(here, next)).normalized();
  }
  return normals;
}

BoundaryDensity boundary_gradient_density(const TriMesh& mesh, double alpha, const FlowField& y,
                                          const FlowField& v, const AnalyticField& f,
                                          const AnalyticField& g, const AnalyticField& y_d) {
  const auto& loop = mesh.inner_loop();
  const std::size_t n = loop.size();

  const std::vector<Vec2> ry =
      boundary_reactions(mesh, alpha, y, [&f](int, const Bary&, const Vec2& x) { return f(x); });
  const std::vector<Vec2> rv = boundary_reactions(
      mesh, alpha, v, [&](int t, const Bary& b, const Vec2& x) { return Vec2(y.velocity(mesh, t, b) - y_d(x)); });

  BoundaryDensity out;
  out.nodes = loop;
  out.normal = inner_vertex_normals(mesh);
  out.w.resize(n);
  out.s.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const int node = loop[k];
    const Vec2& x = mesh.node(node);
    const Vec2& prev = mesh.node(loop[(k + n - 1) % n]);
    const Vec2& next = mesh.node(loop[(k + 1) % n]);
    out.s[k] = 0.5 * ((x - prev).norm() + (next - x).norm());

    const Vec2& nrm = out.normal[k];
    const Vec2 tau(-nrm.y(), nrm.x());
    const double shear_y = ry[node].dot(tau) / out.s[k];
    const double shear_v = rv[node].dot(tau) / out.s[k];
    const double dg_nt = (g.jacobian(x) * nrm).dot(tau);
    out.w[k] = 0.5 * (y.velocity_nodal[node] - y_d(x)).squaredNorm() + shear_v * (shear_y / alpha - dg_nt);
  }
  return out;
}

double distributed_shape_derivative(const TriMesh& mesh, double alpha, const FlowField& y,
                                    const FlowField& v, const PerturbationField& velocity,
                                    const AnalyticField& f, const AnalyticField& g,
                                    const AnalyticField& y_d) {
  if (static_cast<int>(velocity.size()) != mesh.num_nodes()) {
    throw Error("perturbation field size does not match node count");
  }
  double total = 0.0;

  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangle(t);
    const ElementGeometry geo = mesh.geometry(t);

    Mat2 dV = Mat2::Zero();
    for (int k = 0; k < 3; ++k) dV += velocity[tri[k]] * geo.grad_lambda[k].transpose();
    const double divV = dV.trace();

    double elem = 0.0;
    for (const auto& qp : kTriangleRule4) {
      const Vec2 x = geo.map(qp.bary);
      const Vec2 vel = qp.bary[0] * velocity[tri[0]] + qp.bary[1] * velocity[tri[1]] +
                       qp.bary[2] * velocity[tri[2]];
      const Vec2 yv = y.velocity(mesh, t, qp.bary);
      const Vec2 vv = v.velocity(mesh, t, qp.bary);
      const Mat2 dy = y.gradient(mesh, t, geo, qp.bary);
      const Mat2 dv = v.gradient(mesh, t, geo, qp.bary);
      const double p = y.pressure(mesh, t, qp.bary);
      const double q = v.pressure(mesh, t, qp.bary);
      const Vec2 e = yv - y_d(x);
      const Vec2 fx = f(x);

      double term = 0.5 * e.squaredNorm() * divV - e.dot(y_d.jacobian(x) * vel);
      term -= alpha * (contract(dy, dv) * divV - contract(dy * dV, dv) - contract(dy, dv * dV));
      term += p * (dv.trace() * divV - (dv * dV).trace());
      term += q * (dy.trace() * divV - (dy * dV).trace());
      term += (f.jacobian(x) * vel).dot(vv) + fx.dot(vv) * divV;
      elem += qp.weight * term;
    }
    total += geo.area * elem;
  }

  // Moving Dirichlet data y_i(t) = g(x_i + tV_i): the Lagrangian changes by
  // dL/dy_i = (y - y_d, phi_i) - a(phi_i, v) - b(phi_i, q) = -R_i(v).
  bool moving_data = false;
  for (int i = 0; i < mesh.num_nodes() && !moving_data; ++i) {
    moving_data = mesh.marker(i) != NodeMarker::Interior && !g.jacobian(mesh.node(i)).isZero(0.0);
  }
  if (moving_data) {
    const std::vector<Vec2> rv = boundary_reactions(
        mesh, alpha, v, [&](int t, const Bary& b, const Vec2& x) { return Vec2(y.velocity(mesh, t, b) - y_d(x)); });
    for (int i = 0; i < mesh.num_nodes(); ++i) {
      if (mesh.marker(i) == NodeMarker::Interior) continue;
      total -= rv[i].dot(g.jacobian(mesh.node(i)) * velocity[i]);
    }
  }
  return total;
}

double transported_cost(const TriMesh& mesh, double alpha, const PerturbationField& velocity, double t,
                        const AnalyticField& f, const AnalyticField& g, const AnalyticField& y_d) {
  PerturbationField neg(velocity.size());
  for (std::size_t i = 0; i < velocity.size(); ++i) neg[i] = -velocity[i];
  const TriMesh moved = t >= 0.0 ? deform_mesh(mesh, neg, t) : deform_mesh(mesh, velocity, -t);
  const FlowField y = solve_state(moved, alpha, f, g);
  return compute_cost(moved, y, y_d);
}

double fd_shape_derivative(const TriMesh& mesh, double alpha, const PerturbationField& velocity,
                           const AnalyticField& f, const AnalyticField& g, const AnalyticField& y_d,
                           double t) {
  if (!(t > 0.0)) throw Error("finite-difference step must be positive");
  const double jp = transported_cost(mesh, alpha, velocity, t, f, g, y_d);
  const double jm = transported_cost(mesh, alpha, velocity, -t, f, g, y_d);
  return (jp - jm) / (2.0 * t);
}

void write_density_csv(const std::string& path, const TriMesh& mesh, const BoundaryDensity& density) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << std::setprecision(17) << "node_id,x,y,w,s,nx,ny\n";
  for (std::size_t k = 0; k < density.nodes.size(); ++k) {
    const Vec2& x = mesh.node(density.nodes[k]);
    out << density.nodes[k] + 1 << ',' << x.x() << ',' << x.y() << ',' << density.w[k] << ','
        << density.s[k] << ',' << density.normal[k].x() << ',' << density.normal[k].y() << '\n';
  }
}

}  // namespace shapeopt

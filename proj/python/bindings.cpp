#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "shapeopt/config.hpp"
#include "shapeopt/driver.hpp"
#include "shapeopt/errors.hpp"
#include "shapeopt/mesh_io.hpp"

namespace py = pybind11;
using namespace shapeopt;

namespace {

py::array_t<double> to_array(const std::vector<Vec2>& v) {
  py::array_t<double> out({static_cast<py::ssize_t>(v.size()), py::ssize_t{2}});
  auto a = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < v.size(); ++i) {
    a(i, 0) = v[i].x();
    a(i, 1) = v[i].y();
  }
  return out;
}

std::vector<Vec2> from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
  if (arr.ndim() != 2 || arr.shape(1) != 2) throw py::value_error("expected an (n, 2) array");
  auto a = arr.unchecked<2>();
  std::vector<Vec2> v(a.shape(0));
  for (py::ssize_t i = 0; i < a.shape(0); ++i) v[i] = Vec2(a(i, 0), a(i, 1));
  return v;
}

py::dict record_dict(const IterationRecord& r) {
  py::dict d;
  d["iter"] = r.k;
  d["cost"] = r.cost;
  d["grad_norm"] = r.grad_norm;
  d["step"] = r.step;
  d["mesh_quality"] = r.mesh_quality;
  d["mean_inner_radius"] = r.mean_inner_radius;
  d["wall_seconds"] = r.wall_seconds;
  return d;
}

OptConfig make_config(const py::dict& values) {
  OptConfig c;
  for (const auto& [k, v] : values) set_config_value(c, py::str(k), py::str(v));
  return c;
}

}  // namespace

PYBIND11_MODULE(shapeopt, m) {
  m.doc() = "2D Stokes shape optimization with MINI elements";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<ParseError>(m, "ParseError", error.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", error.ptr());
  py::register_exception<StepTooLarge>(m, "StepTooLarge", error.ptr());
  py::register_exception<LineSearchFailed>(m, "LineSearchFailed", error.ptr());
  py::register_exception<MeshQualityAbort>(m, "MeshQualityAbort", error.ptr());

  py::class_<TriMesh>(m, "TriMesh")
      .def_property_readonly("num_nodes", &TriMesh::num_nodes)
      .def_property_readonly("num_triangles", &TriMesh::num_triangles)
      .def_property_readonly("nodes", [](const TriMesh& t) { return to_array(t.nodes()); })
      .def_property_readonly("triangles", &TriMesh::triangles)
      .def_property_readonly("inner_loop", &TriMesh::inner_loop)
      .def_property_readonly("outer_loop", &TriMesh::outer_loop)
      .def_property_readonly("markers",
                             [](const TriMesh& t) {
                               std::vector<int> out;
                               for (NodeMarker k : t.node_markers()) out.push_back(static_cast<int>(k));
                               return out;
                             })
      .def("total_area", &TriMesh::total_area)
      .def("with_nodes", [](const TriMesh& t, const py::array_t<double>& x) { return t.with_nodes(from_array(x)); })
      .def("__eq__", [](const TriMesh& a, const TriMesh& b) { return a == b; });

  m.def(
      "circle_annulus",
      [](double r, int n_theta, int n_r, double outer) {
        return generate_annulus_mesh(circle_curve(r), outer, n_theta, n_r);
      },
      py::arg("radius"), py::arg("n_theta"), py::arg("n_r"), py::arg("outer_radius") = 1.0);
  m.def(
      "ellipse_annulus",
      [](double a, double b, int n_theta, int n_r, double outer) {
        return generate_annulus_mesh(ellipse_curve(a, b), outer, n_theta, n_r);
      },
      py::arg("semi_x"), py::arg("semi_y"), py::arg("n_theta"), py::arg("n_r"), py::arg("outer_radius") = 1.0);
  m.def(
      "deform_mesh",
      [](const TriMesh& mesh, const py::array_t<double>& d, double h) { return deform_mesh(mesh, from_array(d), h); },
      py::arg("mesh"), py::arg("d"), py::arg("h"));
  m.def("mesh_quality", &mesh_quality);
  m.def("min_edge_length", &min_edge_length);
  m.def("mean_inner_radius", &mean_inner_radius);
  m.def("inner_radius_rms_error", &inner_radius_rms_error, py::arg("mesh"), py::arg("target_radius") = 0.2);
  m.def("load_mesh", &load_mesh);
  m.def("save_mesh", &save_mesh, py::arg("mesh"), py::arg("path"));

  py::class_<ShapeProblem>(m, "ShapeProblem")
      .def_static("swirl", &ShapeProblem::swirl, py::arg("alpha"))
      .def_readonly("alpha", &ShapeProblem::alpha);

  py::class_<FlowField>(m, "FlowField")
      .def_property_readonly("velocity", [](const FlowField& f) { return to_array(f.velocity_nodal); })
      .def_property_readonly("bubble", [](const FlowField& f) { return to_array(f.velocity_bubble); })
      .def_property_readonly("pressure", [](const FlowField& f) { return f.pressure_nodal; });

  m.def(
      "solve_state", [](const TriMesh& mesh, const ShapeProblem& p) { return solve_state(mesh, p.alpha, p.f, p.g); },
      py::arg("mesh"), py::arg("problem"));
  m.def(
      "solve_adjoint",
      [](const TriMesh& mesh, const ShapeProblem& p, const FlowField& y) {
        return solve_adjoint(mesh, p.alpha, y, p.y_d);
      },
      py::arg("mesh"), py::arg("problem"), py::arg("y"));
  m.def(
      "cost", [](const TriMesh& mesh, const ShapeProblem& p, const FlowField& y) { return compute_cost(mesh, y, p.y_d); },
      py::arg("mesh"), py::arg("problem"), py::arg("y"));

  py::class_<BoundaryDensity>(m, "BoundaryDensity")
      .def_readonly("nodes", &BoundaryDensity::nodes)
      .def_readonly("w", &BoundaryDensity::w)
      .def_readonly("s", &BoundaryDensity::s)
      .def_property_readonly("normal", [](const BoundaryDensity& d) { return to_array(d.normal); })
      .def("pair", [](const BoundaryDensity& d, const py::array_t<double>& v) { return d.pair(from_array(v)); });

  m.def(
      "boundary_density",
      [](const TriMesh& mesh, const ShapeProblem& p) {
        const FlowField y = solve_state(mesh, p.alpha, p.f, p.g);
        const FlowField v = solve_adjoint(mesh, p.alpha, y, p.y_d);
        return boundary_gradient_density(mesh, p.alpha, y, v, p.f, p.g, p.y_d);
      },
      py::arg("mesh"), py::arg("problem"));
  m.def(
      "perturbation_field",
      [](const TriMesh& mesh, const std::string& name) { return to_array(perturbation_field(mesh, name)); },
      py::arg("mesh"), py::arg("name"));
  m.def(
      "fd_shape_derivative",
      [](const TriMesh& mesh, const ShapeProblem& p, const py::array_t<double>& V, double t) {
        return fd_shape_derivative(mesh, p.alpha, from_array(V), p.f, p.g, p.y_d, t);
      },
      py::arg("mesh"), py::arg("problem"), py::arg("V"), py::arg("t") = 1e-3);
  m.def(
      "compare_gradients",
      [](const TriMesh& mesh, const ShapeProblem& p, const std::vector<std::string>& fields, double t) {
        py::list rows;
        for (const auto& r : compare_gradients(mesh, p, fields, t)) {
          py::dict d;
          d["field"] = r.field;
          d["boundary"] = r.boundary;
          d["distributed"] = r.distributed;
          d["fd"] = r.fd;
          d["max_relative_gap"] = r.max_relative_gap();
          rows.append(d);
        }
        return rows;
      },
      py::arg("mesh"), py::arg("problem"), py::arg("fields") = std::vector<std::string>{"normal", "wobble", "skewed"},
      py::arg("t") = 1e-3);

  m.def(
      "optimize",
      [](const TriMesh& mesh, const ShapeProblem& p, int max_iters, double step_cap, const std::string& descent) {
        OptimizerSettings s;
        s.max_iters = max_iters;
        s.step_cap = step_cap;
        if (descent == "raw_normal") {
          s.descent = DescentKind::RawNormal;
        } else if (descent != "h1") {
          throw py::value_error("descent must be 'h1' or 'raw_normal'");
        }
        OptState state = [&] {
          py::gil_scoped_release release;
          return optimize(mesh, p, s);
        }();
        py::list history;
        for (const auto& r : state.history) history.append(record_dict(r));
        py::dict out;
        out["mesh"] = state.mesh;
        out["history"] = history;
        out["termination"] = to_string(state.termination);
        return out;
      },
      py::arg("mesh"), py::arg("problem"), py::arg("max_iters") = 30, py::arg("step_cap") = 1.0,
      py::arg("descent") = "h1");

  m.def(
      "run_experiment",
      [](const py::dict& values) {
        const OptConfig c = make_config(values);
        const RunResult r = [&] {
          py::gil_scoped_release release;
          return run_experiment(c);
        }();
        py::dict out;
        out["exit_code"] = r.exit_code;
        out["termination"] = r.termination;
        out["iterations"] = r.iterations;
        out["final_cost"] = r.final_cost;
        out["mean_inner_radius"] = r.mean_inner_radius;
        out["radius_rms_error"] = r.radius_rms_error;
        return out;
      },
      py::arg("config"), "Run one optimization; config keys are those of the key = value file format.");
  m.def(
      "load_config",
      [](const std::string& path) {
        const OptConfig c = load_config(path);
        py::dict d;
        d["case"] = c.case_name;
        d["alpha"] = c.alpha;
        d["n_theta"] = c.n_theta;
        d["n_r"] = c.n_r;
        d["max_iters"] = c.max_iters;
        d["grad_tol"] = c.grad_tol;
        d["step_cap"] = c.step_cap;
        d["descent"] = to_string(c.descent);
        d["output_dir"] = c.output_dir;
        return d;
      },
      py::arg("path"));
}

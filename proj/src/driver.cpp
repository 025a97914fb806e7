#include "shapeopt/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "shapeopt/errors.hpp"
#include "shapeopt/mesh_io.hpp"

namespace fs = std::filesystem;

namespace shapeopt {

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << std::setprecision(17);
  return out;
}

std::string numbered(const std::string& dir, const char* stem, int k, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%04d.%s", stem, k, ext);
  return (fs::path(dir) / buf).string();
}

}  // namespace

void write_vtk(const std::string& path, const TriMesh& mesh, const FlowField& y) {
  std::ofstream out = open_output(path);
  out << "# vtk DataFile Version 2.0\n"
      << "shapeopt flow field\n"
      << "ASCII\n"
      << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_nodes() << " double\n";
  for (const Vec2& x : mesh.nodes()) out << x.x() << ' ' << x.y() << " 0\n";
  out << "CELLS " << mesh.num_triangles() << ' ' << 4 * mesh.num_triangles() << '\n';
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << mesh.num_triangles() << '\n';
  for (int t = 0; t < mesh.num_triangles(); ++t) out << "5\n";
  out << "POINT_DATA " << mesh.num_nodes() << '\n';
  out << "VECTORS velocity double\n";
  for (const Vec2& u : y.velocity_nodal) out << u.x() << ' ' << u.y() << " 0\n";
  out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
  for (double p : y.pressure_nodal) out << p << '\n';
  if (!out) throw Error("write failed for '" + path + "'");
}

void write_history_csv(const std::string& path, const std::vector<IterationRecord>& history) {
  std::ofstream out = open_output(path);
  out << "iter,cost,grad_norm,step,mesh_quality,mean_inner_radius\n";
  for (const auto& r : history) {
    out << r.k << ',' << r.cost << ',' << r.grad_norm << ',' << r.step << ',' << r.mesh_quality << ','
        << r.mean_inner_radius << '\n';
  }
  if (!out) throw Error("write failed for '" + path + "'");
}

void write_timing_csv(const std::string& path, const std::vector<IterationRecord>& history) {
  std::ofstream out = open_output(path);
  out << "iter,wall_seconds\n";
  for (const auto& r : history) out << r.k << ',' << r.wall_seconds << '\n';
  if (!out) throw Error("write failed for '" + path + "'");
}

void write_boundary_csv(const std::string& path, const TriMesh& mesh) {
  std::ofstream out = open_output(path);
  out << "node_id,x,y\n";
  for (int i : mesh.inner_loop()) out << i + 1 << ',' << mesh.node(i).x() << ',' << mesh.node(i).y() << '\n';
  if (!out) throw Error("write failed for '" + path + "'");
}

PerturbationField perturbation_field(const TriMesh& mesh, const std::string& name) {
  const auto& loop = mesh.inner_loop();
  const std::vector<Vec2> normals = inner_vertex_normals(mesh);
  std::vector<Vec2> inner(loop.size());
  for (std::size_t k = 0; k < loop.size(); ++k) {
    const Vec2& n = normals[k];
    const Vec2 tau(-n.y(), n.x());
    const Vec2& x = mesh.node(loop[k]);
    const double theta = std::atan2(x.y(), x.x());
    if (name == "normal") {
      inner[k] = n;
    } else if (name == "wobble") {
      inner[k] = (1.0 + 0.5 * std::cos(theta)) * n;
    } else if (name == "skewed") {
      inner[k] = (1.0 + 0.3 * std::sin(2.0 * theta)) * n + 0.4 * tau;
    } else if (name == "tangent") {
      inner[k] = tau;
    } else {
      throw Error("unknown perturbation field '" + name + "'");
    }
  }
  return harmonic_extension(mesh, inner);
}

double GradientComparison::max_relative_gap() const {
  auto gap = [](double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-14}); };
  return std::max({gap(boundary, distributed), gap(boundary, fd), gap(distributed, fd)});
}

std::vector<GradientComparison> compare_gradients(const TriMesh& mesh, const ShapeProblem& problem,
                                                  const std::vector<std::string>& fields, double t) {
  const StokesSolver solver(mesh, problem.alpha);
  const FlowField y = solve_state(solver, problem.f, problem.g);
  const FlowField v = solve_adjoint(solver, y, problem.y_d);
  const BoundaryDensity density =
      boundary_gradient_density(mesh, problem.alpha, y, v, problem.f, problem.g, problem.y_d);

  std::vector<GradientComparison> rows;
  for (const auto& name : fields) {
    const PerturbationField V = perturbation_field(mesh, name);
    GradientComparison row;
    row.field = name;
    row.boundary = density.pair(V);
    row.distributed = distributed_shape_derivative(mesh, problem.alpha, y, v, V, problem.f, problem.g, problem.y_d);
    row.fd = fd_shape_derivative(mesh, problem.alpha, V, problem.f, problem.g, problem.y_d, t);
    rows.push_back(row);
  }
  return rows;
}

void write_gradient_csv(const std::string& path, const std::vector<GradientComparison>& rows) {
  std::ofstream out = open_output(path);
  out << "field,boundary,distributed,fd,max_relative_gap\n";
  for (const auto& r : rows) {
    out << r.field << ',' << r.boundary << ',' << r.distributed << ',' << r.fd << ',' << r.max_relative_gap()
        << '\n';
  }
  if (!out) throw Error("write failed for '" + path + "'");
}

RunResult run_experiment(const OptConfig& config, std::ostream* log) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  validate_config(config);

  const fs::path dir(config.output_dir);
  std::error_code ec;
  fs::create_directory(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error("cannot create output directory '" + config.output_dir + "'" +
                (ec ? ": " + ec.message() : std::string()));
  }
  const std::string out_dir = dir.string();
  auto file = [&](const char* name) { return (dir / name).string(); };

  const TriMesh mesh0 = initial_mesh(config);
  const ShapeProblem problem = config.problem();

  if (config.fd_check) {
    const auto rows = compare_gradients(mesh0, problem, {"normal", "wobble", "skewed"});
    write_gradient_csv(file("gradient_check.csv"), rows);
    if (log) {
      for (const auto& r : rows) {
        *log << "gradient " << r.field << ": boundary " << r.boundary << ", distributed " << r.distributed
             << ", fd " << r.fd << ", max gap " << r.max_relative_gap() << '\n';
      }
    }
  }

  auto observer = [&](const OptState& s) {
    save_mesh(s.mesh, numbered(out_dir, "mesh", s.k, "msh"));
    if (config.emit_vtk) write_vtk(numbered(out_dir, "fields", s.k, "vtk"), s.mesh, s.y);
    if (log) {
      const auto& r = s.history.back();
      *log << "iter " << r.k << " cost " << r.cost << " grad " << r.grad_norm << " step " << r.step
           << " radius " << r.mean_inner_radius << '\n';
    }
  };

  RunResult result;
  std::vector<IterationRecord> history;
  std::optional<TriMesh> final_mesh;
  try {
    OptState state = optimize(mesh0, problem, config.settings(), observer);
    history = state.history;
    result.termination = to_string(state.termination);
    result.exit_code = state.termination == Termination::LineSearchFailed ? 2 : 0;
    result.final_cost = state.cost;
    final_mesh.emplace(state.mesh);
  } catch (const MeshQualityAbort& e) {
    save_mesh(e.mesh(), file("failed_mesh.msh"));
    history = e.history();
    result.termination = "quality_abort";
    result.exit_code = 2;
    result.final_cost = history.empty() ? 0.0 : history.back().cost;
    final_mesh.emplace(e.mesh());
    if (log) *log << "aborted: " << e.what() << " (mesh dumped to " << file("failed_mesh.msh") << ")\n";
  }

  result.iterations = history.empty() ? 0 : history.back().k;
  result.mean_inner_radius = mean_inner_radius(*final_mesh);
  result.radius_rms_error = inner_radius_rms_error(*final_mesh, 0.2);
  result.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();

  write_history_csv(file("history.csv"), history);
  write_timing_csv(file("timing.csv"), history);
  write_boundary_csv(file("final_boundary.csv"), *final_mesh);

  std::ofstream summary = open_output(file("summary.txt"));
  summary << "final_cost = " << result.final_cost << '\n'
          << "final_mean_inner_radius = " << result.mean_inner_radius << '\n'
          << "radius_rms_error = " << result.radius_rms_error << '\n'
          << "iterations = " << result.iterations << '\n'
          << "wall_seconds = " << result.wall_seconds << '\n'
          << "termination = " << result.termination << '\n';
  if (!summary) throw Error("write failed for '" + file("summary.txt") + "'");
  return result;
}

std::vector<RunResult> run_sweep(const OptConfig& config, const std::vector<double>& alphas, std::ostream* log) {
  const fs::path root(config.output_dir);
  std::error_code ec;
  fs::create_directory(root, ec);
  if (ec || !fs::is_directory(root)) throw Error("cannot create output directory '" + config.output_dir + "'");

  std::vector<RunResult> results(alphas.size());
  std::vector<std::exception_ptr> errors(alphas.size());
  std::vector<std::thread> workers;
  std::mutex log_mutex;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    workers.emplace_back([&, i] {
      try {
        OptConfig c = config;
        c.alpha = alphas[i];
        std::ostringstream name;
        name << "alpha_" << alphas[i];
        c.output_dir = (root / name.str()).string();
        results[i] = run_experiment(c, nullptr);
        if (log) {
          std::lock_guard<std::mutex> lock(log_mutex);
          *log << "alpha " << alphas[i] << ": " << results[i].termination << ", rms "
               << results[i].radius_rms_error << '\n';
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace shapeopt

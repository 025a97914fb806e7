#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shapeopt/config.hpp"
#include "shapeopt/driver.hpp"
#include "shapeopt/errors.hpp"
#include "shapeopt/mesh_io.hpp"

using namespace shapeopt;

namespace {

// Options shared by every subcommand that builds an OptConfig. Values are
// kept as text so they go through the same validation as config files.
struct Overrides {
  std::string config_path;
  std::map<std::string, std::string> values;
  bool fd_check = false;
  bool no_vtk = false;

  void add(CLI::App* app, bool with_run_flags) {
    app->add_option("--config", config_path, "key = value configuration file");
    add_value(app, "--case", "case", "circle_04, ellipse or file:<path>");
    add_value(app, "--alpha", "alpha", "viscosity");
    add_value(app, "--n-theta", "n_theta", "angular mesh divisions");
    add_value(app, "--n-r", "n_r", "radial mesh divisions");
    if (!with_run_flags) return;
    add_value(app, "--max-iters", "max_iters", "iteration budget");
    add_value(app, "--grad-tol", "grad_tol", "relative gradient tolerance");
    add_value(app, "--step-cap", "step_cap", "first-trial displacement in min-edge units");
    add_value(app, "--descent", "descent", "h1 or raw_normal");
    add_value(app, "--output-dir", "output_dir", "output directory");
    app->add_flag("--fd-check", fd_check, "three-way gradient check before iterating");
    app->add_flag("--no-vtk", no_vtk, "skip per-iterate VTK output");
  }

  void add_value(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(flag, [this, key](const std::string& v) { values[key] = v; }, help);
  }

  OptConfig resolve() const {
    OptConfig config = config_path.empty() ? OptConfig{} : load_config(config_path);
    for (const auto& [key, value] : values) set_config_value(config, key, value);
    if (fd_check) config.fd_check = true;
    if (no_vtk) config.emit_vtk = false;
    return config;
  }
};

std::vector<double> parse_sweep(const std::string& arg) {
  const std::string prefix = "alpha=";
  if (arg.rfind(prefix, 0) != 0) throw ConfigError("--sweep expects alpha=LIST, got '" + arg + "'");
  std::vector<double> alphas;
  std::stringstream list(arg.substr(prefix.size()));
  std::string item;
  while (std::getline(list, item, ',')) {
    OptConfig probe;
    set_config_value(probe, "alpha", item);
    alphas.push_back(probe.alpha);
  }
  if (alphas.empty()) throw ConfigError("--sweep: empty alpha list");
  return alphas;
}

int run_command(const Overrides& o, const std::string& sweep) {
  const OptConfig config = o.resolve();
  if (!sweep.empty()) {
    const auto results = run_sweep(config, parse_sweep(sweep), &std::cout);
    int code = 0;
    for (const auto& r : results) code = std::max(code, r.exit_code);
    return code;
  }
  const RunResult r = run_experiment(config, &std::cout);
  std::cout << "termination " << r.termination << ", iterations " << r.iterations << ", cost " << r.final_cost
            << ", mean radius " << r.mean_inner_radius << ", rms error " << r.radius_rms_error << '\n';
  return r.exit_code;
}

int validate_command(const Overrides& o) {
  const OptConfig config = o.resolve();
  validate_config(config);
  const auto rows = compare_gradients(initial_mesh(config), config.problem(), {"normal", "wobble", "skewed"});
  bool ok = true;
  for (const auto& r : rows) {
    const double gap = r.max_relative_gap();
    ok = ok && gap <= kGradientTolerance;
    std::cout << r.field << ": boundary " << r.boundary << "  distributed " << r.distributed << "  fd " << r.fd
              << "  max gap " << gap << (gap <= kGradientTolerance ? "  ok" : "  MISMATCH") << '\n';
  }
  return ok ? 0 : 1;
}

int mesh_command(const Overrides& o, const std::string& out) {
  const OptConfig config = o.resolve();
  validate_config(config);
  save_mesh(initial_mesh(config), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stokes shape optimization on annular domains"};
  app.require_subcommand(1);

  Overrides run_opts;
  std::string sweep;
  auto* run = app.add_subcommand("run", "optimize the inner boundary");
  run_opts.add(run, true);
  run->add_option("--sweep", sweep, "alpha=LIST, one concurrent run per value");

  Overrides validate_opts;
  auto* validate = app.add_subcommand("validate", "compare boundary, distributed and FD shape derivatives");
  validate_opts.add(validate, false);

  Overrides mesh_opts;
  std::string mesh_out;
  auto* mesh = app.add_subcommand("mesh", "write the initial mesh of a case");
  mesh_opts.add(mesh, false);
  mesh->add_option("--out", mesh_out, "output mesh path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_command(run_opts, sweep);
    if (*validate) return validate_command(validate_opts);
    if (*mesh) return mesh_command(mesh_opts, mesh_out);
  } catch (const std::exception& e) {
    std::cerr << "shapeopt: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

#pragma once

#include <istream>
#include <string>

#include "shapeopt/mesh.hpp"
#include "shapeopt/optimizer.hpp"

namespace shapeopt {

struct OptConfig {
  std::string case_name = "circle_04";  // circle_04, ellipse or file:<path>
  double alpha = 0.01;
  int n_theta = 64;
  int n_r = 16;
  int max_iters = 30;
  double grad_tol = 1e-6;
  double grad_ref = 0.0;
  double step_cap = 1.0;
  double armijo_c = 1e-4;
  DescentKind descent = DescentKind::H1;
  std::string output_dir = "output";
  bool emit_vtk = true;
  bool fd_check = false;

  OptimizerSettings settings() const;
  ShapeProblem problem() const;
};

/// Sets one option from its textual value. Throws ConfigError naming the
/// key (unknown key) or the value (malformed or out of range).
void set_config_value(OptConfig& config, const std::string& key, const std::string& value);

/// Flat `key = value` lines; `#` starts a comment. Later lines win.
void read_config(std::istream& in, OptConfig& config);
OptConfig load_config(const std::string& path);

/// Range checks that involve more than one field or the filesystem.
void validate_config(const OptConfig& config);

/// Initial mesh of the configured case.
TriMesh initial_mesh(const OptConfig& config);

std::string to_string(DescentKind kind);

}  // namespace shapeopt

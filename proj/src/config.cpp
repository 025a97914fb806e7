#include "shapeopt/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "shapeopt/errors.hpp"
#include "shapeopt/mesh_io.hpp"

namespace shapeopt {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": '" + value + "' is not a number");
  return out;
}

int parse_int(const std::string& key, const std::string& value) {
  int out = 0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(key + ": '" + value + "' is not an integer");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError(key + ": '" + value + "' is not a boolean");
}

void require(bool ok, const std::string& key, const std::string& value, const std::string& bound) {
  if (!ok) throw ConfigError(key + " = " + value + " out of range (must be " + bound + ")");
}

}  // namespace

OptimizerSettings OptConfig::settings() const {
  OptimizerSettings s;
  s.max_iters = max_iters;
  s.grad_tol = grad_tol;
  s.grad_ref = grad_ref;
  s.step_cap = step_cap;
  s.armijo_c = armijo_c;
  s.descent = descent;
  return s;
}

ShapeProblem OptConfig::problem() const { return ShapeProblem::swirl(alpha); }

void set_config_value(OptConfig& c, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "case") {
    const bool ok = value == "circle_04" || value == "ellipse" || (value.rfind("file:", 0) == 0 && value.size() > 5);
    if (!ok) throw ConfigError("case: '" + value + "' is not one of circle_04, ellipse, file:<path>");
    c.case_name = value;
  } else if (key == "alpha") {
    c.alpha = parse_double(key, value);
    require(c.alpha > 0.0, key, value, "> 0");
  } else if (key == "n_theta") {
    c.n_theta = parse_int(key, value);
    require(c.n_theta >= 8, key, value, ">= 8");
  } else if (key == "n_r") {
    c.n_r = parse_int(key, value);
    require(c.n_r >= 2, key, value, ">= 2");
  } else if (key == "max_iters") {
    c.max_iters = parse_int(key, value);
    require(c.max_iters >= 0, key, value, ">= 0");
  } else if (key == "grad_tol") {
    c.grad_tol = parse_double(key, value);
    require(c.grad_tol >= 0.0, key, value, ">= 0");
  } else if (key == "grad_ref") {
    c.grad_ref = parse_double(key, value);
    require(c.grad_ref >= 0.0, key, value, ">= 0");
  } else if (key == "step_cap") {
    c.step_cap = parse_double(key, value);
    require(c.step_cap > 0.0, key, value, "> 0");
  } else if (key == "armijo_c") {
    c.armijo_c = parse_double(key, value);
    require(c.armijo_c > 0.0 && c.armijo_c < 1.0, key, value, "in (0, 1)");
  } else if (key == "descent") {
    if (value == "h1") {
      c.descent = DescentKind::H1;
    } else if (value == "raw_normal") {
      c.descent = DescentKind::RawNormal;
    } else {
      throw ConfigError("descent: '" + value + "' is not one of h1, raw_normal");
    }
  } else if (key == "output_dir") {
    if (value.empty()) throw ConfigError("output_dir: empty path");
    c.output_dir = value;
  } else if (key == "emit_vtk") {
    c.emit_vtk = parse_bool(key, value);
  } else if (key == "fd_check") {
    c.fd_check = parse_bool(key, value);
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

void read_config(std::istream& in, OptConfig& config) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    try {
      set_config_value(config, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(number) + ": " + e.what());
    }
  }
}

OptConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  OptConfig config;
  read_config(in, config);
  return config;
}

void validate_config(const OptConfig& c) {
  std::ostringstream s;
  s << c.alpha;
  require(c.alpha > 0.0, "alpha", s.str(), "> 0");
  require(c.n_theta >= 8, "n_theta", std::to_string(c.n_theta), ">= 8");
  require(c.n_r >= 2, "n_r", std::to_string(c.n_r), ">= 2");
  require(c.max_iters >= 0, "max_iters", std::to_string(c.max_iters), ">= 0");
  require(c.step_cap > 0.0, "step_cap", std::to_string(c.step_cap), "> 0");
  require(c.armijo_c > 0.0 && c.armijo_c < 1.0, "armijo_c", std::to_string(c.armijo_c), "in (0, 1)");
  if (c.case_name.rfind("file:", 0) == 0) {
    const std::string path = c.case_name.substr(5);
    if (!std::ifstream(path)) throw ConfigError("case: cannot open mesh file '" + path + "'");
  } else if (c.case_name != "circle_04" && c.case_name != "ellipse") {
    throw ConfigError("case: '" + c.case_name + "' is not one of circle_04, ellipse, file:<path>");
  }
}

TriMesh initial_mesh(const OptConfig& c) {
  if (c.case_name == "circle_04") return generate_annulus_mesh(circle_curve(0.4), 1.0, c.n_theta, c.n_r);
  if (c.case_name == "ellipse") return generate_annulus_mesh(ellipse_curve(0.6, 0.4), 1.0, c.n_theta, c.n_r);
  if (c.case_name.rfind("file:", 0) == 0) return load_mesh(c.case_name.substr(5));
  throw ConfigError("case: '" + c.case_name + "' is not one of circle_04, ellipse, file:<path>");
}

std::string to_string(DescentKind kind) { return kind == DescentKind::H1 ? "h1" : "raw_normal"; }

}  // namespace shapeopt

// Prints one PASS/FAIL line per acceptance criterion. Usage: acceptance [work_dir]
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "shapeopt/config.hpp"
#include "shapeopt/driver.hpp"

using namespace shapeopt;
namespace fs = std::filesystem;

namespace {

constexpr double kGradientGap = 0.05;
constexpr double kGradientSeconds = 60.0;
constexpr double kTangentRatio = 1e-2;
constexpr double kL2Low = 3.2, kL2High = 4.8, kH1Low = 1.6, kH1High = 2.4;
constexpr double kConvergenceSeconds = 120.0;
constexpr double kCase1Rms = 0.02;
constexpr double kCase2Rms = 0.04;
constexpr double kCertificateCost = 1e-6;
constexpr double kCertificateGrad = 1e-2;

int failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
  std::printf("%s  %-28s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<double> history_costs(const fs::path& csv) {
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  std::vector<double> costs;
  while (std::getline(in, line)) {
    const auto a = line.find(',');
    costs.push_back(std::stod(line.substr(a + 1, line.find(',', a + 1) - a - 1)));
  }
  return costs;
}

bool monotone(const std::vector<double>& c) {
  for (std::size_t k = 1; k < c.size(); ++k) {
    if (c[k] > c[k - 1]) return false;
  }
  return true;
}

TriMesh case1_mesh() { return generate_annulus_mesh(circle_curve(0.4), 1.0, 64, 16); }

void gradient_agreement() {
  const auto t0 = std::chrono::steady_clock::now();
  const TriMesh mesh = case1_mesh();
  bool ok = true;
  std::string detail;
  for (double alpha : {1.0, 0.01}) {
    for (const auto& r : compare_gradients(mesh, ShapeProblem::swirl(alpha), {"normal", "wobble", "skewed"})) {
      ok = ok && r.max_relative_gap() <= kGradientGap;
      detail += fmt("a=%g %s gap %.4f; ", alpha, r.field.c_str(), r.max_relative_gap());
    }
  }
  const double t = seconds_since(t0);
  report("gradient_agreement", ok && t < kGradientSeconds, detail + fmt("%.1f s", t));
}

void tangential_invariance() {
  const TriMesh mesh = case1_mesh();
  bool ok = true;
  std::string detail;
  for (double alpha : {1.0, 0.01}) {
    const auto rows = compare_gradients(mesh, ShapeProblem::swirl(alpha), {"normal", "tangent"});
    const double ratio = std::abs(rows[1].fd) / std::abs(rows[0].fd);
    ok = ok && rows[1].boundary == 0.0 && ratio <= kTangentRatio;
    detail += fmt("a=%g pairing %g |fd_t|/|fd_n| %.2e; ", alpha, rows[1].boundary, ratio);
  }
  report("tangential_invariance", ok, detail);
}

void solver_convergence() {
  const auto t0 = std::chrono::steady_clock::now();
  const double alpha = 0.01;
  const ShapeProblem p = ShapeProblem::swirl(alpha);
  std::vector<ErrorNorms> e;
  for (auto [nt, nr] : {std::pair{32, 8}, std::pair{64, 16}, std::pair{128, 32}}) {
    const TriMesh m = generate_annulus_mesh(circle_curve(0.2), 1.0, nt, nr);
    e.push_back(flow_errors(m, solve_state(m, alpha, p.f, p.g), p.y_d, [](const Vec2&) { return 0.0; }));
  }
  bool ok = true;
  std::string detail;
  for (std::size_t k = 1; k < e.size(); ++k) {
    const double l2 = e[k - 1].velocity_l2 / e[k].velocity_l2;
    const double h1 = e[k - 1].velocity_h1 / e[k].velocity_h1;
    ok = ok && l2 >= kL2Low && l2 <= kL2High && h1 >= kH1Low && h1 <= kH1High;
    detail += fmt("L2 ratio %.3f H1 ratio %.3f; ", l2, h1);
  }
  const double t = seconds_since(t0);
  report("solver_convergence", ok && t < kConvergenceSeconds, detail + fmt("%.1f s", t));
}

void experiments(const fs::path& work) {
  OptConfig c1;
  c1.emit_vtk = false;
  c1.output_dir = (work / "case1").string();
  const std::vector<double> alphas{1.0, 0.1, 0.01, 0.001};
  const auto runs = run_sweep(c1, alphas);

  bool ok1 = true;
  std::string d1;
  for (std::size_t i = 0; i < 3; ++i) {
    std::ostringstream name;
    name << "alpha_" << alphas[i];
    const bool mono = monotone(history_costs(fs::path(c1.output_dir) / name.str() / "history.csv"));
    ok1 = ok1 && runs[i].radius_rms_error <= kCase1Rms && runs[i].iterations <= 30 && mono &&
          runs[i].termination != "quality_abort";
    d1 += fmt("a=%g rms %.4f iters %d %s%s; ", alphas[i], runs[i].radius_rms_error, runs[i].iterations,
              runs[i].termination.c_str(), mono ? "" : " NON-MONOTONE");
  }
  report("case1_reconstruction", ok1, d1);

  OptConfig c2;
  c2.case_name = "ellipse";
  c2.emit_vtk = false;
  c2.output_dir = (work / "case2").string();
  const RunResult r2 = run_experiment(c2);
  const double case1_rms = runs[2].radius_rms_error;
  report("case2_reconstruction",
         r2.radius_rms_error <= kCase2Rms && r2.radius_rms_error >= case1_rms && r2.iterations <= 30,
         fmt("rms %.4f (case 1 at a=0.01: %.4f) iters %d %s", r2.radius_rms_error, case1_rms, r2.iterations,
             r2.termination.c_str()));

  const RunResult& small = runs[3];
  report("small_viscosity_completes", small.termination != "quality_abort",
         fmt("a=0.001 rms %.4f iters %d %s", small.radius_rms_error, small.iterations, small.termination.c_str()));
}

void certificate() {
  const double alpha = 0.01;
  const ShapeProblem p = ShapeProblem::swirl(alpha);
  auto measure = [&](const TriMesh& m) {
    const StokesSolver solver(m, alpha);
    const FlowField y = solve_state(solver, p.f, p.g);
    const FlowField v = solve_adjoint(solver, y, p.y_d);
    return std::pair{compute_cost(m, y, p.y_d), descent_direction(m, p, y, v).h1_norm};
  };
  const auto [j0, g0] = measure(case1_mesh());
  const auto [jt, gt] = measure(generate_annulus_mesh(circle_curve(0.2), 1.0, 64, 16));
  report("optimality_certificate", jt <= kCertificateCost * j0 && gt <= kCertificateGrad * g0,
         fmt("J ratio %.3e (<= %g), |d| ratio %.3e (<= %g)", jt / j0, kCertificateCost, gt / g0, kCertificateGrad));
}

void determinism(const fs::path& work) {
  OptConfig c;
  c.output_dir = (work / "det_a").string();
  run_experiment(c);
  c.output_dir = (work / "det_b").string();
  run_experiment(c);
  const std::string a = slurp(work / "det_a" / "history.csv");
  const std::string b = slurp(work / "det_b" / "history.csv");
  report("determinism", !a.empty() && a == b, fmt("history.csv %zu bytes, identical: %s", a.size(), a == b ? "yes" : "no"));
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "shapeopt_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  gradient_agreement();
  tangential_invariance();
  solver_convergence();
  experiments(work);
  certificate();
  determinism(work);

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

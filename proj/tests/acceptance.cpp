// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run all criteria
//   acceptance 2 7 9      run a subset

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "microem/cli.hpp"
#include "microem/config.hpp"
#include "microem/eoc.hpp"
#include "microem/io.hpp"
#include "microem/stepper.hpp"

#ifndef MICROEM_SOURCE_DIR
#error "MICROEM_SOURCE_DIR must point at the source tree"
#endif

using namespace microem;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string fix(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string preset(const std::string& name) { return std::string(MICROEM_SOURCE_DIR) + "/configs/" + name; }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("microem_acceptance_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::vector<std::string>& args, std::string* out = nullptr, std::string* err = nullptr) {
  std::vector<const char*> argv{"microem"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return code;
}

void write_text(const fs::path& path, const std::string& text) { std::ofstream(path) << text; }

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// --- shared configurations ------------------------------------------------

RunConfig eoc_config() {
  RunConfig cfg = load_config(preset("eoc.ini"));
  cfg.mesh.divisions = {64, 64, 0};
  cfg.t_end = 1e-5;
  return cfg;
}

RunConfig energy_law_config() {
  RunConfig cfg = load_config(preset("standard.ini"));
  cfg.mesh.divisions = {16, 16, 0};
  cfg.dt = 1e-5;
  cfg.t_end = 50 * cfg.dt;
  cfg.picard.tol = 1e-10;
  return cfg;
}

RunConfig monotone_config() {
  RunConfig cfg = load_config(preset("standard.ini"));
  cfg.mesh.divisions = {64, 64, 0};
  cfg.dt = 1e-5;
  cfg.t_end = 0.05;
  return cfg;
}

struct LawCheck {
  double worst_law = 0.0;   // max |residual| / max(1, |E^n|)
  double worst_mass = 0.0;  // max |mass^n - mass^0| / |Omega|
  double worst_rise = 0.0;  // max (E^{n+1} - E^n) / |E^0|
  double max_phi = -1e300;
};

LawCheck check_laws(const RunResult& r, double domain_measure) {
  LawCheck c;
  double prev = r.initial_energy;
  for (const auto& rec : r.records) {
    c.worst_law = std::max(c.worst_law, std::abs(rec.energy_law_residual) / std::max(1.0, std::abs(prev)));
    c.worst_mass = std::max(c.worst_mass, std::abs(rec.mass - r.initial_mass) / domain_measure);
    c.worst_rise = std::max(c.worst_rise, (rec.energy - prev) / std::abs(r.initial_energy));
    c.max_phi = std::max(c.max_phi, rec.phi_max);
    prev = rec.energy;
  }
  return c;
}

// --- criteria ---------------------------------------------------------------

Outcome criterion_1() {
  RunConfig cfg = eoc_config();
  const std::vector<double> ladder{1e-6, 1e-6 / 2, 1e-6 / 3, 1e-6 / 4, 1e-6 / 5};
  const EocReport report = run_eoc_study(cfg, ladder, 1e-8);
  report.write_table(std::cout);
  double lo = 1e300, hi = -1e300;
  bool all_present = true;
  for (std::size_t i = 2; i < report.rows.size(); ++i) {
    for (std::size_t f = 0; f < 3; ++f) {
      for (const auto& r : {report.rows[i].r2[f], report.rows[i].r1[f]}) {
        if (!r) {
          all_present = false;
          continue;
        }
        lo = std::min(lo, *r);
        hi = std::max(hi, *r);
      }
    }
  }
  return {all_present && lo >= 1.85 && hi <= 2.15,
          "rates (rows 3-5, phi/mu/sigma, L2 and H1) in [" + fix(lo) + ", " + fix(hi) + "], need [1.85, 2.15]"};
}

// Criteria 2, 3 and 11 share the same run.
RunResult& energy_law_run() {
  static RunResult result = run_simulation(energy_law_config());
  return result;
}

Outcome criterion_2() {
  const RunResult& r = energy_law_run();
  const LawCheck c = check_laws(r, 100.0);
  return {r.completed() && r.records.size() == 50 && c.worst_law <= 1e-7,
          std::to_string(r.records.size()) + " steps, max |dE/dt + M |grad mu|^2| / max(1,|E|) = " +
              sci(c.worst_law) + " (limit 1e-7)"};
}

Outcome criterion_3() {
  const RunResult& r = energy_law_run();
  const LawCheck c = check_laws(r, 100.0);
  return {r.completed() && c.worst_mass <= 1e-10,
          "max |mass^n - mass^0| / |Omega| = " + sci(c.worst_mass) + " (limit 1e-10)"};
}

RunResult& monotone_run() {
  static RunResult result = run_simulation(monotone_config());
  return result;
}

Outcome criterion_4() {
  const RunResult& r = monotone_run();
  const LawCheck c = check_laws(r, 100.0);
  return {r.completed() && r.records.size() == 5000 && c.worst_rise <= 1e-8,
          std::to_string(r.records.size()) + " steps, E " + fix(r.initial_energy, 6) + " -> " +
              fix(r.records.empty() ? r.initial_energy : r.records.back().energy, 6) +
              ", largest step increase / |E0| = " + sci(c.worst_rise) + " (limit 1e-8)"};
}

Outcome criterion_5() {
  const RunResult& r = monotone_run();
  const LawCheck c = check_laws(r, 100.0);
  const RunConfig cfg = monotone_config();
  const Vector phi0 = initial_phi(cfg.ic, cfg.mesh.build());
  long first = -1;
  for (const auto& rec : r.records) {
    if (rec.phi_max > 1.0) {
      first = rec.step;
      break;
    }
  }
  return {r.completed() && c.max_phi > 1.0,
          "max_n max_x phi = " + fix(c.max_phi, 6) + " (need > 1), first above 1 at step " + std::to_string(first) +
              ", initial max " + fix(*std::max_element(phi0.begin(), phi0.end()), 6)};
}

Outcome criterion_6() {
  RunConfig cfg = load_config(preset("standard.ini"));
  cfg.mesh.divisions = {8, 8, 0};
  cfg.picard.tol = 1e-12;
  Simulation sim(cfg);
  State state = sim.initial_state();
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    const PicardResult step = sim.step(state);
    State zero = state;
    std::fill(zero.phi.begin(), zero.phi.end(), 0.0);
    std::fill(zero.mu.begin(), zero.mu.end(), 0.0);
    std::fill(zero.sigma.begin(), zero.sigma.end(), 0.0);
    const double accepted = nonlinear_residual(sim.space(), cfg.params, step.state, state, cfg.dt).sup_norm();
    const double from_zero = nonlinear_residual(sim.space(), cfg.params, zero, state, cfg.dt).sup_norm();
    worst = std::max(worst, accepted / from_zero);
    state = step.state;
  }
  return {worst <= 1e-9, "5 steps, max ||R(accepted)||_inf / ||R(0)||_inf = " + sci(worst) + " (limit 1e-9)"};
}

Outcome criterion_7() {
  const double h0 = 0.5;
  std::mt19937_64 rng(20240607);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double worst_secant = 0.0, worst_diag = 0.0;
  // Independent oracle: the difference and derivative of (p^2-1)^2 (p^2+h0) in long double.
  auto f0_ld = [&](long double p) { return (p * p - 1) * (p * p - 1) * (p * p + h0); };
  auto f0p_ld = [&](long double p) { return 4 * p * (p * p - 1) * (p * p + h0) + 2 * p * (p * p - 1) * (p * p - 1); };
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng);
    const long double exact = f0_ld(a) - f0_ld(b);
    const long double lhs = static_cast<long double>(f0_secant(a, b, h0)) * (static_cast<long double>(a) - b);
    const double scale = std::max({std::abs(f0(a, h0)), std::abs(f0(b, h0)), 1.0});
    worst_secant = std::max(worst_secant, static_cast<double>(std::abs(lhs - exact)) / scale);
    const double diag = f0_secant(a, a, h0);
    const double scale_d = std::max(std::abs(f0_prime(a, h0)), 1.0);
    worst_diag = std::max(worst_diag, static_cast<double>(std::abs(diag - f0p_ld(a))) / scale_d);
    worst_diag = std::max(worst_diag, std::abs(diag - f0_prime(a, h0)) / scale_d);
  }
  return {worst_secant <= 1e-12 && worst_diag <= 1e-13,
          "1000 pairs: secant identity " + sci(worst_secant) + " (limit 1e-12), diagonal " + sci(worst_diag) +
              " (limit 1e-13)"};
}

Outcome criterion_8() {
  const double pi = std::acos(-1.0);
  const ModelParams p;
  std::vector<double> errors;
  std::string detail = "L2 errors";
  for (int n : {8, 16, 32, 64}) {
    const P1Space space(build_rect_mesh(Box::rect(0, 1, 0, 1), n, n), rule_simplex(2, 6));
    const State s = project_initial(space, p, [&](std::span<const double> x) {
      return std::cos(pi * x[0]) * std::cos(pi * x[1]);
    });
    // Error against the analytic -Laplacian, integrated with the degree-6 rule.
    const auto& rule = space.rule();
    const auto& mesh = space.mesh();
    double err2 = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
      const auto conn = mesh.element(e);
      const double jac = space.geometry(e).measure * 2.0;
      for (std::size_t q = 0; q < rule.size(); ++q) {
        double x = 0.0, y = 0.0, sh = 0.0;
        for (int a = 0; a < 3; ++a) {
          const auto node = mesh.node(static_cast<std::size_t>(conn[a]));
          x += rule.points[q][a] * node[0];
          y += rule.points[q][a] * node[1];
          sh += rule.points[q][a] * s.sigma[static_cast<std::size_t>(conn[a])];
        }
        const double exact = 2.0 * pi * pi * std::cos(pi * x) * std::cos(pi * y);
        err2 += rule.weights[q] * jac * (sh - exact) * (sh - exact);
      }
    }
    errors.push_back(std::sqrt(err2));
    detail += " " + sci(errors.back());
  }
  double worst = 1e300;
  detail += "; orders";
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double order = std::log2(errors[i - 1] / errors[i]);
    worst = std::min(worst, order);
    detail += " " + fix(order, 3);
  }
  return {worst >= 1.8, detail + " (need >= 1.8)"};
}

Outcome criterion_9() {
  const fs::path dir = scratch("c9");
  std::string out, err;
  bool ok = true;
  std::string detail;

  const int code = run_cli({"info", preset("standard.ini")}, &out, &err);
  const auto pos = out.find("dt_safety_bound = ");
  std::string printed;
  if (pos != std::string::npos) printed = out.substr(pos + 18, out.find('\n', pos) - pos - 18);
  const ModelParams std_params = load_config(preset("standard.ini")).params;
  const double expected = 3.0 * std_params.lambda() * std_params.lambda() /
                          (2.0 * std::pow(std::abs(std_params.g0()), 3) * std_params.mobility());
  const bool info_ok = code == 0 && printed == "0.00234375" && std::abs(std::stod(printed) - expected) <= 1e-15 * expected;
  ok = ok && info_ok;
  detail += "info prints " + (printed.empty() ? std::string("nothing") : printed);

  // run on a tiny uniform problem at dt below, at, and above the bound, and with g0 = 0.
  auto warnings_for = [&](double g0, double dt, const std::string& tag) {
    RunConfig cfg;
    cfg.mesh.box = Box::rect(0, 1, 0, 1);
    cfg.mesh.divisions = {4, 4, 0};
    cfg.params = ModelParams(0.1, 0.1, 1.0, 0.5, g0, 1.0);
    cfg.dt = dt;
    cfg.t_end = 2 * dt;
    cfg.ic = Uniform{0.2};
    cfg.output.directory = (dir / tag).string();
    const fs::path file = dir / (tag + ".ini");
    write_text(file, serialize_config(cfg));
    std::string o, e;
    const int rc = run_cli({"run", file.string(), "--quiet"}, &o, &e);
    int count = 0;
    for (std::size_t p = e.find("warning:"); p != std::string::npos; p = e.find("warning:", p + 1)) ++count;
    return std::make_pair(rc, count);
  };
  const double bound = dt_safety_bound(ModelParams(0.1, 0.1, 1.0, 0.5, -4.0, 1.0));
  const auto below = warnings_for(-4.0, 1e-5, "below");
  const auto at = warnings_for(-4.0, bound, "at");
  const auto above = warnings_for(-4.0, 0.01, "above");
  const auto zero = warnings_for(0.0, 0.01, "g0zero");
  const bool run_ok = below == std::make_pair(0, 0) && at == std::make_pair(0, 0) && above.second == 1 &&
                      zero == std::make_pair(0, 0);
  ok = ok && run_ok;
  detail += "; warnings below/at/above/g0=0: " + std::to_string(below.second) + "/" + std::to_string(at.second) + "/" +
            std::to_string(above.second) + "/" + std::to_string(zero.second) + " (need 0/0/1/0)";
  return {ok, detail};
}

Outcome criterion_10() {
  RunConfig cfg = load_config(preset("3d.ini"));
  cfg.mesh.divisions = {24, 24, 6};
  cfg.dt = 1e-5;
  cfg.t_end = 200 * cfg.dt;
  cfg.picard.tol = 1e-10;
  const RunResult r = run_simulation(cfg);
  const LawCheck c = check_laws(r, 25.0);
  const bool ok = r.completed() && r.records.size() == 200 && c.worst_law <= 1e-7 && c.worst_mass <= 1e-10 &&
                  c.worst_rise <= 1e-8;
  return {ok, std::to_string(r.records.size()) + " steps" + (r.failure ? " (" + *r.failure + ")" : std::string()) +
                  ", energy law " + sci(c.worst_law) + ", mass " + sci(c.worst_mass) + ", energy rise " +
                  sci(c.worst_rise)};
}

Outcome criterion_11() {
  const fs::path dir = scratch("c11");
  const fs::path file = dir / "run.ini";
  write_text(file, serialize_config(energy_law_config()));
  const int a = run_cli({"run", file.string(), "--quiet", "--out-dir", (dir / "a").string()});
  const int b = run_cli({"run", file.string(), "--quiet", "--out-dir", (dir / "b").string()});
  const std::string csv_a = read_text(dir / "a" / "records.csv");
  const std::string csv_b = read_text(dir / "b" / "records.csv");
  const std::string in_process = format_csv(energy_law_run().records);
  const bool ok = a == 0 && b == 0 && !csv_a.empty() && csv_a == csv_b && csv_a == in_process;
  return {ok, "two CLI runs " + std::string(csv_a == csv_b ? "identical" : "DIFFER") + " (" +
                  std::to_string(csv_a.size()) + " bytes), in-process series " +
                  (csv_a == in_process ? "identical" : "DIFFERS")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"temporal order two (EOC, 64x64)", criterion_1},
      {"discrete energy law (16x16, 50 steps)", criterion_2},
      {"mass conservation", criterion_3},
      {"energy monotonicity (64x64, T = 0.05)", criterion_4},
      {"maximum principle violated", criterion_5},
      {"Picard fixed point solves the scheme", criterion_6},
      {"secant consistency", criterion_7},
      {"initial sigma projection order", criterion_8},
      {"time-step bound report and warning", criterion_9},
      {"3D smoke (24x24x6, 200 steps)", criterion_10},
      {"determinism", criterion_11},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %2d: %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  fs::remove_all(fs::temp_directory_path() / ("microem_acceptance_" + std::to_string(::getpid())));
  return failures == 0 ? 0 : 1;
}

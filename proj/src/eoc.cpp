#include "microem/eoc.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace microem {

namespace {

bool divides(double t_end, double dt) {
  const double ratio = t_end / dt;
  return std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, std::round(ratio));
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string rate_cell(const std::optional<double>& r, const char* spec) { return r ? fmt(spec, *r) : "-"; }

}  // namespace

std::optional<double> eoc_rate(double e, double e_hat, double dt, double dt_hat) {
  if (!(e > 0.0) || !(e_hat > 0.0)) return std::nullopt;
  return std::log(e / e_hat) / std::log(dt / dt_hat);
}

EocReport compute_rates(const std::vector<double>& ladder, const std::vector<FieldErrors>& errors) {
  if (ladder.size() != errors.size()) throw std::invalid_argument("ladder and error lists differ in length");
  EocReport report;
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    EocRow row;
    row.dt = ladder[i];
    row.errors = errors[i];
    if (i > 0) {
      for (std::size_t f = 0; f < 3; ++f) {
        row.r2[f] = eoc_rate(errors[i - 1].e2[f], errors[i].e2[f], ladder[i - 1], ladder[i]);
        row.r1[f] = eoc_rate(errors[i - 1].e1[f], errors[i].e1[f], ladder[i - 1], ladder[i]);
      }
    }
    report.rows.push_back(row);
  }
  return report;
}

State run_to_end(const RunConfig& cfg) {
  Simulation sim(cfg);
  State state = sim.initial_state();
  const long steps = step_count(cfg.t_end, cfg.dt);
  State previous;
  for (long k = 0; k < steps; ++k) {
    PicardResult r = sim.step(state, k > 0 ? &previous : nullptr);
    previous = std::move(state);
    state = std::move(r.state);
  }
  return state;
}

void validate_eoc(const RunConfig& base, const std::vector<double>& ladder, double dt_reference) {
  if (ladder.empty()) throw std::invalid_argument("eoc: empty time-step ladder");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (!(ladder[i] > 0.0)) throw std::invalid_argument("eoc: ladder time steps must be > 0");
    if (i > 0 && !(ladder[i] < ladder[i - 1])) throw std::invalid_argument("eoc: ladder must be strictly decreasing");
    if (!divides(base.t_end, ladder[i])) {
      throw std::invalid_argument("eoc: dt = " + fmt("%.6g", ladder[i]) + " does not divide t_end = " +
                                  fmt("%.6g", base.t_end));
    }
  }
  if (!(dt_reference > 0.0) || !(dt_reference < ladder.back())) {
    throw std::invalid_argument("eoc: reference dt must be positive and below every ladder step");
  }
  if (!divides(base.t_end, dt_reference)) {
    throw std::invalid_argument("eoc: reference dt = " + fmt("%.6g", dt_reference) + " does not divide t_end");
  }
}

EocReport run_eoc_study(const RunConfig& base, const std::vector<double>& ladder, double dt_reference,
                        const EocRunner& runner) {
  validate(base);
  validate_eoc(base, ladder, dt_reference);

  auto run_at = [&](double dt) {
    RunConfig cfg = base;
    cfg.dt = dt;
    try {
      return runner(cfg);
    } catch (const NonConvergence& e) {
      throw EocFailure(dt, "eoc run with dt = " + fmt("%.6g", dt) + " failed: " + e.what(), true);
    } catch (const std::exception& e) {
      throw EocFailure(dt, "eoc run with dt = " + fmt("%.6g", dt) + " failed: " + e.what(), false);
    }
  };

  const P1Space space(base.mesh.build(), rule_simplex(base.mesh.box.dim, 6), base.threads);
  const State reference = run_at(dt_reference);

  std::vector<FieldErrors> errors;
  for (double dt : ladder) {
    const State s = run_at(dt);
    FieldErrors fe;
    for (std::size_t f = 0; f < 3; ++f) {
      const Vector& a = f == 0 ? s.phi : f == 1 ? s.mu : s.sigma;
      const Vector& b = f == 0 ? reference.phi : f == 1 ? reference.mu : reference.sigma;
      Vector d(a.size());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
      fe.e2[f] = l2_norm(space.mass(), d);
      fe.e1[f] = h1_norm(space.mass(), space.stiffness(), d);
    }
    errors.push_back(fe);
  }

  EocReport report = compute_rates(ladder, errors);
  report.dt_reference = dt_reference;
  report.t_end = base.t_end;
  std::ostringstream mesh;
  const auto& dv = base.mesh.divisions;
  mesh << dv[0] << "x" << dv[1];
  if (base.mesh.box.dim == 3) mesh << "x" << dv[2];
  report.mesh = mesh.str();
  report.params = base.params;
  return report;
}

void EocReport::write_table(std::ostream& os) const {
  os << "EOC study: mesh " << mesh << ", T = " << fmt("%.6g", t_end) << ", reference dt = "
     << fmt("%.6g", dt_reference) << "\n";
  char line[160];
  for (std::size_t f = 0; f < 3; ++f) {
    os << "\nfield " << kFieldNames[f] << "\n";
    std::snprintf(line, sizeof line, "  %-12s %-14s %-8s %-14s %-8s\n", "dt", "e2", "r2", "e1", "r1");
    os << line;
    for (const auto& row : rows) {
      std::snprintf(line, sizeof line, "  %-12.6g %-14.6e %-8s %-14.6e %-8s\n", row.dt, row.errors.e2[f],
                    rate_cell(row.r2[f], "%.4f").c_str(), row.errors.e1[f], rate_cell(row.r1[f], "%.4f").c_str());
      os << line;
    }
  }
}

void EocReport::write_csv(std::ostream& os) const {
  os << "dt,field,e2,r2,e1,r1\n";
  for (const auto& row : rows) {
    for (std::size_t f = 0; f < 3; ++f) {
      os << fmt("%.17g", row.dt) << ',' << kFieldNames[f] << ',' << fmt("%.17g", row.errors.e2[f]) << ','
         << (row.r2[f] ? fmt("%.17g", *row.r2[f]) : "") << ',' << fmt("%.17g", row.errors.e1[f]) << ','
         << (row.r1[f] ? fmt("%.17g", *row.r1[f]) : "") << '\n';
    }
  }
}

}  // namespace microem

#include "microem/stepper.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace microem {

namespace {

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

double sq_l2(const CsrMatrix& mass, std::span<const double> v) {
  const double n = l2_norm(mass, v);
  return n * n;
}

}  // namespace

StructuredMesh MeshSpec::build() const {
  if (box.dim == 2) return build_rect_mesh(box, divisions[0], divisions[1]);
  if (box.dim == 3) return build_box_mesh(box, divisions[0], divisions[1], divisions[2]);
  throw std::invalid_argument("mesh dimension must be 2 or 3");
}

void validate(const RunConfig& cfg) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw std::invalid_argument("dt must be > 0");
  if (!(cfg.t_end >= cfg.dt) || !std::isfinite(cfg.t_end)) throw std::invalid_argument("t_end must be >= dt");
  if (!(cfg.picard.tol > 0.0)) throw std::invalid_argument("picard tol must be > 0");
  if (cfg.picard.max_iter < 1) throw std::invalid_argument("picard max_iter must be >= 1");
  if (cfg.threads < 1) throw std::invalid_argument("threads must be >= 1");
  if (cfg.output.snapshot_every < 0) throw std::invalid_argument("snapshot_every must be >= 0");
  const int dim = cfg.mesh.box.dim;
  for (int d = 0; d < dim; ++d) {
    if (cfg.mesh.divisions[static_cast<std::size_t>(d)] < 1) {
      throw std::invalid_argument("mesh divisions must be >= 1");
    }
  }
  validate(cfg.ic);
}

long step_count(double t_end, double dt) {
  const double ratio = t_end / dt;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, nearest)) return static_cast<long>(nearest);
  return static_cast<long>(std::ceil(ratio));
}

PicardResult picard_step(const P1Space& space, LinearSolver& solver, const ModelParams& p, const State& state_n,
                         double dt, const PicardSettings& settings, const State* previous) {
  const std::size_t n = space.num_nodes();
  const CsrMatrix& mass = space.mass();

  State iterate = state_n;
  if (settings.extrapolate && previous != nullptr) {
    for (std::size_t i = 0; i < n; ++i) {
      iterate.phi[i] = 2.0 * state_n.phi[i] - previous->phi[i];
      iterate.mu[i] = 2.0 * state_n.mu[i] - previous->mu[i];
      iterate.sigma[i] = 2.0 * state_n.sigma[i] - previous->sigma[i];
    }
  }

  PicardResult result;
  for (int it = 1; it <= settings.max_iter; ++it) {
    const PicardSystem sys = assemble_picard_system(space, p, state_n, iterate.phi, dt);
    const Vector x = solver.solve(sys.matrix, sys.rhs);
    if (!all_finite(x)) {
      throw NumericalBreakdown("non-finite Picard iterate at step " + std::to_string(state_n.step + 1) +
                                   ", iteration " + std::to_string(it),
                               result.history);
    }

    State next;
    next.phi.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
    next.mu.assign(x.begin() + static_cast<std::ptrdiff_t>(n), x.begin() + static_cast<std::ptrdiff_t>(2 * n));
    next.sigma.assign(x.begin() + static_cast<std::ptrdiff_t>(2 * n), x.end());
    next.time = static_cast<double>(state_n.step + 1) * dt;
    next.step = state_n.step + 1;

    Vector d(n);
    double diff = 0.0;
    for (int f = 0; f < 3; ++f) {
      const Vector& a = f == 0 ? next.phi : f == 1 ? next.mu : next.sigma;
      const Vector& b = f == 0 ? iterate.phi : f == 1 ? iterate.mu : iterate.sigma;
      for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
      diff += sq_l2(mass, d);
    }
    const double size = sq_l2(mass, next.phi) + sq_l2(mass, next.mu) + sq_l2(mass, next.sigma);
    const double rel = size > 0.0 ? std::sqrt(diff / size) : std::sqrt(diff);
    result.history.push_back(rel);
    iterate = std::move(next);
    if (!std::isfinite(rel)) {
      throw NumericalBreakdown("non-finite Picard increment at step " + std::to_string(state_n.step + 1),
                               result.history);
    }
    if (rel <= settings.tol) {
      result.iterations = it;
      result.state = std::move(iterate);
      return result;
    }
  }
  std::ostringstream msg;
  msg << "Picard iteration did not converge in " << settings.max_iter << " iterations at step "
      << state_n.step + 1 << " (last relative increment " << result.history.back() << ", tol " << settings.tol
      << ")";
  throw NonConvergence(msg.str(), result.history);
}

DtSafety check_dt_safety(const RunConfig& cfg) {
  DtSafety s;
  s.bound = dt_safety_bound(cfg.params);
  s.warn = cfg.dt > s.bound;
  if (s.warn) {
    std::ostringstream msg;
    msg << "dt = " << cfg.dt << " exceeds the uniqueness bound 3 lambda^2 / (2 |g0|^3 M) = " << s.bound
        << "; the linearized step may not be uniquely solvable";
    s.message = msg.str();
  }
  return s;
}

Simulation::Simulation(RunConfig cfg)
    : cfg_((validate(cfg), std::move(cfg))),
      space_(cfg_.mesh.build(), rule_simplex(cfg_.mesh.box.dim, 6), cfg_.threads),
      solver_(cfg_.solver) {}

State Simulation::initial_state() const {
  return project_initial(space_, cfg_.params, initial_phi(cfg_.ic, space_.mesh()));
}

PicardResult Simulation::step(const State& current, const State* previous) {
  return picard_step(space_, solver_, cfg_.params, current, cfg_.dt, cfg_.picard, previous);
}

RunResult run_simulation(const RunConfig& cfg, const RunSinks& sinks) {
  Simulation sim(cfg);
  const P1Space& space = sim.space();
  const ModelParams& p = sim.config().params;

  RunResult out;
  out.safety = check_dt_safety(cfg);
  if (out.safety.warn && sinks.on_warning) sinks.on_warning(out.safety);

  State current = sim.initial_state();
  out.initial_energy = total_energy(space, p, current.phi, current.sigma);
  out.initial_mass = mass_integral(space.mass(), current.phi);
  if (sinks.on_snapshot) sinks.on_snapshot(space.mesh(), current);

  const long steps = step_count(cfg.t_end, cfg.dt);
  const int every = cfg.output.snapshot_every;
  double energy = out.initial_energy;
  State previous;
  bool has_previous = false;
  for (long k = 1; k <= steps; ++k) {
    PicardResult r;
    try {
      r = sim.step(current, has_previous ? &previous : nullptr);
    } catch (const StepFailure& e) {
      out.failure = e.what();
      out.failure_kind = dynamic_cast<const NonConvergence*>(&e) ? FailureKind::non_convergence : FailureKind::breakdown;
      out.failure_history = e.history();
      break;
    } catch (const SolverFailure& e) {
      out.failure = std::string("linear solver failed at step ") + std::to_string(k) + ": " + e.what();
      out.failure_kind = FailureKind::solver;
      break;
    }
    StepRecord rec = record_step(space, p, current, energy, r.state, r.iterations, cfg.dt);
    energy = rec.energy;
    out.records.push_back(rec);
    if (sinks.on_record) sinks.on_record(rec);
    previous = std::move(current);
    has_previous = true;
    current = std::move(r.state);
    if (sinks.on_snapshot && ((every > 0 && k % every == 0) || k == steps)) sinks.on_snapshot(space.mesh(), current);
  }
  out.final_state = std::move(current);
  return out;
}

}  // namespace microem

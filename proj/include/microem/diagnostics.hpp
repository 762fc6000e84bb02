#pragma once

#include <span>
#include <utility>

#include "microem/assembly.hpp"

namespace microem {

/// One row of the per-step time series.
struct StepRecord {
  long step = 0;
  double time = 0.0;
  double energy = 0.0;
  double mass = 0.0;  // int phi dx
  double phi_min = 0.0;
  double phi_max = 0.0;
  int picard_iters = 0;
  double grad_mu_sq = 0.0;  // (mu^{n+1/2})^T K mu^{n+1/2}
  /// (E^{n+1} - E^n) / dt + M * grad_mu_sq; zero for the exact scheme solution.
  double energy_law_residual = 0.0;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

/// Nodal extrema; for P1 fields these are the extrema over the domain.
std::pair<double, double> extrema(std::span<const double> phi);

StepRecord record_step(const P1Space& space, const ModelParams& p, const State& prev, const State& next,
                       int picard_iters, double dt);

/// Same as above when the energy of `prev` is already known.
StepRecord record_step(const P1Space& space, const ModelParams& p, const State& prev, double prev_energy,
                       const State& next, int picard_iters, double dt);

}  // namespace microem

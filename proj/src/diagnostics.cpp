#include "microem/diagnostics.hpp"

#include <algorithm>
#include <stdexcept>

namespace microem {

std::pair<double, double> extrema(std::span<const double> phi) {
  if (phi.empty()) throw std::invalid_argument("extrema of an empty field");
  const auto [lo, hi] = std::minmax_element(phi.begin(), phi.end());
  return {*lo, *hi};
}

StepRecord record_step(const P1Space& space, const ModelParams& p, const State& prev, const State& next,
                       int picard_iters, double dt) {
  return record_step(space, p, prev, total_energy(space, p, prev.phi, prev.sigma), next, picard_iters, dt);
}

StepRecord record_step(const P1Space& space, const ModelParams& p, const State& prev, double prev_energy,
                       const State& next, int picard_iters, double dt) {
  StepRecord rec;
  rec.step = next.step;
  rec.time = next.time;
  rec.energy = total_energy(space, p, next.phi, next.sigma);
  rec.mass = mass_integral(space.mass(), next.phi);
  std::tie(rec.phi_min, rec.phi_max) = extrema(next.phi);
  rec.picard_iters = picard_iters;

  Vector mu_half(next.mu.size());
  for (std::size_t i = 0; i < mu_half.size(); ++i) mu_half[i] = 0.5 * (next.mu[i] + prev.mu[i]);
  rec.grad_mu_sq = std::max(0.0, dot(mu_half, spmv(space.stiffness(), mu_half)));
  rec.energy_law_residual = (rec.energy - prev_energy) / dt + p.mobility() * rec.grad_mu_sq;
  return rec;
}

}  // namespace microem

#include <catch_amalgamated.hpp>

#include <cmath>

#include "microem/diagnostics.hpp"
#include "microem/stepper.hpp"

using namespace microem;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("extrema are nodal") {
  const auto [lo, hi] = extrema(Vector{0.5, -1.25, 3.0, 0.0});
  CHECK(lo == -1.25);
  CHECK(hi == 3.0);
}

TEST_CASE("stationary uniform state") {
  const P1Space space(build_rect_mesh(Box::rect(0, 2, 0, 3), 3, 3), rule_simplex(2, 6));
  const ModelParams p;
  const double c = -0.4;
  State s{Vector(space.num_nodes(), c), Vector(space.num_nodes(), p.beta() * f0_prime(c, p.h0())),
          Vector(space.num_nodes(), 0.0)};
  State next = s;
  next.step = 1;
  next.time = 1e-3;
  const StepRecord r = record_step(space, p, s, next, 1, 1e-3);
  CHECK(r.step == 1);
  CHECK(r.time == 1e-3);
  CHECK(r.energy_law_residual == 0.0);
  CHECK_THAT(r.grad_mu_sq, WithinAbs(0.0, 1e-20));
  CHECK_THAT(r.mass, WithinRel(6.0 * c, 1e-14));
  CHECK(r.phi_min == c);
  CHECK(r.phi_max == c);
  CHECK(r.picard_iters == 1);
  CHECK_THAT(r.energy, WithinRel(6.0 * p.beta() * f0(c, p.h0()), 1e-14));
}

TEST_CASE("tight-tolerance steps satisfy the energy identity") {
  RunConfig cfg;
  cfg.mesh.box = Box::rect(0, 1, 0, 1);
  cfg.mesh.divisions = {4, 4, 0};
  cfg.dt = 1e-4;
  cfg.t_end = 5e-4;
  cfg.picard.tol = 1e-12;
  cfg.ic = RandomNoise{0.1, 0.5, 11};
  const RunResult r = run_simulation(cfg);
  REQUIRE(r.completed());
  REQUIRE(r.records.size() == 5);
  double prev = r.initial_energy;
  for (const auto& rec : r.records) {
    CHECK(std::abs(rec.energy_law_residual) <= 1e-9 * std::max(1.0, std::abs(prev)));
    CHECK(rec.grad_mu_sq > 0.0);
    prev = rec.energy;
  }
}

TEST_CASE("known previous energy gives the same record") {
  Simulation sim([] {
    RunConfig c;
    c.mesh.divisions = {4, 4, 0};
    c.ic = RandomNoise{0.0, 0.3, 5};
    return c;
  }());
  const State s0 = sim.initial_state();
  const PicardResult step = sim.step(s0);
  const auto& sp = sim.space();
  const auto& p = sim.config().params;
  const double e0 = total_energy(sp, p, s0.phi, s0.sigma);
  CHECK(record_step(sp, p, s0, step.state, step.iterations, 1e-5) ==
        record_step(sp, p, s0, e0, step.state, step.iterations, 1e-5));
}

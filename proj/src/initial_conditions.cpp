#include "microem/initial_conditions.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace microem {

namespace {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace

std::string preset_name(const IcPreset& ic) {
  return std::visit(overloaded{[](const TwoDroplets&) { return std::string("two_droplets"); },
                               [](const DropletArray&) { return std::string("droplet_array"); },
                               [](const Uniform&) { return std::string("uniform"); },
                               [](const RandomNoise&) { return std::string("random"); }},
                    ic);
}

void validate(const IcPreset& ic) {
  std::visit(overloaded{[](const TwoDroplets& t) {
                          if (!(t.lambda > 0.0)) throw std::invalid_argument("two_droplets: lambda must be > 0");
                        },
                        [](const DropletArray& a) {
                          if (!(a.lambda > 0.0)) throw std::invalid_argument("droplet_array: lambda must be > 0");
                          for (const auto& d : a.droplets) {
                            if (!(d.radius > 0.0)) throw std::invalid_argument("droplet radius must be > 0");
                            if (d.phase != 1 && d.phase != -1) {
                              throw std::invalid_argument("droplet phase must be -1 or +1");
                            }
                          }
                        },
                        [](const Uniform& u) {
                          if (!std::isfinite(u.value)) throw std::invalid_argument("uniform value must be finite");
                        },
                        [](const RandomNoise& r) {
                          if (!(r.amplitude >= 0.0) || !std::isfinite(r.mean)) {
                            throw std::invalid_argument("random: amplitude must be >= 0 and mean finite");
                          }
                        }},
             ic);
}

double two_droplet_ic(double lambda, std::span<const double> x) {
  const double width = std::sqrt(2.0 * lambda);
  const double r1 = std::hypot(x[0] - 7.0, x[1] - 7.0);
  const double r2 = std::hypot(x[0] - 20.0, x[1] - 20.0);
  return -std::tanh((r1 - 3.0) / width) - std::tanh((r2 - 6.0) / width) + 1.0;
}

double droplet_array_ic(const DropletArray& spec, std::span<const double> x) {
  const double width = std::sqrt(2.0 * spec.lambda);
  double value = 0.0;
  for (const auto& d : spec.droplets) {
    double r2 = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) r2 += (x[k] - d.center[k]) * (x[k] - d.center[k]);
    value += d.phase * 0.5 * (1.0 - std::tanh((std::sqrt(r2) - d.radius) / width));
  }
  return value;
}

Vector initial_phi(const IcPreset& ic, const StructuredMesh& mesh) {
  validate(ic);
  return std::visit(
      overloaded{[&](const TwoDroplets& t) {
                   return interpolate_nodal(mesh, [&](std::span<const double> x) { return two_droplet_ic(t.lambda, x); });
                 },
                 [&](const DropletArray& a) {
                   return interpolate_nodal(mesh, [&](std::span<const double> x) { return droplet_array_ic(a, x); });
                 },
                 [&](const Uniform& u) { return Vector(mesh.num_nodes(), u.value); },
                 [&](const RandomNoise& r) {
                   std::mt19937_64 rng(r.seed);
                   Vector v(mesh.num_nodes());
                   for (double& x : v) {
                     // Explicit mapping keeps the stream identical across standard libraries.
                     const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
                     x = r.mean + r.amplitude * (2.0 * u - 1.0);
                   }
                   return v;
                 }},
      ic);
}

}  // namespace microem

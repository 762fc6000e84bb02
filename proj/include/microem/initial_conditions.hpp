#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "microem/assembly.hpp"

namespace microem {

/// Two tanh droplets in (0,32)^2 centred at (7,7) radius 3 and (20,20) radius 6.
struct TwoDroplets {
  double lambda = 0.5;
};

struct Droplet {
  std::array<double, 3> center{0.0, 0.0, 0.0};
  double radius = 1.0;
  int phase = 1;  // -1 oil-rich, +1 water-rich
};

/// Balls of phase +-1 in a phi = 0 background, each with a tanh profile of width sqrt(2 lambda).
struct DropletArray {
  std::vector<Droplet> droplets;
  double lambda = 0.1;
};

struct Uniform {
  double value = 0.0;
};

/// Independent uniform noise in [mean - amplitude, mean + amplitude] per node.
struct RandomNoise {
  double mean = 0.0;
  double amplitude = 0.1;
  std::uint64_t seed = 0;
};

using IcPreset = std::variant<TwoDroplets, DropletArray, Uniform, RandomNoise>;

std::string preset_name(const IcPreset& ic);

/// Throws std::invalid_argument on a non-positive radius, phase outside
/// {-1, +1}, or a non-positive lambda.
void validate(const IcPreset& ic);

double two_droplet_ic(double lambda, std::span<const double> x);
double droplet_array_ic(const DropletArray& spec, std::span<const double> x);

/// Nodal initial phi. The random preset draws one value per node in node order
/// from a seeded mt19937_64, so it is only defined on a mesh.
Vector initial_phi(const IcPreset& ic, const StructuredMesh& mesh);

}  // namespace microem

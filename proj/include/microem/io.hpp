#pragma once

#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "microem/assembly.hpp"
#include "microem/diagnostics.hpp"

namespace microem {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Legacy ASCII VTK unstructured grid with point scalars phi, mu, sigma
/// written to 17 significant digits. 2D points get z = 0.
void write_vtk(const StructuredMesh& mesh, const State& state, const std::string& path);

/// What the structural reader recovers from a legacy VTK file.
struct VtkData {
  std::vector<std::array<double, 3>> points;
  std::vector<std::vector<int>> cells;
  std::vector<int> cell_types;
  std::map<std::string, std::vector<double>> point_scalars;
};

/// Reads files in the subset written by write_vtk. Throws IoError on
/// inconsistent counts or malformed sections.
VtkData read_vtk(const std::string& path);

inline constexpr const char* kCsvHeader =
    "step,time,energy,mass,phi_min,phi_max,picard_iters,grad_mu_sq,energy_law_residual";

/// Shortest round-trip formatting for every real column.
void write_csv(const std::vector<StepRecord>& records, const std::string& path);
std::string format_csv(const std::vector<StepRecord>& records);
std::vector<StepRecord> read_csv(const std::string& path);

/// Creates the directory (and parents) if needed; throws IoError on failure.
void ensure_directory(const std::string& path);

}  // namespace microem

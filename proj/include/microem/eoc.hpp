#pragma once

#include <array>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "microem/stepper.hpp"

namespace microem {

enum class Field { phi = 0, mu = 1, sigma = 2 };
inline constexpr std::array<const char*, 3> kFieldNames{"phi", "mu", "sigma"};

/// Final-time errors of one ladder run against the reference, per field.
struct FieldErrors {
  std::array<double, 3> e2{};  // L2
  std::array<double, 3> e1{};  // H1
};

struct EocRow {
  double dt = 0.0;
  FieldErrors errors;
  /// Rates against the previous (coarser) row; absent on the first row or
  /// when either error is zero.
  std::array<std::optional<double>, 3> r2{};
  std::array<std::optional<double>, 3> r1{};
};

struct EocReport {
  std::vector<EocRow> rows;
  double dt_reference = 0.0;
  double t_end = 0.0;
  std::string mesh;
  ModelParams params;

  void write_table(std::ostream& os) const;
  /// Columns dt,field,e2,r2,e1,r1; absent rates are empty cells.
  void write_csv(std::ostream& os) const;
};

/// A run in the study failed; names the offending time step.
class EocFailure : public std::runtime_error {
 public:
  EocFailure(double dt, const std::string& what, bool non_convergence)
      : std::runtime_error(what), dt_(dt), non_convergence_(non_convergence) {}
  double dt() const { return dt_; }
  bool non_convergence() const { return non_convergence_; }

 private:
  double dt_;
  bool non_convergence_;
};

/// log(e / e_hat) / log(dt / dt_hat); nullopt when either error is zero.
std::optional<double> eoc_rate(double e, double e_hat, double dt, double dt_hat);

/// Builds the report rows and rates from precomputed errors, one entry per ladder step.
EocReport compute_rates(const std::vector<double>& ladder, const std::vector<FieldErrors>& errors);

/// Runs a configuration to t_end and returns the final state.
using EocRunner = std::function<State(const RunConfig&)>;

/// Default runner: a plain time loop that throws StepFailure/SolverFailure on failure.
State run_to_end(const RunConfig& cfg);

/// Throws std::invalid_argument unless the ladder is strictly decreasing,
/// dt_reference is below its minimum, and every step divides t_end.
void validate_eoc(const RunConfig& base, const std::vector<double>& ladder, double dt_reference);

/// Reference run at dt_reference, then every ladder entry on the same mesh and
/// parameters. Errors are nodal differences at t_end measured in L2 and H1.
EocReport run_eoc_study(const RunConfig& base, const std::vector<double>& ladder, double dt_reference,
                        const EocRunner& runner = run_to_end);

}  // namespace microem

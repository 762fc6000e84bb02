#pragma once

#include <array>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "microem/assembly.hpp"
#include "microem/diagnostics.hpp"
#include "microem/initial_conditions.hpp"
#include "microem/linear_solver.hpp"

namespace microem {

struct PicardSettings {
  double tol = 1e-7;
  int max_iter = 50;
  /// Start from 2 u^n - u^{n-1} instead of u^n when a previous level exists.
  bool extrapolate = false;
};

struct MeshSpec {
  Box box = Box::rect(0.0, 1.0, 0.0, 1.0);
  std::array<int, 3> divisions{16, 16, 0};

  StructuredMesh build() const;
};

struct OutputSettings {
  std::string directory = "output";
  /// 0 writes only the initial and final snapshots.
  int snapshot_every = 0;
  std::string csv_path = "records.csv";
};

struct RunConfig {
  MeshSpec mesh;
  ModelParams params;
  double dt = 1e-5;
  double t_end = 1e-4;
  PicardSettings picard;
  SolverOptions solver;
  IcPreset ic = Uniform{0.0};
  OutputSettings output;
  int threads = 1;
};

/// Throws std::invalid_argument for dt <= 0, t_end < dt, or invalid Picard settings.
void validate(const RunConfig& cfg);

/// Number of steps needed to reach t_end: ceil(t_end / dt), treating ratios
/// within 1e-9 of an integer as exact.
long step_count(double t_end, double dt);

/// A time step that could not be completed. Carries the Picard increment history.
class StepFailure : public std::runtime_error {
 public:
  StepFailure(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

 private:
  std::vector<double> history_;
};

class NonConvergence : public StepFailure {
 public:
  using StepFailure::StepFailure;
};

class NumericalBreakdown : public StepFailure {
 public:
  using StepFailure::StepFailure;
};

struct PicardResult {
  State state;
  int iterations = 0;
  /// Relative combined L2 increment after each iteration.
  std::vector<double> history;
};

/// One time step of the fixed-point iteration. Iterates until
///   ||u^{l+1} - u^l|| / ||u^{l+1}|| <= tol
/// where ||(phi, mu, sigma)||^2 = ||phi||^2 + ||mu||^2 + ||sigma||^2 in L2.
/// Throws NonConvergence at max_iter, NumericalBreakdown on non-finite
/// iterates, and passes SolverFailure through. The accepted state has
/// step = state_n.step + 1 and time = step * dt.
PicardResult picard_step(const P1Space& space, LinearSolver& solver, const ModelParams& p, const State& state_n,
                         double dt, const PicardSettings& settings, const State* previous = nullptr);

struct DtSafety {
  double bound = 0.0;
  bool warn = false;
  std::string message;
};

/// Compares dt with the uniqueness bound of the linearized step; a warning,
/// never an error.
DtSafety check_dt_safety(const RunConfig& cfg);

/// Owns the discretization for one configuration.
class Simulation {
 public:
  explicit Simulation(RunConfig cfg);

  const RunConfig& config() const { return cfg_; }
  const P1Space& space() const { return space_; }
  State initial_state() const;
  PicardResult step(const State& current, const State* previous = nullptr);

 private:
  RunConfig cfg_;
  P1Space space_;
  LinearSolver solver_;
};

struct RunSinks {
  std::function<void(const StepRecord&)> on_record;
  std::function<void(const StructuredMesh&, const State&)> on_snapshot;
  std::function<void(const DtSafety&)> on_warning;
};

enum class FailureKind { none, non_convergence, breakdown, solver };

struct RunResult {
  State final_state;
  std::vector<StepRecord> records;
  double initial_energy = 0.0;
  double initial_mass = 0.0;
  DtSafety safety;
  /// Set when a step failed; records then hold the completed prefix.
  std::optional<std::string> failure;
  FailureKind failure_kind = FailureKind::none;
  std::vector<double> failure_history;

  bool completed() const { return !failure.has_value(); }
};

RunResult run_simulation(const RunConfig& cfg, const RunSinks& sinks = {});

}  // namespace microem

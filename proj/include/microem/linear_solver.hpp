#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>

#include "microem/sparse.hpp"

namespace microem {

/// Singular matrix, zero ILU pivot, or an unmet residual target.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SolverBackend { direct_lu, gmres_ilu0 };

struct SolverOptions {
  SolverBackend backend = SolverBackend::direct_lu;
  /// Relative residual target ||Ax-b|| / ||b||.
  double direct_tol = 1e-12;
  double gmres_tol = 1e-10;
  int gmres_restart = 80;
  int gmres_max_iter = 5000;
  /// Direct backend: first try refinement against the factors of the previous
  /// matrix (same pattern) and refactor only if that does not reach direct_tol.
  bool reuse_factorization = true;
  int reuse_max_sweeps = 10;
  int reuse_refactor_sweeps = 5;  // more sweeps than this: refactor on the next solve
};

struct SolveReport {
  double relative_residual = 0.0;
  int iterations = 0;  // refinement sweeps (direct) or Krylov iterations (GMRES)
  bool reused = false;  // direct: solved with factors of an earlier matrix
};

/// Reusable solver. The direct backend (UMFPACK when available, otherwise
/// Eigen's SparseLU) keeps the symbolic analysis while successive matrices
/// share a sparsity pattern, and with reuse_factorization also the numeric
/// factors until refinement against them stops converging. Either way the
/// returned x satisfies ||b - A x|| <= direct_tol ||b||.
class LinearSolver {
 public:
  explicit LinearSolver(SolverOptions options = {});
  ~LinearSolver();
  LinearSolver(LinearSolver&&) noexcept;
  LinearSolver& operator=(LinearSolver&&) noexcept;

  Vector solve(const CsrMatrix& a, std::span<const double> b, SolveReport* report = nullptr);

  const SolverOptions& options() const { return options_; }
  /// Numeric factorizations performed so far (direct backend).
  long factorizations() const;

 private:
  struct Impl;
  SolverOptions options_;
  std::unique_ptr<Impl> impl_;
};

Vector solve_linear(const CsrMatrix& a, std::span<const double> b, const SolverOptions& options = {});

std::string to_string(SolverBackend backend);
SolverBackend solver_backend_from_string(const std::string& name);

}  // namespace microem

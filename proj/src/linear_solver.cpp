#include "microem/linear_solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#ifdef MICROEM_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif
#include <algorithm>
#include <cmath>
#include <sstream>

namespace microem {
namespace {

using ColMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using RowMap = Eigen::Map<const Eigen::SparseMatrix<double, Eigen::RowMajor, int>>;

double relative_residual(const CsrMatrix& a, std::span<const double> x, std::span<const double> b,
                         Vector& r) {
  spmv_into(a, x, r);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  const double bn = norm2(b);
  return bn > 0.0 ? norm2(r) / bn : norm2(r);
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// ILU(0): incomplete LU restricted to the pattern of A, stored in place
// (unit lower factor below the diagonal, upper factor on and above it).
class Ilu0 {
 public:
  explicit Ilu0(const CsrMatrix& a) : lu_(a), diag_(static_cast<std::size_t>(a.rows()), -1) {
    const int n = a.rows();
    const auto& off = lu_.offsets();
    const auto& idx = lu_.indices();
    auto& val = lu_.values();
    for (int i = 0; i < n; ++i) {
      for (int k = off[i]; k < off[i + 1]; ++k) {
        if (idx[k] == i) diag_[i] = k;
      }
      if (diag_[i] < 0) throw SolverFailure("ILU(0): missing diagonal entry in row " + std::to_string(i));
    }
    std::vector<int> where(static_cast<std::size_t>(n), -1);
    for (int i = 0; i < n; ++i) {
      for (int k = off[i]; k < off[i + 1]; ++k) where[idx[k]] = k;
      for (int k = off[i]; k < off[i + 1] && idx[k] < i; ++k) {
        const int row = idx[k];
        const double pivot = val[diag_[row]];
        if (pivot == 0.0 || !std::isfinite(pivot)) {
          throw SolverFailure("ILU(0): zero pivot at row " + std::to_string(row));
        }
        val[k] /= pivot;
        for (int kk = diag_[row] + 1; kk < off[row + 1]; ++kk) {
          const int pos = where[idx[kk]];
          if (pos >= 0) val[pos] -= val[k] * val[kk];
        }
      }
      for (int k = off[i]; k < off[i + 1]; ++k) where[idx[k]] = -1;
      if (val[diag_[i]] == 0.0) throw SolverFailure("ILU(0): zero pivot at row " + std::to_string(i));
    }
  }

  void apply(std::span<const double> r, std::span<double> z) const {
    const int n = lu_.rows();
    const auto& off = lu_.offsets();
    const auto& idx = lu_.indices();
    const auto& val = lu_.values();
    for (int i = 0; i < n; ++i) {
      double s = r[i];
      for (int k = off[i]; k < diag_[i]; ++k) s -= val[k] * z[idx[k]];
      z[i] = s;
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = z[i];
      for (int k = diag_[i] + 1; k < off[i + 1]; ++k) s -= val[k] * z[idx[k]];
      z[i] = s / val[diag_[i]];
    }
  }

 private:
  CsrMatrix lu_;
  std::vector<int> diag_;
};

// Right-preconditioned restarted GMRES with modified Gram-Schmidt.
Vector gmres(const CsrMatrix& a, std::span<const double> b, const SolverOptions& opt, SolveReport& rep) {
  const auto n = static_cast<std::size_t>(a.rows());
  const Ilu0 prec(a);
  const int m = std::max(1, opt.gmres_restart);
  const double bnorm = norm2(b);
  Vector x(n, 0.0);
  if (bnorm == 0.0) return x;

  std::vector<Vector> v(static_cast<std::size_t>(m) + 1, Vector(n));
  std::vector<Vector> h(static_cast<std::size_t>(m) + 1, Vector(static_cast<std::size_t>(m), 0.0));
  Vector cs(static_cast<std::size_t>(m)), sn(static_cast<std::size_t>(m)), g(static_cast<std::size_t>(m) + 1);
  Vector r(n), z(n), w(n);

  int total = 0;
  double rel = relative_residual(a, x, b, r);
  while (rel > opt.gmres_tol && total < opt.gmres_max_iter) {
    const double beta = norm2(r);
    for (std::size_t i = 0; i < n; ++i) v[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;

    int j = 0;
    for (; j < m && total < opt.gmres_max_iter; ++j, ++total) {
      prec.apply(v[j], z);
      spmv_into(a, z, w);
      for (int i = 0; i <= j; ++i) {
        h[i][j] = dot(w, v[i]);
        for (std::size_t k = 0; k < n; ++k) w[k] -= h[i][j] * v[i][k];
      }
      h[j + 1][j] = norm2(w);
      if (h[j + 1][j] != 0.0) {
        for (std::size_t k = 0; k < n; ++k) v[j + 1][k] = w[k] / h[j + 1][j];
      }
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
        h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
        h[i][j] = t;
      }
      const double denom = std::hypot(h[j][j], h[j + 1][j]);
      cs[j] = denom == 0.0 ? 1.0 : h[j][j] / denom;
      sn[j] = denom == 0.0 ? 0.0 : h[j + 1][j] / denom;
      h[j][j] = cs[j] * h[j][j] + sn[j] * h[j + 1][j];
      h[j + 1][j] = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      if (std::abs(g[j + 1]) <= 0.5 * opt.gmres_tol * bnorm || h[j][j] == 0.0) {
        ++j;
        ++total;
        break;
      }
    }

    // Back substitution for the Krylov coefficients, then x += M^{-1} V y.
    Vector y(static_cast<std::size_t>(j), 0.0);
    for (int i = j - 1; i >= 0; --i) {
      double s = g[i];
      for (int k = i + 1; k < j; ++k) s -= h[i][k] * y[k];
      y[i] = h[i][i] != 0.0 ? s / h[i][i] : 0.0;
    }
    std::fill(w.begin(), w.end(), 0.0);
    for (int i = 0; i < j; ++i) {
      for (std::size_t k = 0; k < n; ++k) w[k] += y[i] * v[i][k];
    }
    prec.apply(w, z);
    for (std::size_t k = 0; k < n; ++k) x[k] += z[k];
    rel = relative_residual(a, x, b, r);
    if (!all_finite(x)) throw SolverFailure("GMRES produced non-finite iterate");
  }
  rep.iterations = total;
  rep.relative_residual = rel;
  if (rel > opt.gmres_tol) {
    std::ostringstream msg;
    msg << "GMRES(" << m << ") stalled at relative residual " << rel << " after " << total << " iterations";
    throw SolverFailure(msg.str());
  }
  return x;
}

}  // namespace

#ifdef MICROEM_HAVE_UMFPACK
using DirectLu = Eigen::UmfPackLU<ColMatrix>;
#else
using DirectLu = Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>>;
#endif

struct LinearSolver::Impl {
  DirectLu lu;
  ColMatrix matrix;  // the factorized matrix
  std::vector<int> offsets;
  std::vector<int> indices;
  bool analyzed = false;
  bool factorized = false;
  bool aged = false;  // last reuse needed many sweeps; refactor next time
  long factorizations = 0;

  void factorize(const CsrMatrix& a) {
    const RowMap view(a.rows(), a.cols(), static_cast<Eigen::Index>(a.nnz()), a.offsets().data(),
                      a.indices().data(), a.values().data());
    matrix = view;
    const bool same = analyzed && offsets == a.offsets() && indices == a.indices();
    if (!same) {
      lu.analyzePattern(matrix);
      offsets = a.offsets();
      indices = a.indices();
      analyzed = lu.info() == Eigen::Success;
    }
    lu.factorize(matrix);
    factorized = lu.info() == Eigen::Success;
    ++factorizations;
    if (!factorized) {
      analyzed = false;
#ifdef MICROEM_HAVE_UMFPACK
      throw SolverFailure("sparse LU failed (UMFPACK status " + std::to_string(static_cast<int>(lu.info())) +
                          "; matrix singular?)");
#else
      throw SolverFailure("sparse LU failed: " + lu.lastErrorMessage());
#endif
    }
  }

  void apply(std::span<const double> r, Vector& out) const {
    const Eigen::Map<const Eigen::VectorXd> rhs(r.data(), static_cast<Eigen::Index>(r.size()));
    const Eigen::VectorXd sol = lu.solve(rhs);
    out.assign(sol.data(), sol.data() + sol.size());
  }

  // x += LU^{-1} (b - A x) until the target is met. Stops early once a sweep
  // fails to halve the residual.
  double refine(const CsrMatrix& a, std::span<const double> b, Vector& x, Vector& r, double rel, double target,
                int max_sweeps, int& sweeps) const {
    Vector dx;
    while (rel > target && sweeps < max_sweeps) {
      apply(r, dx);
      for (std::size_t i = 0; i < x.size(); ++i) x[i] += dx[i];
      const double next = relative_residual(a, x, b, r);
      ++sweeps;
      if (!std::isfinite(next)) return next;
      const bool stalled = next > 0.5 * rel;
      rel = next;
      if (stalled) break;
    }
    return rel;
  }
};

LinearSolver::LinearSolver(SolverOptions options) : options_(options), impl_(std::make_unique<Impl>()) {}
LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

long LinearSolver::factorizations() const { return impl_->factorizations; }

Vector LinearSolver::solve(const CsrMatrix& a, std::span<const double> b, SolveReport* report) {
  if (a.rows() != a.cols()) throw std::invalid_argument("solve: matrix is not square");
  if (b.size() != static_cast<std::size_t>(a.rows())) throw std::invalid_argument("solve: rhs length mismatch");

  SolveReport local;
  SolveReport& rep = report ? *report : local;
  rep = {};
  if (options_.backend == SolverBackend::gmres_ilu0) return gmres(a, b, options_, rep);

  Impl& s = *impl_;
  const double target = options_.direct_tol;
  Vector x(b.size(), 0.0);
  Vector r(b.begin(), b.end());
  double rel = relative_residual(a, x, b, r);
  int sweeps = 0;

  // Factors of an earlier matrix with the same pattern act as a preconditioner
  // for the refinement; successive Picard matrices are close to each other.
  // Refinement runs to the rounding floor: the tolerance is relative to the
  // whole right-hand side, whose Mm/dt rows dwarf the others, so stopping at
  // the target leaves the small rows poorly resolved.
  // Each sweep costs a pair of triangular solves, so once the factors have
  // drifted far enough to need many of them a fresh factorization is cheaper.
  const bool stale = s.factorized && !s.aged && options_.reuse_factorization && s.offsets == a.offsets() &&
                     s.indices == a.indices();
  if (stale) {
    rel = s.refine(a, b, x, r, rel, 0.0, options_.reuse_max_sweeps, sweeps);
    rep.reused = rel <= target && all_finite(x);
    s.aged = sweeps > options_.reuse_refactor_sweeps;
  }
  if (!rep.reused) {
    s.factorize(a);
    s.aged = false;
    std::fill(x.begin(), x.end(), 0.0);
    r.assign(b.begin(), b.end());
    rel = relative_residual(a, x, b, r);
    sweeps = 0;
    // One solve plus up to four refinement sweeps.
    rel = s.refine(a, b, x, r, rel, target, 5, sweeps);
    if (!all_finite(x)) throw SolverFailure("sparse LU produced a non-finite solution (numerically singular?)");
  }
  rep.iterations = sweeps;
  rep.relative_residual = rel;
  if (!(rel <= target)) {
    std::ostringstream msg;
    msg << "sparse LU residual " << rel << " above target " << target << " after " << sweeps
        << " refinement sweeps (ill-conditioned system)";
    throw SolverFailure(msg.str());
  }
  return x;
}

Vector solve_linear(const CsrMatrix& a, std::span<const double> b, const SolverOptions& options) {
  LinearSolver solver(options);
  return solver.solve(a, b);
}

std::string to_string(SolverBackend backend) {
  return backend == SolverBackend::direct_lu ? "direct" : "gmres";
}

SolverBackend solver_backend_from_string(const std::string& name) {
  if (name == "direct") return SolverBackend::direct_lu;
  if (name == "gmres") return SolverBackend::gmres_ilu0;
  throw std::invalid_argument("unknown linear solver backend '" + name + "' (expected direct or gmres)");
}

}  // namespace microem

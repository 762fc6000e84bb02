#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "microem/linear_solver.hpp"
#include "microem/mesh.hpp"
#include "microem/model.hpp"
#include "microem/quadrature.hpp"
#include "microem/sparse.hpp"

namespace microem {

/// Nodal coefficients of (phi, mu, sigma) at one time level.
struct State {
  Vector phi;
  Vector mu;
  Vector sigma;
  double time = 0.0;
  long step = 0;
};

/// Values at quadrature points, element-major: entry e * rule.size() + q.
using QpField = std::vector<double>;

using AnalyticField = std::function<double(std::span<const double>)>;

/// Continuous P1 space on a mesh together with the quadrature rule used for
/// every integral. Caches element geometry, the shared sparsity pattern, and
/// the unit mass and stiffness matrices.
///
/// Element contributions may be computed on several threads; they are always
/// added into the global arrays sequentially in element order, so results are
/// bitwise independent of the thread count.
class P1Space {
 public:
  P1Space(StructuredMesh mesh, QuadratureRule rule, int threads = 1);

  const StructuredMesh& mesh() const { return mesh_; }
  const QuadratureRule& rule() const { return rule_; }
  std::size_t num_nodes() const { return mesh_.num_nodes(); }
  std::size_t num_elements() const { return mesh_.num_elements(); }
  std::size_t num_qp() const { return rule_.size(); }
  int threads() const { return threads_; }

  const ElementGeometry& geometry(std::size_t e) const { return geometry_[e]; }
  double domain_measure() const { return domain_measure_; }

  const CsrMatrix& mass() const { return mass_; }
  const CsrMatrix& stiffness() const { return stiffness_; }

  /// P1 field evaluated at every quadrature point.
  QpField at_quadrature(std::span<const double> nodal) const;
  /// |grad u|^2 per element (constant on each simplex for P1).
  std::vector<double> grad_sq(std::span<const double> nodal) const;

  /// (c phi_j, phi_i) with c given per quadrature point; empty c means c = 1.
  CsrMatrix weighted_mass(std::span<const double> qp_weight) const;
  /// (c grad phi_j, grad phi_i) with c given per quadrature point; empty c means c = 1.
  CsrMatrix weighted_stiffness(std::span<const double> qp_weight) const;
  /// (f, phi_i) with f given per quadrature point.
  Vector load(std::span<const double> qp_values) const;

 private:
  template <class Kernel>
  CsrMatrix assemble_matrix(Kernel&& kernel) const;

  StructuredMesh mesh_;
  QuadratureRule rule_;
  int threads_ = 1;
  std::vector<ElementGeometry> geometry_;
  std::vector<double> jacobian_;  // |det J| = measure * dim!
  double domain_measure_ = 0.0;
  CsrMatrix pattern_;
  std::vector<int> scatter_;  // (e, a, b) -> index into pattern values
  CsrMatrix mass_;
  CsrMatrix stiffness_;
};

CsrMatrix mass_matrix(const P1Space& space);
CsrMatrix stiffness_matrix(const P1Space& space, std::span<const double> qp_weight = {});
CsrMatrix weighted_mass(const P1Space& space, std::span<const double> qp_weight);

Vector interpolate_nodal(const StructuredMesh& mesh, const AnalyticField& field);

/// Elliptic projection R: (grad R, grad v) = (grad f, grad v) for every P1 v,
/// with int R = int f. Only point values of f are needed.
Vector ritz_projection(const P1Space& space, const AnalyticField& field);

/// Given nodal phi0, sigma0 and mu0 are the weak solutions of
///   (sigma0, s) = (grad phi0, grad s)
///   (mu0, m)    = beta (f0'(phi0), m) + 1/2 (g'(phi0) |grad phi0|^2, m)
///                 + (g(phi0) grad phi0, grad m) + lambda (grad sigma0, grad m).
State project_initial(const P1Space& space, const ModelParams& p, Vector phi0_nodal);
/// Same with phi0 the elliptic projection of an analytic field. For phi0 with
/// vanishing normal derivative sigma0 is then the L2 projection of -lap phi0,
/// which converges at second order even at mesh corners, where the nodal
/// interpolant only gives O(1) local errors.
State project_initial(const P1Space& space, const ModelParams& p, const AnalyticField& phi0);

/// Linear system of one Picard iteration for u = (phi, mu, sigma)^{l+1},
/// with phi^{l+1/2} := (phi^{l+1} + phi^n) / 2 in the linear terms and
/// g'(phi^{l+1/2}) = g2 (phi^{l+1} + phi^n). Block rows are tested with
/// (mu-bar, phi-bar, sigma-bar):
///   Mm/dt phi + M/2 K mu                        = Mm/dt phi^n - M/2 K mu^n
///   (W + Kg/2) phi - Mm/2 mu + lambda/2 K sigma = -b_f - (W + Kg/2) phi^n
///                                                 - lambda/2 K sigma^n + Mm/2 mu^n
///   -K phi + Mm sigma                           = 0
/// where Kg is the stiffness weighted by (g(phi^l) + g(phi^n)) / 2, W the mass
/// weighted by g2/4 (|grad phi^l|^2 + |grad phi^n|^2), and b_f the load of
/// beta * f0_secant(phi^l, phi^n).
struct PicardSystem {
  CsrMatrix matrix;
  Vector rhs;
};
PicardSystem assemble_picard_system(const P1Space& space, const ModelParams& p, const State& state_n,
                                    std::span<const double> phi_l, double dt);

/// The three equations of the fully discrete nonlinear scheme moved to one
/// side. All vanish iff state_np1 solves the scheme from state_n.
struct SchemeResidual {
  Vector r_mu;
  Vector r_phi;
  Vector r_sigma;

  double sup_norm() const;
};
SchemeResidual nonlinear_residual(const P1Space& space, const ModelParams& p, const State& state_np1,
                                  const State& state_n, double dt);

/// Quadrature-exact E(phi, sigma) = int beta f0(phi) + g(phi)/2 |grad phi|^2 + lambda/2 sigma^2.
double total_energy(const P1Space& space, const ModelParams& p, std::span<const double> phi,
                    std::span<const double> sigma);

double mass_integral(const CsrMatrix& mass, std::span<const double> phi);
double l2_norm(const CsrMatrix& mass, std::span<const double> v);
double h1_norm(const CsrMatrix& mass, const CsrMatrix& stiffness, std::span<const double> v);

}  // namespace microem

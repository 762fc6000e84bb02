#include "microem/assembly.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>

namespace microem {
namespace {

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// Runs fn(begin, end) over [0, n) split into contiguous chunks.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || n < 2048) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t begin = 0; begin < n; begin += chunk) {
    pool.emplace_back([&fn, begin, end = std::min(n, begin + chunk)] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

double grad_dot(const ElementGeometry& g, int a, int b, int dim) {
  double s = 0.0;
  for (int d = 0; d < dim; ++d) s += g.grads[a][d] * g.grads[b][d];
  return s;
}

void check_length(std::span<const double> v, std::size_t n, const char* what) {
  if (v.size() != n) {
    throw std::invalid_argument(std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                                std::to_string(v.size()));
  }
}

}  // namespace

P1Space::P1Space(StructuredMesh mesh, QuadratureRule rule, int threads)
    : mesh_(std::move(mesh)), rule_(std::move(rule)), threads_(std::max(1, threads)) {
  if (rule_.dim != mesh_.dim()) throw std::invalid_argument("quadrature rule dimension does not match mesh");
  const std::size_t ne = mesh_.num_elements();
  const int npe = mesh_.nodes_per_element();
  const double dfact = factorial(mesh_.dim());

  geometry_.resize(ne);
  jacobian_.resize(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    geometry_[e] = element_geometry(mesh_, e);
    jacobian_[e] = geometry_[e].measure * dfact;
    domain_measure_ += geometry_[e].measure;
  }

  // Pattern from element connectivity; each triplet carries its slot id so the
  // element-to-CSR scatter map can be recovered after assembly.
  std::vector<Triplet> triplets;
  triplets.reserve(ne * static_cast<std::size_t>(npe * npe));
  for (std::size_t e = 0; e < ne; ++e) {
    const auto conn = mesh_.element(e);
    for (int a = 0; a < npe; ++a) {
      for (int b = 0; b < npe; ++b) triplets.push_back({conn[a], conn[b], 0.0});
    }
  }
  const int n = static_cast<int>(mesh_.num_nodes());
  pattern_ = assemble_csr(triplets, n, n);

  scatter_.resize(triplets.size());
  const auto& off = pattern_.offsets();
  const auto& idx = pattern_.indices();
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const auto first = idx.begin() + off[triplets[k].row];
    const auto last = idx.begin() + off[triplets[k].row + 1];
    scatter_[k] = static_cast<int>(std::lower_bound(first, last, triplets[k].col) - idx.begin());
  }

  mass_ = weighted_mass({});
  stiffness_ = weighted_stiffness({});
}

template <class Kernel>
CsrMatrix P1Space::assemble_matrix(Kernel&& kernel) const {
  const std::size_t ne = num_elements();
  const auto block = static_cast<std::size_t>(mesh_.nodes_per_element() * mesh_.nodes_per_element());
  std::vector<double> local(ne * block, 0.0);
  parallel_for(ne, threads_, [&](std::size_t begin, std::size_t end) {
    for (std::size_t e = begin; e < end; ++e) kernel(e, std::span<double>(local.data() + e * block, block));
  });
  CsrMatrix out = pattern_;
  auto& values = out.values();
  std::fill(values.begin(), values.end(), 0.0);
  for (std::size_t k = 0; k < local.size(); ++k) values[static_cast<std::size_t>(scatter_[k])] += local[k];
  return out;
}

CsrMatrix P1Space::weighted_mass(std::span<const double> qp_weight) const {
  const std::size_t nq = num_qp();
  if (!qp_weight.empty()) check_length(qp_weight, num_elements() * nq, "weighted_mass weight");
  const int npe = mesh_.nodes_per_element();
  return assemble_matrix([&](std::size_t e, std::span<double> local) {
    for (std::size_t q = 0; q < nq; ++q) {
      const auto& lam = rule_.points[q];
      double w = rule_.weights[q] * jacobian_[e];
      if (!qp_weight.empty()) w *= qp_weight[e * nq + q];
      for (int a = 0; a < npe; ++a) {
        for (int b = 0; b < npe; ++b) local[a * npe + b] += w * lam[a] * lam[b];
      }
    }
  });
}

CsrMatrix P1Space::weighted_stiffness(std::span<const double> qp_weight) const {
  const std::size_t nq = num_qp();
  if (!qp_weight.empty()) check_length(qp_weight, num_elements() * nq, "stiffness weight");
  const int npe = mesh_.nodes_per_element();
  const int dim = mesh_.dim();
  return assemble_matrix([&](std::size_t e, std::span<double> local) {
    double integral = 0.0;
    for (std::size_t q = 0; q < nq; ++q) {
      integral += rule_.weights[q] * (qp_weight.empty() ? 1.0 : qp_weight[e * nq + q]);
    }
    integral *= jacobian_[e];
    const auto& geo = geometry_[e];
    for (int a = 0; a < npe; ++a) {
      for (int b = 0; b < npe; ++b) local[a * npe + b] = integral * grad_dot(geo, a, b, dim);
    }
  });
}

Vector P1Space::load(std::span<const double> qp_values) const {
  const std::size_t nq = num_qp();
  check_length(qp_values, num_elements() * nq, "load integrand");
  const int npe = mesh_.nodes_per_element();
  Vector b(num_nodes(), 0.0);
  for (std::size_t e = 0; e < num_elements(); ++e) {
    const auto conn = mesh_.element(e);
    for (std::size_t q = 0; q < nq; ++q) {
      const double w = rule_.weights[q] * jacobian_[e] * qp_values[e * nq + q];
      for (int a = 0; a < npe; ++a) b[static_cast<std::size_t>(conn[a])] += w * rule_.points[q][a];
    }
  }
  return b;
}

QpField P1Space::at_quadrature(std::span<const double> nodal) const {
  check_length(nodal, num_nodes(), "nodal field");
  const std::size_t nq = num_qp();
  const int npe = mesh_.nodes_per_element();
  QpField out(num_elements() * nq);
  for (std::size_t e = 0; e < num_elements(); ++e) {
    const auto conn = mesh_.element(e);
    for (std::size_t q = 0; q < nq; ++q) {
      double v = 0.0;
      for (int a = 0; a < npe; ++a) v += rule_.points[q][a] * nodal[static_cast<std::size_t>(conn[a])];
      out[e * nq + q] = v;
    }
  }
  return out;
}

std::vector<double> P1Space::grad_sq(std::span<const double> nodal) const {
  check_length(nodal, num_nodes(), "nodal field");
  const int dim = mesh_.dim();
  const int npe = mesh_.nodes_per_element();
  std::vector<double> out(num_elements());
  for (std::size_t e = 0; e < num_elements(); ++e) {
    const auto conn = mesh_.element(e);
    std::array<double, 3> grad{};
    for (int a = 0; a < npe; ++a) {
      const double u = nodal[static_cast<std::size_t>(conn[a])];
      for (int d = 0; d < dim; ++d) grad[d] += u * geometry_[e].grads[a][d];
    }
    out[e] = grad[0] * grad[0] + grad[1] * grad[1] + grad[2] * grad[2];
  }
  return out;
}

CsrMatrix mass_matrix(const P1Space& space) { return space.mass(); }

CsrMatrix stiffness_matrix(const P1Space& space, std::span<const double> qp_weight) {
  return qp_weight.empty() ? space.stiffness() : space.weighted_stiffness(qp_weight);
}

CsrMatrix weighted_mass(const P1Space& space, std::span<const double> qp_weight) {
  return space.weighted_mass(qp_weight);
}

Vector interpolate_nodal(const StructuredMesh& mesh, const AnalyticField& field) {
  Vector v(mesh.num_nodes());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = field(mesh.node(i));
  return v;
}

namespace {

// Gauss-Legendre on [0, 1], exact to degree 7.
constexpr std::array<double, 4> kEdgeNodes{0.0694318442029737, 0.3300094782075719, 0.6699905217924281,
                                           0.9305681557970263};
constexpr std::array<double, 4> kEdgeWeights{0.1739274225687269, 0.3260725774312731, 0.3260725774312731,
                                             0.1739274225687269};

// Mean of the field over the facet of element `conn` opposite vertex `skip`.
double facet_mean(const StructuredMesh& mesh, std::span<const int> conn, int skip, const AnalyticField& field) {
  const int dim = mesh.dim();
  std::array<std::span<const double>, 3> v{};
  int m = 0;
  for (int a = 0; a <= dim; ++a) {
    if (a != skip) v[m++] = mesh.node(static_cast<std::size_t>(conn[a]));
  }
  std::array<double, 3> x{};
  double sum = 0.0;
  if (dim == 2) {
    for (std::size_t q = 0; q < kEdgeNodes.size(); ++q) {
      for (int d = 0; d < 2; ++d) x[d] = (1.0 - kEdgeNodes[q]) * v[0][d] + kEdgeNodes[q] * v[1][d];
      sum += kEdgeWeights[q] * field(std::span<const double>(x.data(), 2));
    }
    return sum;
  }
  const QuadratureRule& rule = rule_simplex(2, 6);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    for (int d = 0; d < 3; ++d) {
      x[d] = rule.points[q][0] * v[0][d] + rule.points[q][1] * v[1][d] + rule.points[q][2] * v[2][d];
    }
    sum += rule.weights[q] * field(std::span<const double>(x.data(), 3));
  }
  return 2.0 * sum;
}

}  // namespace

Vector ritz_projection(const P1Space& space, const AnalyticField& field) {
  const StructuredMesh& mesh = space.mesh();
  const QuadratureRule& rule = space.rule();
  const int dim = mesh.dim();
  const int npe = mesh.nodes_per_element();
  const double simplex_factor = dim == 2 ? 2.0 : 6.0;
  const std::size_t n = space.num_nodes();

  // (grad phi0, grad v) elementwise, with int_T grad phi0 from the divergence
  // theorem: the area normal of the facet opposite vertex a is -dim |T| grad lambda_a.
  Vector rhs(n, 0.0);
  double target_mass = 0.0;
  std::array<double, 3> x{};
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const auto conn = mesh.element(e);
    const auto& geo = space.geometry(e);
    std::array<double, 3> grad_int{};
    for (int a = 0; a < npe; ++a) {
      const double mean = facet_mean(mesh, conn, a, field);
      for (int d = 0; d < dim; ++d) grad_int[d] -= dim * geo.measure * geo.grads[a][d] * mean;
    }
    for (int a = 0; a < npe; ++a) {
      double s = 0.0;
      for (int d = 0; d < dim; ++d) s += geo.grads[a][d] * grad_int[d];
      rhs[static_cast<std::size_t>(conn[a])] += s;
    }
    for (std::size_t q = 0; q < rule.size(); ++q) {
      x.fill(0.0);
      for (int a = 0; a < npe; ++a) {
        const auto node = mesh.node(static_cast<std::size_t>(conn[a]));
        for (int d = 0; d < dim; ++d) x[d] += rule.points[q][a] * node[d];
      }
      target_mass += rule.weights[q] * simplex_factor * geo.measure *
                     field(std::span<const double>(x.data(), static_cast<std::size_t>(dim)));
    }
  }

  // Pin node 0 to remove the constant null space, then shift to the right mean.
  CsrMatrix k = space.stiffness();
  const auto& off = k.offsets();
  const auto& idx = k.indices();
  auto& val = k.values();
  for (int r = 0; r < k.rows(); ++r) {
    for (int j = off[r]; j < off[r + 1]; ++j) {
      if (r == 0 || idx[j] == 0) val[j] = idx[j] == r ? 1.0 : 0.0;
    }
  }
  rhs[0] = 0.0;
  LinearSolver solver;
  Vector r = solver.solve(k, rhs);
  const double shift = (target_mass - mass_integral(space.mass(), r)) / space.domain_measure();
  for (double& v : r) v += shift;
  return r;
}

State project_initial(const P1Space& space, const ModelParams& p, const AnalyticField& phi0) {
  return project_initial(space, p, ritz_projection(space, phi0));
}

State project_initial(const P1Space& space, const ModelParams& p, Vector phi0_nodal) {
  check_length(phi0_nodal, space.num_nodes(), "initial phi");
  State s;
  s.phi = std::move(phi0_nodal);
  LinearSolver solver;

  const Vector k_phi = spmv(space.stiffness(), s.phi);
  s.sigma = solver.solve(space.mass(), k_phi);

  const std::size_t nq = space.num_qp();
  const QpField phi_q = space.at_quadrature(s.phi);
  const std::vector<double> gsq = space.grad_sq(s.phi);
  QpField bulk(phi_q.size());
  QpField g_weight(phi_q.size());
  for (std::size_t k = 0; k < phi_q.size(); ++k) {
    const double gs = gsq[k / nq];
    bulk[k] = p.beta() * f0_prime(phi_q[k], p.h0()) + 0.5 * g_prime(phi_q[k], p.g2()) * gs;
    g_weight[k] = g(phi_q[k], p.g0(), p.g2());
  }
  Vector rhs = space.load(bulk);
  const Vector kg_phi = spmv(space.weighted_stiffness(g_weight), s.phi);
  const Vector k_sigma = spmv(space.stiffness(), s.sigma);
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += kg_phi[i] + p.lambda() * k_sigma[i];
  s.mu = solver.solve(space.mass(), rhs);
  return s;
}

PicardSystem assemble_picard_system(const P1Space& space, const ModelParams& p, const State& state_n,
                                    std::span<const double> phi_l, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  const std::size_t n = space.num_nodes();
  check_length(phi_l, n, "Picard iterate");
  check_length(state_n.phi, n, "phi^n");
  check_length(state_n.mu, n, "mu^n");
  check_length(state_n.sigma, n, "sigma^n");

  const std::size_t nq = space.num_qp();
  const QpField phil_q = space.at_quadrature(phi_l);
  const QpField phin_q = space.at_quadrature(state_n.phi);
  const std::vector<double> gsq_l = space.grad_sq(phi_l);
  const std::vector<double> gsq_n = space.grad_sq(state_n.phi);

  QpField g_avg(phil_q.size());
  QpField w_weight(phil_q.size());
  QpField secant(phil_q.size());
  for (std::size_t k = 0; k < phil_q.size(); ++k) {
    const std::size_t e = k / nq;
    g_avg[k] = 0.5 * (g(phil_q[k], p.g0(), p.g2()) + g(phin_q[k], p.g0(), p.g2()));
    w_weight[k] = 0.25 * p.g2() * (gsq_l[e] + gsq_n[e]);
    secant[k] = p.beta() * f0_secant(phil_q[k], phin_q[k], p.h0());
  }
  const CsrMatrix kg = space.weighted_stiffness(g_avg);
  const CsrMatrix w = space.weighted_mass(w_weight);
  const Vector b_f = space.load(secant);

  const CsrMatrix& mm = space.mass();
  const CsrMatrix& k = space.stiffness();
  const CsrMatrix a11 = linear_combination({{1.0 / dt, &mm}});
  const CsrMatrix a12 = linear_combination({{0.5 * p.mobility(), &k}});
  const CsrMatrix a21 = linear_combination({{1.0, &w}, {0.5, &kg}});
  const CsrMatrix a22 = linear_combination({{-0.5, &mm}});
  const CsrMatrix a23 = linear_combination({{0.5 * p.lambda(), &k}});
  const CsrMatrix a31 = linear_combination({{-1.0, &k}});

  PicardSystem sys;
  sys.matrix = block_compose({{&a11, &a12, nullptr}, {&a21, &a22, &a23}, {&a31, nullptr, &mm}});

  const Vector mm_phi = spmv(mm, state_n.phi);
  const Vector k_mu = spmv(k, state_n.mu);
  const Vector a21_phi = spmv(a21, state_n.phi);
  const Vector k_sigma = spmv(k, state_n.sigma);
  const Vector mm_mu = spmv(mm, state_n.mu);
  sys.rhs.assign(3 * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    sys.rhs[i] = mm_phi[i] / dt - 0.5 * p.mobility() * k_mu[i];
    sys.rhs[n + i] = -b_f[i] - a21_phi[i] - 0.5 * p.lambda() * k_sigma[i] + 0.5 * mm_mu[i];
  }
  return sys;
}

double SchemeResidual::sup_norm() const {
  return std::max({norm_inf(r_mu), norm_inf(r_phi), norm_inf(r_sigma)});
}

SchemeResidual nonlinear_residual(const P1Space& space, const ModelParams& p, const State& np1, const State& n,
                                  double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  const std::size_t nn = space.num_nodes();
  for (const Vector* v : {&np1.phi, &np1.mu, &np1.sigma, &n.phi, &n.mu, &n.sigma}) {
    check_length(*v, nn, "state vector");
  }

  Vector mu_half(nn);
  Vector sigma_half(nn);
  Vector phi_half(nn);
  Vector dphi(nn);
  for (std::size_t i = 0; i < nn; ++i) {
    mu_half[i] = 0.5 * (np1.mu[i] + n.mu[i]);
    sigma_half[i] = 0.5 * (np1.sigma[i] + n.sigma[i]);
    phi_half[i] = 0.5 * (np1.phi[i] + n.phi[i]);
    dphi[i] = (np1.phi[i] - n.phi[i]) / dt;
  }

  SchemeResidual r;
  const CsrMatrix& mm = space.mass();
  const CsrMatrix& k = space.stiffness();

  r.r_mu = spmv(mm, dphi);
  const Vector k_mu = spmv(k, mu_half);
  for (std::size_t i = 0; i < nn; ++i) r.r_mu[i] += p.mobility() * k_mu[i];

  r.r_sigma = spmv(mm, np1.sigma);
  const Vector k_phi = spmv(k, np1.phi);
  for (std::size_t i = 0; i < nn; ++i) r.r_sigma[i] -= k_phi[i];

  // Second equation integrated element by element straight from the scheme.
  const StructuredMesh& mesh = space.mesh();
  const QuadratureRule& rule = space.rule();
  const int dim = mesh.dim();
  const int npe = mesh.nodes_per_element();
  r.r_phi.assign(nn, 0.0);
  for (std::size_t e = 0; e < space.num_elements(); ++e) {
    const auto conn = mesh.element(e);
    const auto& geo = space.geometry(e);
    const double jac = geo.measure * (dim == 2 ? 2.0 : 6.0);

    std::array<double, 3> grad1{}, grad0{}, grad_sigma{};
    for (int a = 0; a < npe; ++a) {
      const auto node = static_cast<std::size_t>(conn[a]);
      for (int d = 0; d < dim; ++d) {
        grad1[d] += np1.phi[node] * geo.grads[a][d];
        grad0[d] += n.phi[node] * geo.grads[a][d];
        grad_sigma[d] += sigma_half[node] * geo.grads[a][d];
      }
    }
    double gs1 = 0.0, gs0 = 0.0;
    for (int d = 0; d < dim; ++d) {
      gs1 += grad1[d] * grad1[d];
      gs0 += grad0[d] * grad0[d];
    }

    double g_integral = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const auto& lam = rule.points[q];
      double a1 = 0.0, a0 = 0.0, mh = 0.0;
      for (int a = 0; a < npe; ++a) {
        const auto node = static_cast<std::size_t>(conn[a]);
        a1 += lam[a] * np1.phi[node];
        a0 += lam[a] * n.phi[node];
        mh += lam[a] * mu_half[node];
      }
      const double wq = rule.weights[q] * jac;
      const double integrand = p.beta() * f0_secant(a1, a0, p.h0()) +
                               0.5 * g_prime(0.5 * (a1 + a0), p.g2()) * 0.5 * (gs1 + gs0) - mh;
      for (int a = 0; a < npe; ++a) r.r_phi[static_cast<std::size_t>(conn[a])] += wq * integrand * lam[a];
      g_integral += wq * 0.5 * (g(a1, p.g0(), p.g2()) + g(a0, p.g0(), p.g2()));
    }
    for (int a = 0; a < npe; ++a) {
      double flux = 0.0;
      for (int d = 0; d < dim; ++d) {
        const double grad_half = 0.5 * (grad1[d] + grad0[d]);
        flux += (g_integral * grad_half + p.lambda() * geo.measure * grad_sigma[d]) * geo.grads[a][d];
      }
      r.r_phi[static_cast<std::size_t>(conn[a])] += flux;
    }
  }
  return r;
}

double total_energy(const P1Space& space, const ModelParams& p, std::span<const double> phi,
                    std::span<const double> sigma) {
  check_length(phi, space.num_nodes(), "phi");
  check_length(sigma, space.num_nodes(), "sigma");
  const std::size_t nq = space.num_qp();
  const QpField phi_q = space.at_quadrature(phi);
  const QpField sigma_q = space.at_quadrature(sigma);
  const std::vector<double> gsq = space.grad_sq(phi);
  const double dfact = space.mesh().dim() == 2 ? 2.0 : 6.0;
  double energy = 0.0;
  for (std::size_t e = 0; e < space.num_elements(); ++e) {
    const double jac = space.geometry(e).measure * dfact;
    double local = 0.0;
    for (std::size_t q = 0; q < nq; ++q) {
      const double v = phi_q[e * nq + q];
      const double s = sigma_q[e * nq + q];
      local += space.rule().weights[q] *
               (p.beta() * f0(v, p.h0()) + 0.5 * g(v, p.g0(), p.g2()) * gsq[e] + 0.5 * p.lambda() * s * s);
    }
    energy += jac * local;
  }
  return energy;
}

double mass_integral(const CsrMatrix& mass, std::span<const double> phi) {
  const Vector m_phi = spmv(mass, phi);
  double sum = 0.0;
  for (double v : m_phi) sum += v;
  return sum;
}

double l2_norm(const CsrMatrix& mass, std::span<const double> v) {
  return std::sqrt(std::max(0.0, dot(v, spmv(mass, v))));
}

double h1_norm(const CsrMatrix& mass, const CsrMatrix& stiffness, std::span<const double> v) {
  return std::sqrt(std::max(0.0, dot(v, spmv(mass, v)) + dot(v, spmv(stiffness, v))));
}

}  // namespace microem

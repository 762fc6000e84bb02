#include <catch_amalgamated.hpp>

#include <cmath>

#include "microem/assembly.hpp"
#include "microem/linear_solver.hpp"

using namespace microem;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

P1Space unit_square(int n) { return P1Space(build_rect_mesh(Box::rect(0, 1, 0, 1), n, n), rule_simplex(2, 6)); }

State uniform_state(std::size_t n, const ModelParams& p, double c) {
  State s;
  s.phi.assign(n, c);
  s.mu.assign(n, p.beta() * f0_prime(c, p.h0()));
  s.sigma.assign(n, 0.0);
  return s;
}

}  // namespace

TEST_CASE("element matrices of the unit right triangle") {
  const StructuredMesh tri(2, {0, 0, 1, 0, 0, 1}, {0, 1, 2}, Box::rect(0, 1, 0, 1));
  const P1Space space(tri, rule_simplex(2, 6));
  const double k[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK_THAT(space.stiffness().at(i, j), WithinAbs(k[i][j], 1e-15));
      CHECK_THAT(space.mass().at(i, j), WithinAbs((i == j ? 2.0 : 1.0) / 24.0, 1e-15));
    }
  }
}

TEST_CASE("mass sums to the measure and stiffness annihilates constants") {
  for (const auto& space : {unit_square(5), P1Space(build_box_mesh(Box::cuboid(0, 2, 0, 1, 0, 1), 3, 2, 2),
                                                    rule_simplex(3, 6))}) {
    const Vector ones(space.num_nodes(), 1.0);
    CHECK_THAT(dot(ones, spmv(space.mass(), ones)), WithinRel(space.domain_measure(), 1e-13));
    CHECK(norm_inf(spmv(space.stiffness(), ones)) <= 1e-13);
    CHECK(space.stiffness().same_pattern(space.mass()));
  }
}

TEST_CASE("weighted matrices with unit weight match the plain ones") {
  const auto space = unit_square(4);
  const QpField ones(space.num_elements() * space.num_qp(), 1.0);
  const auto wm = space.weighted_mass(ones);
  const auto wk = space.weighted_stiffness(ones);
  for (std::size_t i = 0; i < wm.nnz(); ++i) {
    CHECK_THAT(wm.values()[i], WithinAbs(space.mass().values()[i], 1e-15));
    CHECK_THAT(wk.values()[i], WithinAbs(space.stiffness().values()[i], 1e-15));
  }
}

TEST_CASE("assembly does not depend on the thread count") {
  const auto mesh = build_rect_mesh(Box::rect(0, 1, 0, 1), 40, 40);
  const P1Space one(mesh, rule_simplex(2, 6), 1);
  const P1Space four(mesh, rule_simplex(2, 6), 4);
  QpField w(one.num_elements() * one.num_qp());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = std::sin(0.001 * static_cast<double>(k));
  CHECK(one.weighted_stiffness(w).values() == four.weighted_stiffness(w).values());
  CHECK(one.weighted_mass(w).values() == four.weighted_mass(w).values());
  CHECK(one.load(w) == four.load(w));
}

TEST_CASE("energy of constant fields") {
  const auto space = unit_square(4);
  const ModelParams p;
  const std::size_t n = space.num_nodes();
  CHECK_THAT(total_energy(space, p, Vector(n, 0.0), Vector(n, 0.0)), WithinRel(p.beta() * p.h0(), 1e-14));
  CHECK_THAT(total_energy(space, p, Vector(n, 1.0), Vector(n, 0.0)), WithinAbs(0.0, 1e-15));
  CHECK_THAT(total_energy(space, p, Vector(n, 0.0), Vector(n, 3.0)),
             WithinRel(p.beta() * p.h0() + 0.5 * p.lambda() * 9.0, 1e-14));
}

TEST_CASE("constant initial data") {
  const auto space = unit_square(6);
  const ModelParams p;
  const State s = project_initial(space, p, Vector(space.num_nodes(), 0.3));
  for (std::size_t i = 0; i < space.num_nodes(); ++i) {
    CHECK_THAT(s.sigma[i], WithinAbs(0.0, 1e-13));
    // K applied to a constant leaves O(1e-15) roundoff against O(h^2) mass entries.
    CHECK_THAT(s.mu[i], WithinAbs(p.beta() * f0_prime(0.3, p.h0()), 1e-10));
  }
}

TEST_CASE("initial sigma is consistent with the constraint row") {
  const auto space = unit_square(8);
  const State s = project_initial(space, ModelParams(), [](std::span<const double> x) {
    return std::tanh(4.0 * (x[0] - 0.4)) * std::cos(x[1]);
  });
  const Vector k_phi = spmv(space.stiffness(), s.phi);
  const Vector m_sigma = spmv(space.mass(), s.sigma);
  for (std::size_t i = 0; i < k_phi.size(); ++i) CHECK_THAT(m_sigma[i], WithinAbs(k_phi[i], 1e-12));
}

TEST_CASE("initial sigma converges to minus the Laplacian of cos(pi x)") {
  const double pi = std::acos(-1.0);
  auto sigma_error = [&](int n) {
    const auto space = unit_square(n);
    const State s = project_initial(space, ModelParams(), [&](std::span<const double> x) { return std::cos(pi * x[0]); });
    Vector d(space.num_nodes());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = s.sigma[i] - pi * pi * std::cos(pi * space.mesh().node(i)[0]);
    return l2_norm(space.mass(), d);
  };
  const double coarse = sigma_error(16), fine = sigma_error(32);
  CHECK(std::log2(coarse / fine) > 1.8);
}

TEST_CASE("elliptic projection reproduces P1 fields") {
  auto check = [](const P1Space& space, const AnalyticField& f) {
    const Vector r = ritz_projection(space, f);
    for (std::size_t i = 0; i < r.size(); ++i) CHECK_THAT(r[i], WithinAbs(f(space.mesh().node(i)), 1e-11));
  };
  check(unit_square(5), [](std::span<const double> x) { return 1.0 + 2.0 * x[0] - 3.0 * x[1]; });
  check(P1Space(build_box_mesh(Box::cuboid(0, 1, 0, 1, 0, 2), 2, 3, 2), rule_simplex(3, 6)),
        [](std::span<const double> x) { return 0.5 - x[0] + 0.25 * x[1] + 2.0 * x[2]; });
}

TEST_CASE("initial chemical potential is odd for odd data on a point-symmetric mesh") {
  // The one-diagonal mesh of a centred square maps onto itself under x -> -x.
  const P1Space space(build_rect_mesh(Box::rect(-1, 1, -1, 1), 6, 6), rule_simplex(2, 6));
  const ModelParams p(0.1, 0.1, 1, 0.5, 0.0, 1);
  const State s = project_initial(space, p, [](std::span<const double> x) {
    return 0.8 * std::sin(1.5 * x[0]) * std::cos(x[1]) + 0.3 * x[1];
  });
  const std::size_t n = space.num_nodes();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = n - 1 - i;  // node at -x for the lexicographic numbering
    CHECK_THAT(space.mesh().node(j)[0], WithinAbs(-space.mesh().node(i)[0], 1e-15));
    CHECK_THAT(s.mu[j], WithinAbs(-s.mu[i], 1e-11));
    CHECK_THAT(s.sigma[j], WithinAbs(-s.sigma[i], 1e-11));
  }
}

TEST_CASE("uniform state is a fixed point of the Picard system") {
  const auto space = unit_square(4);
  const ModelParams p;
  const State n = uniform_state(space.num_nodes(), p, 0.2);
  const PicardSystem sys = assemble_picard_system(space, p, n, n.phi, 1e-4);
  const Vector u = solve_linear(sys.matrix, sys.rhs);
  const std::size_t nn = space.num_nodes();
  for (std::size_t i = 0; i < nn; ++i) {
    CHECK_THAT(u[i], WithinAbs(0.2, 1e-12));
    CHECK_THAT(u[nn + i], WithinRel(n.mu[0], 1e-10));
    CHECK_THAT(u[2 * nn + i], WithinAbs(0.0, 1e-12));
  }
  CHECK(nonlinear_residual(space, p, n, n, 1e-4).sup_norm() <= 1e-13);
}

TEST_CASE("Picard system is consistent with the nonlinear residual at its fixed point") {
  // With phi^l = phi^{n+1} the linear system equals the scheme, so a solution
  // of one with phi^l taken from its own output is a root of the other.
  const auto space = unit_square(4);
  const ModelParams p;
  State n = project_initial(space, p, [](std::span<const double> x) { return 0.5 * std::cos(3.0 * x[0]) * x[1]; });
  State next = n;
  const std::size_t nn = space.num_nodes();
  for (int it = 0; it < 60; ++it) {
    const PicardSystem sys = assemble_picard_system(space, p, n, next.phi, 1e-5);
    const Vector u = solve_linear(sys.matrix, sys.rhs);
    next.phi.assign(u.begin(), u.begin() + nn);
    next.mu.assign(u.begin() + nn, u.begin() + 2 * nn);
    next.sigma.assign(u.begin() + 2 * nn, u.end());
  }
  const double scale = nonlinear_residual(space, p, n, n, 1e-5).sup_norm();
  CHECK(nonlinear_residual(space, p, next, n, 1e-5).sup_norm() <= 1e-10 * std::max(1.0, scale));
}

TEST_CASE("norms") {
  const auto space = unit_square(8);
  Vector v(space.num_nodes(), 2.0);
  CHECK_THAT(mass_integral(space.mass(), v), WithinRel(2.0, 1e-14));
  CHECK_THAT(l2_norm(space.mass(), v), WithinRel(2.0, 1e-14));
  CHECK_THAT(h1_norm(space.mass(), space.stiffness(), v), WithinRel(2.0, 1e-14));
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = space.mesh().node(i)[0];
  // ||x||^2 + ||grad x||^2 = 1/3 + 1 on the unit square, exact for P1.
  CHECK_THAT(h1_norm(space.mass(), space.stiffness(), v), WithinRel(std::sqrt(4.0 / 3.0), 1e-13));
}

TEST_CASE("length mismatches and bad time steps are argument errors") {
  const auto space = unit_square(2);
  const ModelParams p;
  const State n = uniform_state(space.num_nodes(), p, 0.0);
  CHECK_THROWS_AS(assemble_picard_system(space, p, n, Vector(3, 0.0), 1e-5), std::invalid_argument);
  CHECK_THROWS_AS(assemble_picard_system(space, p, n, n.phi, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(project_initial(space, p, Vector(2, 0.0)), std::invalid_argument);
}

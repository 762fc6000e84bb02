#include <catch_amalgamated.hpp>

#include <cmath>

#include "microem/quadrature.hpp"

using namespace microem;

namespace {

double fact(int n) { return n <= 1 ? 1.0 : n * fact(n - 1); }

// Reference-simplex coordinates are the trailing barycentric entries.
double quad_2d(const QuadratureRule& r, int a, int b) {
  double s = 0.0;
  for (std::size_t q = 0; q < r.size(); ++q) {
    s += r.weights[q] * std::pow(r.points[q][1], a) * std::pow(r.points[q][2], b);
  }
  return s;
}

double quad_3d(const QuadratureRule& r, int a, int b, int c) {
  double s = 0.0;
  for (std::size_t q = 0; q < r.size(); ++q) {
    s += r.weights[q] * std::pow(r.points[q][1], a) * std::pow(r.points[q][2], b) * std::pow(r.points[q][3], c);
  }
  return s;
}

}  // namespace

TEST_CASE("centroid rule") {
  const auto& r = rule_simplex(2, 1);
  REQUIRE(r.size() == 1);
  CHECK(r.weights[0] == Catch::Approx(0.5));
  for (int k = 0; k < 3; ++k) CHECK(r.points[0][k] == Catch::Approx(1.0 / 3.0));
}

TEST_CASE("2D rules integrate monomials up to their degree") {
  for (int deg = 1; deg <= 6; ++deg) {
    const auto& r = rule_simplex(2, deg);
    CHECK(r.degree >= deg);
    for (const double w : r.weights) CHECK(w > 0.0);
    for (int a = 0; a <= deg; ++a) {
      for (int b = 0; a + b <= deg; ++b) {
        const double exact = fact(a) * fact(b) / fact(a + b + 2);
        CHECK(std::abs(quad_2d(r, a, b) - exact) <= 1e-14 * exact);
      }
    }
  }
}

TEST_CASE("3D rules integrate monomials up to their degree") {
  for (int deg = 1; deg <= 6; ++deg) {
    const auto& r = rule_simplex(3, deg);
    CHECK(r.degree >= deg);
    for (int a = 0; a <= deg; ++a) {
      for (int b = 0; a + b <= deg; ++b) {
        for (int c = 0; a + b + c <= deg; ++c) {
          const double exact = fact(a) * fact(b) * fact(c) / fact(a + b + c + 3);
          CHECK(std::abs(quad_3d(r, a, b, c) - exact) <= 1e-14 * exact);
        }
      }
    }
  }
}

TEST_CASE("barycentric points sum to one") {
  for (int dim : {2, 3}) {
    const auto& r = rule_simplex(dim, 6);
    for (const auto& p : r.points) {
      double s = 0.0;
      for (int k = 0; k <= dim; ++k) s += p[k];
      CHECK(s == Catch::Approx(1.0).epsilon(1e-15));
    }
  }
}

TEST_CASE("unsupported rules are rejected") {
  CHECK_THROWS_AS(rule_simplex(1, 2), std::invalid_argument);
  CHECK_THROWS_AS(rule_simplex(2, 0), std::invalid_argument);
  CHECK_THROWS_AS(rule_simplex(3, 7), std::invalid_argument);
}

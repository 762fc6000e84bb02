#include "microem/quadrature.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace microem {
namespace {

// Orbit generators in barycentric coordinates. Weights are given for the
// reference simplex (area 1/2, volume 1/6), per point of the orbit.

void add_point(QuadratureRule& r, std::array<double, 4> p, double w) {
  r.points.push_back(p);
  r.weights.push_back(w);
}

void tri_s3(QuadratureRule& r, double w) { add_point(r, {1.0 / 3, 1.0 / 3, 1.0 / 3, 0.0}, w); }

void tri_s21(QuadratureRule& r, double a, double w) {
  const double b = 1.0 - 2.0 * a;
  add_point(r, {a, a, b, 0.0}, w);
  add_point(r, {a, b, a, 0.0}, w);
  add_point(r, {b, a, a, 0.0}, w);
}

void tri_s111(QuadratureRule& r, double a, double b, double w) {
  const double c = 1.0 - a - b;
  add_point(r, {a, b, c, 0.0}, w);
  add_point(r, {a, c, b, 0.0}, w);
  add_point(r, {b, a, c, 0.0}, w);
  add_point(r, {b, c, a, 0.0}, w);
  add_point(r, {c, a, b, 0.0}, w);
  add_point(r, {c, b, a, 0.0}, w);
}

void tet_s4(QuadratureRule& r, double w) { add_point(r, {0.25, 0.25, 0.25, 0.25}, w); }

void tet_s31(QuadratureRule& r, double a, double w) {
  const double b = 1.0 - 3.0 * a;
  add_point(r, {b, a, a, a}, w);
  add_point(r, {a, b, a, a}, w);
  add_point(r, {a, a, b, a}, w);
  add_point(r, {a, a, a, b}, w);
}

void tet_s22(QuadratureRule& r, double a, double w) {
  const double b = 0.5 - a;
  add_point(r, {a, a, b, b}, w);
  add_point(r, {a, b, a, b}, w);
  add_point(r, {a, b, b, a}, w);
  add_point(r, {b, a, a, b}, w);
  add_point(r, {b, a, b, a}, w);
  add_point(r, {b, b, a, a}, w);
}

void tet_s211(QuadratureRule& r, double a, double b, double w) {
  const double c = 1.0 - 2.0 * a - b;
  // All 12 distinct arrangements of (a, a, b, c).
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (j == i) continue;
      std::array<double, 4> p{a, a, a, a};
      p[i] = b;
      p[j] = c;
      add_point(r, p, w);
    }
  }
}

QuadratureRule make(int dim, int degree) {
  QuadratureRule r;
  r.dim = dim;
  r.degree = degree;
  return r;
}

std::vector<QuadratureRule> build_triangle_rules() {
  std::vector<QuadratureRule> rules;

  auto r1 = make(2, 1);
  tri_s3(r1, 0.5);
  rules.push_back(r1);

  auto r2 = make(2, 2);
  tri_s21(r2, 1.0 / 6.0, 1.0 / 6.0);
  rules.push_back(r2);

  // Strang-Fix / Dunavant 6-point rule.
  auto r4 = make(2, 4);
  tri_s21(r4, 0.4459484909159648863183, 0.1116907948390057328475);
  tri_s21(r4, 0.09157621350977074345957, 0.05497587182766093381916);
  rules.push_back(r4);

  // Radon 7-point rule.
  auto r5 = make(2, 5);
  tri_s3(r5, 9.0 / 80.0);
  tri_s21(r5, 0.101286507323456338801, 0.06296959027241357629784);
  tri_s21(r5, 0.4701420641051150897704, 0.06619707639425309036882);
  rules.push_back(r5);

  // Dunavant 12-point rule, re-solved to full double precision.
  auto r6 = make(2, 6);
  tri_s21(r6, 0.2492867451709104212916, 0.05839313786318968301264);
  tri_s21(r6, 0.06308901449150222834033, 0.02542245318510340846047);
  tri_s111(r6, 0.05314504984481694735325, 0.3103524510337844054166, 0.04142553780918678759678);
  rules.push_back(r6);
  return rules;
}

std::vector<QuadratureRule> build_tet_rules() {
  std::vector<QuadratureRule> rules;

  auto r1 = make(3, 1);
  tet_s4(r1, 1.0 / 6.0);
  rules.push_back(r1);

  auto r2 = make(3, 2);
  tet_s31(r2, 0.1381966011250105151795, 1.0 / 24.0);
  rules.push_back(r2);

  // 14-point positive rule.
  auto r5 = make(3, 5);
  tet_s31(r5, 0.09273525031089122640232, 0.01224884051939365825729);
  tet_s31(r5, 0.3108859192633006097973, 0.01878132095300264179986);
  tet_s22(r5, 0.04550370412564964949188, 0.007091003462846911073012);
  rules.push_back(r5);

  // Keast 24-point rule, re-solved to full double precision.
  auto r6 = make(3, 6);
  tet_s31(r6, 0.2146028712591520292888, 0.006653791709694582016615);
  tet_s31(r6, 0.04067395853461135311558, 0.001679535175886773824669);
  tet_s31(r6, 0.322337890142275510344, 0.009226196923942453682526);
  tet_s211(r6, 0.06366100187501752529924, 0.2696723314583158080341, 9.0 / 1120.0);
  rules.push_back(r6);
  return rules;
}

}  // namespace

const QuadratureRule& rule_simplex(int dim, int degree) {
  static const std::vector<QuadratureRule> tri = build_triangle_rules();
  static const std::vector<QuadratureRule> tet = build_tet_rules();
  if (dim != 2 && dim != 3) {
    throw std::invalid_argument("quadrature dimension must be 2 or 3, got " + std::to_string(dim));
  }
  if (degree < 1 || degree > 6) {
    throw std::invalid_argument("quadrature degree must be in [1, 6], got " + std::to_string(degree));
  }
  const auto& table = dim == 2 ? tri : tet;
  const auto it = std::find_if(table.begin(), table.end(),
                               [degree](const QuadratureRule& r) { return r.degree >= degree; });
  return *it;
}

}  // namespace microem

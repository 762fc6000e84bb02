#include "microem/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace microem {

namespace {
void require_positive(double v, const char* name) {
  if (!std::isfinite(v) || !(v > 0.0)) {
    throw std::invalid_argument(std::string("parameter ") + name + " must be > 0, got " + std::to_string(v));
  }
}
}  // namespace

ModelParams::ModelParams(double mobility, double lambda, double beta, double h0, double g0, double g2)
    : mobility_(mobility), lambda_(lambda), beta_(beta), h0_(h0), g0_(g0), g2_(g2) {
  require_positive(mobility, "M");
  require_positive(lambda, "lambda");
  require_positive(beta, "beta");
  require_positive(h0, "h0");
  require_positive(g2, "g2");
  if (!std::isfinite(g0)) throw std::invalid_argument("parameter g0 must be finite");
}

double f0(double phi, double h0) {
  const double p2 = phi * phi;
  return (p2 - 1.0) * (p2 - 1.0) * (p2 + h0);
}

double f0_prime(double phi, double h0) {
  const double p2 = phi * phi;
  return phi * (6.0 * p2 * p2 + 4.0 * (h0 - 2.0) * p2 + 2.0 * (1.0 - 2.0 * h0));
}

double f0_secant(double a, double b, double h0) {
  // (a^5 + a^4 b + a^3 b^2 + a^2 b^3 + a b^4 + b^5)
  //   + (h0 - 2)(a^3 + a^2 b + a b^2 + b^3) + (1 - 2 h0)(a + b)
  const double a2 = a * a;
  const double b2 = b * b;
  const double ab = a * b;
  const double s = a + b;
  const double quintic = s * (a2 * a2 + ab * ab + b2 * b2);
  const double cubic = s * (a2 + b2);
  return quintic + (h0 - 2.0) * cubic + (1.0 - 2.0 * h0) * s;
}

double g(double phi, double g0, double g2) { return g2 * phi * phi + g0; }

double g_prime(double phi, double g2) { return 2.0 * g2 * phi; }

double dt_safety_bound(const ModelParams& p) {
  if (p.g0() == 0.0) return std::numeric_limits<double>::infinity();
  const double g0 = std::abs(p.g0());
  return 3.0 * p.lambda() * p.lambda() / (2.0 * g0 * g0 * g0 * p.mobility());
}

}  // namespace microem

#pragma once

namespace microem {

/// Physical constants of the microemulsion free energy
///   E(phi, sigma) = int beta f0(phi) + 1/2 g(phi) |grad phi|^2 + lambda/2 sigma^2
/// with f0(phi) = (phi^2 - 1)^2 (phi^2 + h0) and g(phi) = g2 phi^2 + g0.
/// The default-constructed value is the standard 2D parameter set.
class ModelParams {
 public:
  ModelParams() = default;
  /// Throws std::invalid_argument naming the first offending parameter when
  /// M, lambda, beta, h0 or g2 is not strictly positive (or any is non-finite).
  ModelParams(double mobility, double lambda, double beta, double h0, double g0, double g2);

  double mobility() const { return mobility_; }
  double lambda() const { return lambda_; }
  double beta() const { return beta_; }
  double h0() const { return h0_; }
  double g0() const { return g0_; }
  double g2() const { return g2_; }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  double mobility_ = 0.1;
  double lambda_ = 0.1;
  double beta_ = 1.0;
  double h0_ = 0.5;
  double g0_ = -4.0;
  double g2_ = 1.0;
};

double f0(double phi, double h0);
double f0_prime(double phi, double h0);

/// Division-free secant slope (f0(a) - f0(b)) / (a - b); equals f0_prime(a) at a == b.
double f0_secant(double a, double b, double h0);

double g(double phi, double g0, double g2);
double g_prime(double phi, double g2);

/// Largest dt for which one Picard linearization is uniquely solvable:
/// 3 lambda^2 / (2 |g0|^3 M), or +infinity when g0 == 0.
double dt_safety_bound(const ModelParams& p);

}  // namespace microem

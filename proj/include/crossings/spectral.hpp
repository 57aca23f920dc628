#pragma once

#include <memory>
#include <string>
#include <vector>

#include "crossings/expr.hpp"

namespace crossings {

/// One-sided spectral density with compact support [0, lambda_max],
/// normalized so the covariance r(tau) = integral cos(lambda tau) f d lambda
/// has r(0) = 1. The base curve is an expression in `lambda` or a tabulated
/// set of points (linear interpolation). Compact support keeps all spectral
/// moments finite, so covariance derivatives exist through order 4.
class SpectralDensity {
 public:
  static SpectralDensity from_expression(std::string_view expr_in_lambda, double lambda_max);
  static SpectralDensity from_table(std::vector<double> lambda, std::vector<double> values);

  /// r^(k)(tau) for k = 0..order (order <= 4); element k of the result.
  std::vector<double> covariance_derivs(double tau, int order) const;

  double second_moment() const { return m2_; }   // -r''(0)
  double fourth_moment() const { return m4_; }   // r''''(0)
  /// r''(tau) - r''(0) evaluated as integral lambda^2 (1 - cos) f,
  /// cancellation-free down to tiny tau.
  double theta2(double tau) const;
  /// theta(tau) = r - 1 - r''(0) tau^2/2, via the stable small-angle form.
  double theta0(double tau) const;
  /// theta'(tau) = r' - r''(0) tau.
  double theta1(double tau) const;

  double lambda_max() const { return lambda_max_; }
  /// Normalized density value (integrates to 1 over [0, lambda_max]).
  double density(double lambda) const;
  std::string describe() const;

 private:
  SpectralDensity() = default;
  void normalize();
  double raw(double lambda) const;
  double moment_raw(int k) const;

  expr::NodePtr expr_;
  std::vector<double> tab_lambda_, tab_value_;
  double lambda_max_ = 0.0;
  double mass_ = 1.0;
  double m2_ = 0.0;
  double m4_ = 0.0;
  std::string text_;
};

/// Oscillatory integrals against the heavy log-squared spectral tail
///     1 / (lambda^p log^2 lambda) on [e, infinity).
/// They power the slow-decay covariance mixture whose Geman function behaves
/// like 1/(tau |log tau|): a finite second spectral moment with a divergent
/// lambda^2 log lambda moment.
namespace osc {

double tail_envelope(double lambda, int p);   // the envelope itself (0 below e)
double tail_cos(double tau, int p);           // integral cos(lambda tau) envelope
double tail_sin(double tau, int p);
double tail_one_minus_cos(double tau);        // p = 1 case of (1 - cos), stable near 0
double tail_mass(int p);                      // integral of the envelope, p in {1,2,3}

}  // namespace osc

}  // namespace crossings

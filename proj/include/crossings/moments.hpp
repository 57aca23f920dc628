#pragma once

#include <string>
#include <vector>

#include "crossings/covariance.hpp"
#include "crossings/curve.hpp"

namespace crossings {

/// Per-lag bundle of the regression of (X'_t1, X'_t1+tau) onto the two
/// positions: residual variance sigma^2, residual correlation rho, the
/// regression weights, and the normalized drift m for the level in context.
/// The second equation's weights are aliases: beta1 = alpha2, beta2 = alpha1.
struct RegressionCoefficients {
  double tau = 0.0;
  double sigma2 = 0.0;
  double rho = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double m = 0.0;

  double beta1() const { return alpha2; }
  double beta2() const { return alpha1; }
  double sigma() const;
};

/// sigma^2 = -r''(0) - r'^2/(1 - r^2); rho, alpha1, alpha2 from the same
/// lag; m = r' x / ((1 + r) sigma). Below the model's small-lag crossover
/// the tau^2 asymptotics replace the (catastrophically cancelling) direct
/// formulas.
RegressionCoefficients regression_at(const CovarianceModel& model, double tau, double x);

/// E[N_t(x)] = t exp(-x^2/2) sqrt(-r''(0)) / pi.
double rice_mean(const CovarianceModel& model, double x, double t);

/// Mean curve-crossing count: integral of phi(psi_s) sqrt(c) a0(psi'_s/sqrt(c)).
double rice_mean_curve(const CovarianceModel& model, const CurveSpec& curve, double t);

/// Hermite coefficients a_0..a_K of |. - m| in the probabilists' basis.
struct HermiteCoefficients {
  double m = 0.0;
  std::vector<double> a;
  int order() const { return static_cast<int>(a.size()) - 1; }
};
HermiteCoefficients hermite_coeffs(double m, int K);

/// E|(Z1 + m1)(Z2 + m2)| for a standard bivariate normal pair with
/// correlation rho: the Mehler series sum_k a_k(-m1) a_k(-m2) k! rho^k with
/// adaptive truncation, or a 64x64 tensor Gauss-Hermite fallback when
/// |rho| > 0.99 where the series crawls.
double mehler_cross(double m1, double m2, double rho, double tol = 1e-9);
double mehler_cross_tracked(double m1, double m2, double rho, double tol, int& terms_used);

/// Density of (X_0, X_tau) at (x, x).
double bivariate_density(const CovarianceModel& model, double tau, double x);
/// Same at a general pair (x1, x2).
double bivariate_density_pair(const CovarianceModel& model, double tau, double x1, double x2);

struct MomentResult {
  double t = 0.0;
  std::string target;
  double rice_mean = 0.0;
  double m2 = 0.0;         // second factorial moment; +inf sentinel when !finite
  double m2_delta = 0.0;   // truncated component over (0, delta]
  double variance = 0.0;
  double quad_error = 0.0;
  int series_K = 0;
  bool finite = true;
};

struct QuadControl {
  double tau_min = 1e-8;       // graded-mesh floor at the singular endpoint
  double series_tol = 1e-9;
  double quad_tol = 1e-8;      // target absolute error on the smooth part
  double guard = 1e-6;         // exclusion radius around interior singular lags
  double sigma2_scale = 1.0;   // test-only corruption hook (cmd_compare mutation)
  int outer_panels = 24;       // t1 resolution for the curve double integral
};

/// M2 for a level: 2 integral over (0, t) of (t - tau) p_tau(x, x) sigma^2 A.
/// Graded geometric mesh on (tau_min, delta], adaptive panels on [delta, t],
/// Richardson tail from halving tau_min twice. `geman_nonintegrable` short-
/// circuits with an infinite sentinel (no quadrature near 0 is attempted).
MomentResult second_factorial_moment(const CovarianceModel& model, double x, double t,
                                     double delta, const QuadControl& control = {},
                                     bool geman_nonintegrable = false);

/// Convenience overload: classifies the Geman condition first.
MomentResult second_factorial_moment_checked(const CovarianceModel& model, double x, double t,
                                             double delta, const QuadControl& control = {});

/// Var N = M2 + E N - (E N)^2; requires a finite result.
double variance_of_count(const MomentResult& result);

/// M2 for a curve: double integral of p_tau(psi_1, psi_2) sigma^2
/// E|(Z1 + m1)(Z2 + m2)| with the model (R) shifts
///   m1 = (alpha1 psi_1 + alpha2 psi_2 - psi'_1) / sigma,
///   m2 = (-alpha2 psi_1 - alpha1 psi_2 - psi'_2) / sigma.
MomentResult curve_second_moment(const CovarianceModel& model, const CurveSpec& curve, double t,
                                 double delta, const QuadControl& control = {},
                                 bool geman_nonintegrable = false);

/// Convenience overload: runs the Geman and curve-condition checks first and
/// refuses when the curve condition is violated.
MomentResult curve_second_moment_checked(const CovarianceModel& model, const CurveSpec& curve,
                                         double t, double delta,
                                         const QuadControl& control = {});

}  // namespace crossings

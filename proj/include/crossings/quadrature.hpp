#pragma once

#include <functional>
#include <vector>

namespace crossings::quad {

struct Rule {
  std::vector<double> nodes;    // on [-1, 1] for Legendre; on R for Hermite
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1], cached per order.
const Rule& gauss_legendre(int n);

/// Gauss-Hermite rule for the standard normal weight: sum w_i g(x_i)
/// equals E[g(Z)] exactly for polynomials of degree < 2n. Weights sum to 1.
const Rule& gauss_hermite(int n);

/// Fixed-order Gauss-Legendre integral of f over [a, b].
double gl_integrate(const std::function<double(double)>& f, double a, double b, int n);

struct AdaptiveResult {
  double value = 0.0;
  double error = 0.0;   // accumulated error estimate
  long evals = 0;
  bool converged = true;
};

/// Globally adaptive Gauss-Kronrod (G7, K15) bisection on [a, b].
AdaptiveResult adaptive_gk(const std::function<double(double)>& f, double a, double b,
                           double abs_tol, double rel_tol = 1e-12, int max_intervals = 4000);

/// Single (G7, K15) panel: returns Kronrod value, error = |K15 - G7| based estimate.
void gk15_panel(const std::function<double(double)>& f, double a, double b,
                double& value, double& error);

}  // namespace crossings::quad

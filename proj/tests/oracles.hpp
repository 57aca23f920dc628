#pragma once

// Test-side oracles, independent of the library's evaluation paths.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

/// 4th-order central finite differences, evaluated in long double so the
/// h = 1e-3 stencils for orders 3 and 4 keep enough digits.
inline double central_diff4(const std::function<long double(long double)>& f, double x_in,
                            int order, double h_in = 1e-3) {
  const long double x = x_in, h = h_in;
  auto F = [&](int j) { return f(x + j * h); };
  long double v = 0.0L;
  switch (order) {
    case 1: v = (F(-2) - 8 * F(-1) + 8 * F(1) - F(2)) / (12 * h); break;
    case 2: v = (-F(-2) + 16 * F(-1) - 30 * F(0) + 16 * F(1) - F(2)) / (12 * h * h); break;
    case 3:
      v = (F(-3) - 8 * F(-2) + 13 * F(-1) - 13 * F(1) + 8 * F(2) - F(3)) / (8 * h * h * h);
      break;
    case 4:
      v = (-F(-3) + 12 * F(-2) - 39 * F(-1) + 56 * F(0) - 39 * F(1) + 12 * F(2) - F(3)) /
          (6 * h * h * h * h);
      break;
  }
  return static_cast<double>(v);
}

}  // namespace oracles

#include <numbers>

namespace oracles {

/// E|mu + s W| for W ~ N(0,1): closed form used by the 1-D reduction.
inline double folded_mean(double mu, double s) {
  if (s <= 0.0) return std::abs(mu);
  double r = mu / s;
  double Phi = 0.5 * std::erfc(-r / std::numbers::sqrt2);
  return mu * (2.0 * Phi - 1.0) + s * std::sqrt(2.0 / std::numbers::pi) * std::exp(-0.5 * r * r);
}

/// Independent quadrature oracle for E|(Z1 + m1)(Z2 + m2)| with correlation
/// rho: condition on Z1, integrate the closed-form conditional mean of
/// |Z2 + m2| against the normal density, splitting at the |Z1 + m1| kink.
/// Adaptive Simpson keeps this free of the library quadrature code.
namespace detail {
template <class F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                   double tol, int depth, int force) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || (force <= 0 && std::abs(delta) < 15.0 * tol))
    return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, force - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, force - 1);
}
template <class F>
double simpson(const F& f, double a, double b, double tol) {
  if (!(b > a)) return 0.0;
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48, 6);
}
}  // namespace detail

inline double mehler_cross_oracle(double m1, double m2, double rho, double tol = 1e-12) {
  double s = std::sqrt(std::max(0.0, (1.0 - rho) * (1.0 + rho)));
  auto integrand = [&](double z) {
    double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    return std::abs(z + m1) * folded_mean(rho * z + m2, s) * phi;
  };
  double spread = 13.0 + std::abs(m1) + std::abs(m2);
  double lo = -spread, hi = spread, kink = -m1;
  std::vector<double> cuts{lo};
  if (kink > lo && kink < hi) cuts.push_back(kink);
  if (s == 0.0 && rho != 0.0) {
    double kink2 = -m2 / rho;
    if (kink2 > lo && kink2 < hi) cuts.push_back(kink2);
  }
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    total += detail::simpson(integrand, cuts[i], cuts[i + 1], tol);
  return total;
}

}  // namespace oracles


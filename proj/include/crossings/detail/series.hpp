#pragma once

#include <cmath>

// Small-argument forms that keep the theta quantities cancellation-free.
namespace crossings::detail {

/// cos(u) - 1 + u^2/2, exact for tiny u (leading term u^4/24).
inline double cosm1_plus_half(double u) {
  u = std::abs(u);
  if (u < 0.25) {
    double u2 = u * u;
    return u2 * u2 / 24.0 *
           (1.0 - u2 / 30.0 * (1.0 - u2 / 56.0 * (1.0 - u2 / 90.0)));
  }
  return std::cos(u) - 1.0 + 0.5 * u * u;
}

/// u - sin(u), leading term u^3/6.
inline double u_minus_sin(double u) {
  if (std::abs(u) < 0.25) {
    double u2 = u * u;
    return u * u2 / 6.0 * (1.0 - u2 / 20.0 * (1.0 - u2 / 42.0 * (1.0 - u2 / 72.0)));
  }
  return u - std::sin(u);
}

/// exp(u) - 1 - u, leading term u^2/2.
inline double expm1_minus(double u) {
  if (std::abs(u) < 1e-3) {
    double u2 = u * u;
    return 0.5 * u2 * (1.0 + u / 3.0 * (1.0 + u / 4.0 * (1.0 + u / 5.0)));
  }
  return std::expm1(u) - u;
}

}  // namespace crossings::detail

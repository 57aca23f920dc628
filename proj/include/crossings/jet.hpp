#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace crossings {

/// Order-4 Taylor jet: the value and first four derivatives of a scalar
/// function of one variable, propagated through arithmetic exactly.
/// Templated on the scalar so expressions can be evaluated in double or
/// long double precision.
template <class Scalar>
struct Jet {
  std::array<Scalar, 5> d{};  // d[k] = f^(k)(x)

  constexpr Jet() = default;
  constexpr explicit Jet(Scalar value) : d{value, Scalar(0), Scalar(0), Scalar(0), Scalar(0)} {}
  constexpr Jet(Scalar d0, Scalar d1, Scalar d2, Scalar d3, Scalar d4) : d{d0, d1, d2, d3, d4} {}

  /// Jet of the independent variable at x: value x, slope 1.
  static constexpr Jet variable(Scalar x) {
    return Jet{x, Scalar(1), Scalar(0), Scalar(0), Scalar(0)};
  }
  static constexpr Jet constant(Scalar v) { return Jet{v}; }

  constexpr Scalar value() const { return d[0]; }
  constexpr Scalar deriv(std::size_t k) const { return d[k]; }

  constexpr Jet operator-() const { return {-d[0], -d[1], -d[2], -d[3], -d[4]}; }

  friend constexpr Jet operator+(const Jet& a, const Jet& b) {
    return {a.d[0] + b.d[0], a.d[1] + b.d[1], a.d[2] + b.d[2], a.d[3] + b.d[3], a.d[4] + b.d[4]};
  }
  friend constexpr Jet operator-(const Jet& a, const Jet& b) {
    return {a.d[0] - b.d[0], a.d[1] - b.d[1], a.d[2] - b.d[2], a.d[3] - b.d[3], a.d[4] - b.d[4]};
  }

  // Leibniz rule with binomial weights 1,4,6,4,1.
  friend constexpr Jet operator*(const Jet& a, const Jet& b) {
    return {a.d[0] * b.d[0],
            a.d[1] * b.d[0] + a.d[0] * b.d[1],
            a.d[2] * b.d[0] + 2 * a.d[1] * b.d[1] + a.d[0] * b.d[2],
            a.d[3] * b.d[0] + 3 * a.d[2] * b.d[1] + 3 * a.d[1] * b.d[2] + a.d[0] * b.d[3],
            a.d[4] * b.d[0] + 4 * a.d[3] * b.d[1] + 6 * a.d[2] * b.d[2] + 4 * a.d[1] * b.d[3] +
                a.d[0] * b.d[4]};
  }

  friend constexpr Jet operator+(const Jet& a, Scalar s) { return a + Jet{s}; }
  friend constexpr Jet operator+(Scalar s, const Jet& a) { return Jet{s} + a; }
  friend constexpr Jet operator-(const Jet& a, Scalar s) { return a - Jet{s}; }
  friend constexpr Jet operator-(Scalar s, const Jet& a) { return Jet{s} - a; }
  friend constexpr Jet operator*(const Jet& a, Scalar s) {
    return {a.d[0] * s, a.d[1] * s, a.d[2] * s, a.d[3] * s, a.d[4] * s};
  }
  friend constexpr Jet operator*(Scalar s, const Jet& a) { return a * s; }
  friend constexpr Jet operator/(const Jet& a, Scalar s) { return a * (Scalar(1) / s); }
};

/// Univariate composition (Faa di Bruno through order 4): outer[k] holds
/// phi^(k) evaluated at f.value().
template <class Scalar>
constexpr Jet<Scalar> compose(const std::array<Scalar, 5>& outer, const Jet<Scalar>& f) {
  const Scalar f1 = f.d[1], f2 = f.d[2], f3 = f.d[3], f4 = f.d[4];
  Jet<Scalar> r;
  r.d[0] = outer[0];
  r.d[1] = outer[1] * f1;
  r.d[2] = outer[1] * f2 + outer[2] * f1 * f1;
  r.d[3] = outer[1] * f3 + 3 * outer[2] * f1 * f2 + outer[3] * f1 * f1 * f1;
  r.d[4] = outer[1] * f4 + outer[2] * (4 * f1 * f3 + 3 * f2 * f2) +
           6 * outer[3] * f1 * f1 * f2 + outer[4] * f1 * f1 * f1 * f1;
  return r;
}

template <class Scalar>
Jet<Scalar> exp(const Jet<Scalar>& f) {
  using std::exp;
  const Scalar e = exp(f.d[0]);
  return compose<Scalar>({e, e, e, e, e}, f);
}

template <class Scalar>
Jet<Scalar> log(const Jet<Scalar>& f) {
  using std::log;
  const Scalar u = f.d[0];
  const Scalar i1 = Scalar(1) / u, i2 = i1 * i1;
  return compose<Scalar>({log(u), i1, -i2, 2 * i2 * i1, -6 * i2 * i2}, f);
}

template <class Scalar>
Jet<Scalar> sin(const Jet<Scalar>& f) {
  using std::cos;
  using std::sin;
  const Scalar s = sin(f.d[0]), c = cos(f.d[0]);
  return compose<Scalar>({s, c, -s, -c, s}, f);
}

template <class Scalar>
Jet<Scalar> cos(const Jet<Scalar>& f) {
  using std::cos;
  using std::sin;
  const Scalar s = sin(f.d[0]), c = cos(f.d[0]);
  return compose<Scalar>({c, -s, -c, s, c}, f);
}

template <class Scalar>
Jet<Scalar> sqrt(const Jet<Scalar>& f) {
  using std::sqrt;
  const Scalar u = f.d[0];
  const Scalar s = sqrt(u);
  const Scalar i = Scalar(1) / u;
  const Scalar p1 = Scalar(0.5) * s * i;          // (1/2) u^{-1/2}
  const Scalar p2 = Scalar(-0.5) * p1 * i;        // (-1/4) u^{-3/2}
  const Scalar p3 = Scalar(-1.5) * p2 * i;        // (3/8)  u^{-5/2}
  const Scalar p4 = Scalar(-2.5) * p3 * i;        // (-15/16) u^{-7/2}
  return compose<Scalar>({s, p1, p2, p3, p4}, f);
}

template <class Scalar>
Jet<Scalar> reciprocal(const Jet<Scalar>& f) {
  const Scalar i = Scalar(1) / f.d[0];
  const Scalar i2 = i * i;
  return compose<Scalar>({i, -i2, 2 * i2 * i, -6 * i2 * i2, 24 * i2 * i2 * i}, f);
}

template <class Scalar>
constexpr Jet<Scalar> operator/(const Jet<Scalar>& a, const Jet<Scalar>& b) {
  return a * reciprocal(b);
}
template <class Scalar>
Jet<Scalar> operator/(Scalar s, const Jet<Scalar>& b) {
  return reciprocal(b) * s;
}

/// f^c for constant exponent c; valid for negative base when c is integral.
template <class Scalar>
Jet<Scalar> pow(const Jet<Scalar>& f, Scalar c) {
  using std::pow;
  const Scalar u = f.d[0];
  std::array<Scalar, 5> outer;
  outer[0] = pow(u, c);
  Scalar coeff = Scalar(1);
  for (int k = 1; k <= 4; ++k) {
    coeff *= c - Scalar(k - 1);
    // once the falling factorial hits zero the derivative ladder ends;
    // evaluating pow there would turn 0 * inf into NaN at u = 0
    outer[static_cast<std::size_t>(k)] =
        coeff == Scalar(0) ? Scalar(0) : coeff * pow(u, c - Scalar(k));
  }
  return compose(outer, f);
}

/// General power through exp(g log f); requires f > 0.
template <class Scalar>
Jet<Scalar> pow(const Jet<Scalar>& f, const Jet<Scalar>& g) {
  return exp(g * log(f));
}

using Jet4 = Jet<double>;

}  // namespace crossings

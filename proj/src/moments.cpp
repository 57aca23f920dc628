#include "crossings/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "crossings/diagnostics.hpp"
#include "crossings/error.hpp"
#include "crossings/quadrature.hpp"

namespace crossings {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kSqrt2OverPi = std::sqrt(2.0 / std::numbers::pi);
constexpr double kSingularFloor = 1e-12;  // 1 - r^2 below this counts as singular

double Phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

struct LagPoint {
  double e = 0.0;  // 1 - r^2
  double r = 0.0;
  double r1 = 0.0;
  RegressionCoefficients reg;
};

// Shared lag evaluation: stable 1 - r^2 and the regression bundle, with the
// asymptotic branch below the model's crossover.
LagPoint eval_lag(const CovarianceModel& model, double tau, double x, double sigma2_scale) {
  if (model.synthetic())
    throw Error(ErrorKind::Unsupported, "synthetic models carry no regression structure");
  if (!(tau > 0.0) || tau > model.delta_max())
    throw Error(ErrorKind::Domain, "lag outside (0, delta_max]");

  const double c = -model.rpp0();
  const auto& sl = model.small_lag();
  Jet4 j = model.derivatives_at(tau);
  LagPoint p;
  p.r = j.d[0];
  p.r1 = j.d[1];

  long double rl = static_cast<long double>(j.d[0]);
  long double u = 1.0L - rl;
  // theta-based upgrade of 1 - r when the quadratic part dominates roundoff
  if (tau < 0.1) {
    try {
      double theta = model.theta_at(tau);
      if (std::isfinite(theta))
        u = static_cast<long double>(c) * tau * tau / 2.0L - static_cast<long double>(theta);
    } catch (const Error&) {
    }
  }
  long double e = u * (2.0L - u);
  p.e = static_cast<double>(e);
  // the healthy endpoint law is e ~ c tau^2; singular means anomalously
  // small e at an interior lag (periodic covariance touching +-1)
  bool singular = !(p.e > 0.0) ||
                  (p.e < kSingularFloor && p.e < 0.01 * c * tau * tau);
  if (singular)
    throw Error(ErrorKind::Singular,
                "1 - r^2 vanishes at tau = " + std::to_string(tau) + " (singular lag)");

  RegressionCoefficients& reg = p.reg;
  reg.tau = tau;
  if (sl.usable && tau < sl.tau_c) {
    double t2 = tau * tau;
    reg.sigma2 = sl.q0 * t2 * (1.0 + sl.s2 * t2);
    reg.rho = std::max(-1.0, -1.0 + sl.kappa * t2);
  } else {
    long double r1l = static_cast<long double>(j.d[1]);
    long double r2l = static_cast<long double>(j.d[2]);
    long double cl = static_cast<long double>(c);
    long double s2 = cl - r1l * r1l / e;
    long double den = cl * e - r1l * r1l;
    long double rho = (-r2l * e - r1l * r1l * rl) / den;
    reg.sigma2 = static_cast<double>(s2);
    reg.rho = std::clamp(static_cast<double>(rho), -1.0, 1.0);
  }
  reg.sigma2 *= sigma2_scale;
  const double degenerate_floor = 1e-10 * c * std::min(1.0, 0.25 * c * tau * tau);
  if (!(reg.sigma2 > degenerate_floor))
    throw Error(ErrorKind::Degenerate,
                "sigma^2(tau) = " + std::to_string(reg.sigma2) +
                    " at tau = " + std::to_string(tau) +
                    ": perfectly predictable process (degenerate)");
  reg.alpha1 = static_cast<double>(static_cast<long double>(p.r1) * rl / e);
  reg.alpha2 = static_cast<double>(-static_cast<long double>(p.r1) / e);
  reg.m = p.r1 * x / ((1.0 + p.r) * std::sqrt(reg.sigma2));
  return p;
}

// 64x64 tensor Gauss-Hermite of the absolute-value integrand, via the
// conditional decomposition Z2 = rho Z1 + sqrt(1 - rho^2) W.
double mehler_gh_fallback(double m1, double m2, double rho) {
  const auto& gh = quad::gauss_hermite(64);
  const double s = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  double total = 0.0;
  for (int i = 0; i < 64; ++i) {
    double z = gh.nodes[i];
    double inner = 0.0;
    for (int jj = 0; jj < 64; ++jj)
      inner += gh.weights[jj] * std::abs(rho * z + s * gh.nodes[jj] + m2);
    total += gh.weights[i] * std::abs(z + m1) * inner;
  }
  return total;
}

struct MehlerSeries {
  double value = 0.0;
  int terms = 0;
};

MehlerSeries mehler_series(double m1, double m2, double rho, double tol) {
  // a_k(-m1) a_k(-m2) k! rho^k with the k >= 2 block in normalized Hermite
  // form: (2/pi) e^{-(m1^2+m2^2)/2} h_{k-2}(-m1) h_{k-2}(-m2) rho^k /(k(k-1))
  // where h_n = H_n / sqrt(n!) stays O(1).
  const double n1 = -m1, n2 = -m2;
  auto a0 = [](double m) {
    return m * (2.0 * Phi(m) - 1.0) + kSqrt2OverPi * std::exp(-0.5 * m * m);
  };
  auto a1 = [](double m) { return 1.0 - 2.0 * Phi(m); };
  double sum = a0(n1) * a0(n2);
  MehlerSeries out;
  out.terms = 1;
  if (rho == 0.0) {
    out.value = sum;
    return out;
  }
  sum += a1(n1) * a1(n2) * rho;
  ++out.terms;
  const double pref = (2.0 / std::numbers::pi) * std::exp(-0.5 * (m1 * m1 + m2 * m2));
  double h1_prev = 0.0, h1 = 1.0;  // h_{n-1}, h_n at n = 0, argument n1
  double h2_prev = 0.0, h2 = 1.0;
  double rho_k = rho * rho;
  const double q = std::abs(rho);
  double last = kInf, prev_last = kInf;
  for (int k = 2; k <= 200000; ++k) {
    int n = k - 2;
    double term = pref * h1 * h2 * rho_k / (k * (k - 1.0));
    sum += term;
    ++out.terms;
    prev_last = last;
    last = std::abs(term);
    double envelope = std::max(last, prev_last);
    if (envelope * q / (1.0 - q) < tol) break;
    // h_{n+1} = (x h_n - sqrt(n) h_{n-1}) / sqrt(n+1)
    double h1_next = (n1 * h1 - std::sqrt(static_cast<double>(n)) * h1_prev) /
                     std::sqrt(static_cast<double>(n + 1));
    double h2_next = (n2 * h2 - std::sqrt(static_cast<double>(n)) * h2_prev) /
                     std::sqrt(static_cast<double>(n + 1));
    h1_prev = h1;
    h1 = h1_next;
    h2_prev = h2;
    h2 = h2_next;
    rho_k *= rho;
  }
  out.value = sum;
  return out;
}

struct LevelIntegrand {
  const CovarianceModel& model;
  double x;
  double t;
  double series_tol;
  double sigma2_scale;
  mutable int max_terms = 0;

  double operator()(double tau) const {
    LagPoint p = eval_lag(model, tau, x, sigma2_scale);
    int terms = 0;
    double A = mehler_cross_tracked(p.reg.m, -p.reg.m, p.reg.rho, series_tol, terms);
    max_terms = std::max(max_terms, terms);
    double dens = std::exp(-x * x / (1.0 + p.r)) / (2.0 * std::numbers::pi * std::sqrt(p.e));
    return 2.0 * (t - tau) * dens * p.reg.sigma2 * A;
  }
};

// Geometric graded mesh on (tau_lo, tau_hi], panels summed ascending.
template <class F>
double graded_mesh(const F& f, double tau_lo, double tau_hi, int gl_order = 15) {
  if (!(tau_hi > tau_lo)) return 0.0;
  std::vector<std::pair<double, double>> panels;
  double hi = tau_hi;
  while (hi > tau_lo * 1.0000001) {
    double lo = std::max(tau_lo, hi * 0.5);
    panels.emplace_back(lo, hi);
    hi = lo;
  }
  double total = 0.0;
  for (auto it = panels.rbegin(); it != panels.rend(); ++it)
    total +=
        quad::gl_integrate([&](double tau) { return f(tau); }, it->first, it->second, gl_order);
  return total;
}

// Adaptive panels on [a, b]; panels that run into a singular lag shrink to
// the guard radius and are dropped with their mass bounded into `excluded`.
template <class F>
double smooth_part(const F& f, double a, double b, double tol, double guard, double& err,
                   double& excluded) {
  struct Seg {
    double a, b;
  };
  std::vector<Seg> work{{a, b}};
  double total = 0.0;
  err = 0.0;
  excluded = 0.0;
  int safety = 0;
  while (!work.empty() && ++safety < 20000) {
    Seg s = work.back();
    work.pop_back();
    double v = 0.0, e = 0.0;
    bool singular = false;
    try {
      quad::gk15_panel([&](double tau) { return f(tau); }, s.a, s.b, v, e);
    } catch (const Error& ex) {
      if (ex.kind() != ErrorKind::Singular) throw;
      singular = true;
    }
    if (singular) {
      if (s.b - s.a <= 2.0 * guard) {
        double edge = 0.0;
        for (double probe : {s.a - 0.5 * guard, s.b + 0.5 * guard}) {
          try {
            edge = std::max(edge, std::abs(f(probe)));
          } catch (const Error&) {
          }
        }
        excluded += (s.b - s.a) * edge;
        continue;
      }
      double mid = 0.5 * (s.a + s.b);
      work.push_back({s.a, mid});
      work.push_back({mid, s.b});
      continue;
    }
    if (e <= tol * std::max(1.0, (s.b - s.a) / (b - a)) || s.b - s.a < 1e-12 * (b - a)) {
      total += v;
      err += e;
    } else {
      double mid = 0.5 * (s.a + s.b);
      work.push_back({s.a, mid});
      work.push_back({mid, s.b});
    }
  }
  return total;
}

// Smallest lag at which rho(tau) has risen above the series/fallback
// boundary; rho increases from -1 with tau^2 for every validated model.
double fallback_boundary(const CovarianceModel& model, double lo, double hi,
                         double sigma2_scale) {
  auto rho_at = [&](double tau) { return eval_lag(model, tau, 0.0, sigma2_scale).reg.rho; };
  if (rho_at(hi) < -0.99) return hi;
  if (rho_at(lo) >= -0.99) return lo;
  for (int i = 0; i < 48; ++i) {
    double mid = 0.5 * (lo + hi);
    (rho_at(mid) < -0.99 ? lo : hi) = mid;
  }
  return hi;
}

constexpr double kFallbackAccuracy = 0.012;  // measured 64x64 tensor GH level

}  // namespace

// ---------------------------------------------------------------------------

double RegressionCoefficients::sigma() const { return std::sqrt(sigma2); }

RegressionCoefficients regression_at(const CovarianceModel& model, double tau, double x) {
  return eval_lag(model, tau, x, 1.0).reg;
}

double rice_mean(const CovarianceModel& model, double x, double t) {
  if (model.synthetic())
    throw Error(ErrorKind::Unsupported, "synthetic models have no crossing counts");
  if (t < 0.0) throw Error(ErrorKind::Domain, "horizon must be nonnegative");
  return t * std::exp(-0.5 * x * x) * std::sqrt(-model.rpp0()) / std::numbers::pi;
}

double rice_mean_curve(const CovarianceModel& model, const CurveSpec& curve, double t) {
  if (model.synthetic())
    throw Error(ErrorKind::Unsupported, "synthetic models have no crossing counts");
  if (t < 0.0) throw Error(ErrorKind::Domain, "horizon must be nonnegative");
  const double sc = std::sqrt(-model.rpp0());
  auto a0 = [](double m) {
    return m * (2.0 * Phi(m) - 1.0) + kSqrt2OverPi * std::exp(-0.5 * m * m);
  };
  auto f = [&](double s) {
    double psi = curve.psi(s);
    double phi_psi = std::exp(-0.5 * psi * psi) / std::sqrt(2.0 * std::numbers::pi);
    return phi_psi * sc * a0(curve.psi_dot(s) / sc);
  };
  return quad::adaptive_gk(f, 0.0, t, 1e-10, 1e-10, 2000).value;
}

HermiteCoefficients hermite_coeffs(double m, int K) {
  if (K < 2) throw Error(ErrorKind::Domain, "hermite_coeffs needs K >= 2");
  HermiteCoefficients hc;
  hc.m = m;
  hc.a.resize(static_cast<std::size_t>(K) + 1);
  const double gauss = kSqrt2OverPi * std::exp(-0.5 * m * m);
  hc.a[0] = m * (2.0 * Phi(m) - 1.0) + gauss;
  hc.a[1] = 1.0 - 2.0 * Phi(m);
  // c_n = H_n(m) / (n+2)! by a scaled three-term recurrence; no factorial
  // ever materializes
  double c_prev = 0.0;
  double c_cur = 0.5;  // H_0 / 2!
  for (int l = 2; l <= K; ++l) {
    hc.a[static_cast<std::size_t>(l)] = gauss * c_cur;
    int n = l - 1;  // index of the next Hermite polynomial
    double c_next = m * c_cur / (n + 2) - (n - 1.0) * c_prev / ((n + 2.0) * (n + 1.0));
    c_prev = c_cur;
    c_cur = c_next;
  }
  return hc;
}

double mehler_cross(double m1, double m2, double rho, double tol) {
  int terms = 0;
  return mehler_cross_tracked(m1, m2, rho, tol, terms);
}

double mehler_cross_tracked(double m1, double m2, double rho, double tol, int& terms_used) {
  if (std::abs(rho) > 1.0 + 1e-12) throw Error(ErrorKind::Domain, "|rho| must not exceed 1");
  rho = std::clamp(rho, -1.0, 1.0);
  if (!(tol > 0.0)) throw Error(ErrorKind::Domain, "series tolerance must be positive");
  if (std::abs(rho) > 0.99) {
    terms_used = 64 * 64;
    return mehler_gh_fallback(m1, m2, rho);
  }
  MehlerSeries s = mehler_series(m1, m2, rho, tol);
  terms_used = s.terms;
  return s.value;
}

double bivariate_density(const CovarianceModel& model, double tau, double x) {
  return bivariate_density_pair(model, tau, x, x);
}

double bivariate_density_pair(const CovarianceModel& model, double tau, double x1, double x2) {
  LagPoint p = eval_lag(model, tau, 0.0, 1.0);
  double q = (x1 * x1 - 2.0 * p.r * x1 * x2 + x2 * x2) / (2.0 * p.e);
  return std::exp(-q) / (2.0 * std::numbers::pi * std::sqrt(p.e));
}

// ---------------------------------------------------------------------------

MomentResult second_factorial_moment(const CovarianceModel& model, double x, double t,
                                     double delta, const QuadControl& control,
                                     bool geman_nonintegrable) {
  MomentResult res;
  res.t = t;
  res.target = "level " + std::to_string(x);
  res.rice_mean = rice_mean(model, x, t);
  if (geman_nonintegrable) {
    res.finite = false;
    res.m2 = kInf;
    res.m2_delta = kInf;
    res.variance = kInf;
    return res;
  }
  if (t <= 0.0) return res;

  LevelIntegrand g{model, x, t, control.series_tol, control.sigma2_scale};
  double split = std::min(delta, 0.5 * t);
  double tmin = control.tau_min;

  // singular-endpoint part, Richardson tail from two halvings of tau_min
  double part0 = graded_mesh(g, tmin, split);
  double p1 = graded_mesh(g, 0.5 * tmin, tmin);
  double p2 = graded_mesh(g, 0.25 * tmin, 0.5 * tmin);
  double tail = p1 + p2, tail_err = std::abs(p1) + std::abs(p2);
  if (p1 > 0.0 && p2 > 0.0 && p2 < 0.95 * p1) {
    double ratio = p2 / p1;
    double beyond = p2 * ratio / (1.0 - ratio);
    tail += beyond;
    tail_err = std::abs(beyond) + 0.1 * std::abs(tail);
  }
  res.m2_delta = part0 + tail;

  double smooth_err = 0.0, excluded = 0.0, smooth = 0.0;
  if (t > split)
    smooth = smooth_part(g, split, t, control.quad_tol, control.guard, smooth_err, excluded);
  // isolated dips of 1 - r^2 are dropped into the error budget; a dominating
  // exclusion means the lag is a true zero of 1 - r^2 where the two-point
  // density degenerates and the moment integral diverges
  if (excluded > std::max(0.05 * std::abs(res.m2_delta + smooth), 10.0 * control.quad_tol))
    throw Error(ErrorKind::Singular,
                "interior singular lag dominates the quadrature (excluded mass " +
                    std::to_string(excluded) + "); the covariance touches +-1 inside [delta, t]");

  // the tensor-GH fallback near rho = -1 carries percent-level accuracy;
  // charge that region's mass to the error budget
  double tau_star = fallback_boundary(model, tmin, split, control.sigma2_scale);
  double fallback_mass = tau_star > tmin ? graded_mesh(g, tmin, tau_star) : 0.0;

  res.m2 = res.m2_delta + smooth;
  res.quad_error = tail_err + smooth_err + excluded + kFallbackAccuracy * std::abs(fallback_mass);
  res.series_K = g.max_terms;
  res.variance = res.m2 + res.rice_mean - res.rice_mean * res.rice_mean;
  return res;
}

MomentResult second_factorial_moment_checked(const CovarianceModel& model, double x, double t,
                                             double delta, const QuadControl& control) {
  GemanReport rep = classify_geman(model, std::min(delta, model.delta_max()));
  return second_factorial_moment(model, x, t, delta, control,
                                 rep.verdict == Verdict::NonIntegrable);
}

double variance_of_count(const MomentResult& result) {
  if (!result.finite)
    throw Error(ErrorKind::Domain, "variance undefined: second moment is infinite");
  return result.m2 + result.rice_mean - result.rice_mean * result.rice_mean;
}

// ---------------------------------------------------------------------------

namespace {

struct CurveIntegrand {
  const CovarianceModel& model;
  const CurveSpec& curve;
  double t1;
  double series_tol;
  double sigma2_scale;
  mutable int max_terms = 0;

  double operator()(double tau) const {
    LagPoint p = eval_lag(model, tau, 0.0, sigma2_scale);
    double psi1 = curve.psi(t1), psi2 = curve.psi(t1 + tau);
    double dpsi1 = curve.psi_dot(t1), dpsi2 = curve.psi_dot(t1 + tau);
    double sigma = std::sqrt(p.reg.sigma2);
    double m1 = (p.reg.alpha1 * psi1 + p.reg.alpha2 * psi2 - dpsi1) / sigma;
    double m2 = (-p.reg.alpha2 * psi1 - p.reg.alpha1 * psi2 - dpsi2) / sigma;
    double q = (psi1 * psi1 - 2.0 * p.r * psi1 * psi2 + psi2 * psi2) / (2.0 * p.e);
    double dens = std::exp(-q) / (2.0 * std::numbers::pi * std::sqrt(p.e));
    int terms = 0;
    double A = mehler_cross_tracked(m1, m2, p.reg.rho, series_tol, terms);
    max_terms = std::max(max_terms, terms);
    return dens * p.reg.sigma2 * A;
  }
};

}  // namespace

MomentResult curve_second_moment(const CovarianceModel& model, const CurveSpec& curve, double t,
                                 double delta, const QuadControl& control,
                                 bool geman_nonintegrable) {
  MomentResult res;
  res.t = t;
  res.target = curve.describe();
  res.rice_mean = rice_mean_curve(model, curve, t);
  if (geman_nonintegrable) {
    res.finite = false;
    res.m2 = kInf;
    res.m2_delta = kInf;
    res.variance = kInf;
    return res;
  }
  if (t <= 0.0) return res;

  const double tau_floor = std::max(control.tau_min, 1e-8);
  double err_sum = 0.0, excluded_sum = 0.0, fallback_sum = 0.0;
  int max_terms = 0;
  const double tau_star =
      fallback_boundary(model, tau_floor, std::min(delta, 0.5 * t), control.sigma2_scale);

  // inner integral in tau for a fixed t1; near + tail is the (0, delta] part
  auto inner = [&](double t1, double& delta_part) {
    double span = t - t1;
    delta_part = 0.0;
    if (span <= tau_floor) return 0.0;
    CurveIntegrand f{model, curve, t1, control.series_tol, control.sigma2_scale};
    double split = std::min(delta, 0.5 * span);
    double boundary = std::clamp(tau_star, tau_floor, split);
    double near_fb = boundary > tau_floor ? graded_mesh(f, tau_floor, boundary) : 0.0;
    fallback_sum += std::abs(near_fb);
    double near = near_fb + graded_mesh(f, boundary, split);
    double tail1 = graded_mesh(f, 0.5 * tau_floor, tau_floor);
    double tail2 = graded_mesh(f, 0.25 * tau_floor, 0.5 * tau_floor);
    double tail = tail1 + tail2;
    if (tail1 > 0.0 && tail2 > 0.0 && tail2 < 0.95 * tail1)
      tail += tail2 * (tail2 / tail1) / (1.0 - tail2 / tail1);
    err_sum += 0.5 * std::abs(tail);
    double serr = 0.0, sexc = 0.0, smooth = 0.0;
    if (span > split)
      smooth = smooth_part(f, split, span, control.quad_tol, control.guard, serr, sexc);
    err_sum += serr;
    excluded_sum += sexc;
    max_terms = std::max(max_terms, f.max_terms);
    delta_part = near + tail;
    return near + tail + smooth;
  };

  const int panels = std::max(8, control.outer_panels);
  const auto& rule = quad::gauss_legendre(8);
  double total = 0.0, delta_total = 0.0;
  for (int pnl = 0; pnl < panels; ++pnl) {
    double a = t * pnl / panels, b = t * (pnl + 1) / panels;
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < 8; ++i) {
      double dpart = 0.0;
      double v = inner(mid + half * rule.nodes[i], dpart);
      total += rule.weights[i] * half * v;
      delta_total += rule.weights[i] * half * dpart;
    }
  }
  if (excluded_sum > std::max(0.05 * std::abs(total), 10.0 * control.quad_tol))
    throw Error(ErrorKind::Singular,
                "interior singular lag dominates the quadrature; the covariance touches +-1 "
                "inside the integration range");
  res.m2 = 2.0 * total;
  res.m2_delta = 2.0 * delta_total;
  res.quad_error = 2.0 * (err_sum * t / (8.0 * panels) + excluded_sum +
                          kFallbackAccuracy * fallback_sum * t / (8.0 * panels));
  res.series_K = max_terms;
  res.variance = res.m2 + res.rice_mean - res.rice_mean * res.rice_mean;
  return res;
}

MomentResult curve_second_moment_checked(const CovarianceModel& model, const CurveSpec& curve,
                                         double t, double delta, const QuadControl& control) {
  CurveConditionReport cc = curve_condition(curve, std::min(delta, t));
  if (cc.verdict == Verdict::NonIntegrable)
    throw Error(ErrorKind::Domain,
                "curve condition violated: integral of gamma(s)/s diverges; the theorem's "
                "hypothesis fails");
  GemanReport rep = classify_geman(model, std::min(delta, model.delta_max()));
  return curve_second_moment(model, curve, t, delta, control,
                             rep.verdict == Verdict::NonIntegrable);
}

}  // namespace crossings

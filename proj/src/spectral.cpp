#include "crossings/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "crossings/detail/series.hpp"
#include "crossings/error.hpp"
#include "crossings/quadrature.hpp"

namespace crossings {
namespace osc {
namespace {

constexpr double kLambda0 = 2.718281828459045235;  // tail starts at e

// (1 - e/lambda)^2 lifts off C^1-smoothly at the edge, so the covariance
// transform decays like 1/tau^3 instead of ringing at 1/tau.
double envelope(double lam, int p) {
  double lg = std::log(lam);
  double soft = 1.0 - kLambda0 / lam;
  return soft * soft * std::pow(lam, -p) / (lg * lg);
}

// envelope is unimodal: it rises off zero at e and decays past ~3e
constexpr double kEnvelopeTail = 4.0 * kLambda0;

// Sum of half-period integrals; the alternating tail is squeezed by repeated
// averaging of the partial sums.
double half_period_sum(const std::function<double(double)>& f, double start, double half_period,
                       int terms) {
  std::vector<double> partial(static_cast<std::size_t>(terms));
  double acc = 0.0;
  for (int k = 0; k < terms; ++k) {
    acc += quad::gl_integrate(f, start + k * half_period, start + (k + 1) * half_period, 12);
    partial[static_cast<std::size_t>(k)] = acc;
  }
  std::vector<double> row(partial.end() - terms / 2, partial.end());
  while (row.size() > 1) {
    for (std::size_t i = 0; i + 1 < row.size(); ++i) row[i] = 0.5 * (row[i] + row[i + 1]);
    row.pop_back();
  }
  return row[0];
}

double tail_trig(double tau, int p, bool use_sin) {
  if (tau == 0.0) return use_sin ? 0.0 : tail_mass(p);
  const double period = 2.0 * std::numbers::pi / tau;
  const double lambda_split = std::max(kEnvelopeTail, period);
  auto f = [&](double lam) {
    double t = use_sin ? std::sin(lam * tau) : std::cos(lam * tau);
    return t * envelope(lam, p);
  };
  double head = 0.0;
  if (lambda_split > kLambda0)
    head = quad::adaptive_gk(f, kLambda0, lambda_split, 1e-13, 1e-12, 6000).value;
  double tail = half_period_sum(f, lambda_split, 0.5 * period, 64);
  return head + tail;
}

double compute_mass(int p) {
  // s = log lambda; the integrand decays like e^{(1-p)s} (p > 1) or 1/s^2
  auto f = [&](double s) {
    double soft = 1.0 - std::exp(1.0 - s);
    return std::exp((1.0 - p) * s) * soft * soft / (s * s);
  };
  double hi = p == 1 ? 1e7 : (p == 2 ? 45.0 : 25.0);
  double v = quad::adaptive_gk(f, 1.0, hi, 1e-16, 1e-13, 8000).value;
  if (p == 1) v += 1.0 / hi;  // integrand ~ 1/s^2 past the cutoff
  return v;
}

// integral of the envelope over [from, inf)
double env_mass_from(int p, double from) {
  auto f = [&](double s) {
    double soft = 1.0 - std::exp(1.0 - s);
    return std::exp((1.0 - p) * s) * soft * soft / (s * s);
  };
  double lo = std::log(from);
  double hi = p == 1 ? 1e7 : (p == 2 ? 50.0 : 30.0);
  double v = quad::adaptive_gk(f, lo, hi, 1e-16, 1e-13, 8000).value;
  if (p == 1) v += 1.0 / hi;
  return v;
}

}  // namespace

double tail_envelope(double lam, int p) { return lam <= kLambda0 ? 0.0 : envelope(lam, p); }

double tail_mass(int p) {
  static const double m1 = compute_mass(1);
  static const double m2 = compute_mass(2);
  static const double m3 = compute_mass(3);
  if (p == 1) return m1;
  if (p == 2) return m2;
  return m3;
}

double tail_cos(double tau, int p) { return tail_trig(std::abs(tau), p, false); }

double tail_sin(double tau, int p) {
  double v = tail_trig(std::abs(tau), p, true);
  return tau < 0 ? -v : v;
}

double tail_one_minus_cos(double tau) {
  tau = std::abs(tau);
  if (tau == 0.0) return 0.0;
  const double period = 2.0 * std::numbers::pi / tau;
  const double lambda_split = std::max(kEnvelopeTail, period);
  // 1 - cos written as 2 sin^2 to survive tiny tau
  auto head_f = [&](double lam) {
    double s = std::sin(0.5 * lam * tau);
    return 2.0 * s * s * envelope(lam, 1);
  };
  double head = quad::adaptive_gk(head_f, kLambda0, lambda_split, 1e-13, 1e-11, 6000).value;
  double const_part = env_mass_from(1, lambda_split);
  auto cos_f = [&](double lam) { return std::cos(lam * tau) * envelope(lam, 1); };
  double cos_part = half_period_sum(cos_f, lambda_split, 0.5 * period, 64);
  return head + const_part - cos_part;
}

}  // namespace osc

// ---------------------------------------------------------------------------

SpectralDensity SpectralDensity::from_expression(std::string_view expr_in_lambda,
                                                 double lambda_max) {
  if (lambda_max <= 0.0) throw Error(ErrorKind::Config, "spectral lambda_max must be positive");
  SpectralDensity sd;
  sd.expr_ = expr::parse(expr_in_lambda, "lambda");
  sd.lambda_max_ = lambda_max;
  sd.text_ = std::string(expr_in_lambda);
  sd.normalize();
  return sd;
}

SpectralDensity SpectralDensity::from_table(std::vector<double> lambda,
                                            std::vector<double> values) {
  if (lambda.size() != values.size() || lambda.size() < 2)
    throw Error(ErrorKind::Config, "spectral table needs matching (lambda, f) columns, >= 2 rows");
  if (!std::is_sorted(lambda.begin(), lambda.end()))
    throw Error(ErrorKind::Config, "spectral table lambdas must be increasing");
  for (double v : values)
    if (v < 0.0) throw Error(ErrorKind::Config, "spectral table values must be nonnegative");
  SpectralDensity sd;
  sd.tab_lambda_ = std::move(lambda);
  sd.tab_value_ = std::move(values);
  sd.lambda_max_ = sd.tab_lambda_.back();
  sd.text_ = "table[" + std::to_string(sd.tab_lambda_.size()) + "]";
  sd.normalize();
  return sd;
}

double SpectralDensity::raw(double lambda) const {
  if (expr_) {
    double v = expr::eval(*expr_, lambda);
    return v > 0.0 ? v : 0.0;
  }
  if (lambda < tab_lambda_.front() || lambda > tab_lambda_.back()) return 0.0;
  auto it = std::upper_bound(tab_lambda_.begin(), tab_lambda_.end(), lambda);
  if (it == tab_lambda_.begin()) return tab_value_.front();
  if (it == tab_lambda_.end()) return tab_value_.back();
  std::size_t i = static_cast<std::size_t>(it - tab_lambda_.begin());
  double t = (lambda - tab_lambda_[i - 1]) / (tab_lambda_[i] - tab_lambda_[i - 1]);
  return tab_value_[i - 1] + t * (tab_value_[i] - tab_value_[i - 1]);
}

double SpectralDensity::moment_raw(int k) const {
  auto f = [&](double lam) { return std::pow(lam, k) * raw(lam); };
  return quad::adaptive_gk(f, 0.0, lambda_max_, 1e-13, 1e-11, 8000).value;
}

void SpectralDensity::normalize() {
  mass_ = moment_raw(0);
  if (!(mass_ > 0.0))
    throw Error(ErrorKind::Validation, "spectral density has zero mass on its domain");
  m2_ = moment_raw(2) / mass_;
  m4_ = moment_raw(4) / mass_;
}

std::vector<double> SpectralDensity::covariance_derivs(double tau, int order) const {
  std::vector<double> out(static_cast<std::size_t>(order) + 1, 0.0);
  for (int k = 0; k <= order; ++k) {
    static constexpr double sign[4] = {1.0, -1.0, -1.0, 1.0};
    bool use_sin = (k % 2) == 1;
    auto f = [&](double lam) {
      double t = use_sin ? std::sin(lam * tau) : std::cos(lam * tau);
      return t * std::pow(lam, k) * raw(lam);
    };
    double v = quad::adaptive_gk(f, 0.0, lambda_max_, 1e-12, 1e-10, 8000).value / mass_;
    out[static_cast<std::size_t>(k)] = sign[k % 4] * v;
  }
  return out;
}

double SpectralDensity::theta2(double tau) const {
  auto f = [&](double lam) {
    double s = std::sin(0.5 * lam * tau);
    return 2.0 * s * s * lam * lam * raw(lam);
  };
  return quad::adaptive_gk(f, 0.0, lambda_max_, 1e-14, 1e-10, 8000).value / mass_;
}

double SpectralDensity::theta0(double tau) const {
  auto f = [&](double lam) { return detail::cosm1_plus_half(lam * tau) * raw(lam); };
  return quad::adaptive_gk(f, 0.0, lambda_max_, 1e-15, 1e-10, 8000).value / mass_;
}

double SpectralDensity::theta1(double tau) const {
  auto f = [&](double lam) { return lam * detail::u_minus_sin(lam * tau) * raw(lam); };
  return quad::adaptive_gk(f, 0.0, lambda_max_, 1e-15, 1e-10, 8000).value / mass_;
}

double SpectralDensity::density(double lambda) const {
  if (lambda < 0.0 || lambda > lambda_max_) return 0.0;
  return raw(lambda) / mass_;
}

std::string SpectralDensity::describe() const { return "spectral(" + text_ + ")"; }

}  // namespace crossings

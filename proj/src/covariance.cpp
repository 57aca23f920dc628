#include "crossings/covariance.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <vector>

#include "crossings/detail/series.hpp"
#include "crossings/error.hpp"

namespace crossings {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr long double kEpsL = 1.0842e-19L;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Heavy-tail mixture pieces: (1 - w) Gaussian spectrum + w log^2 tail.
struct Log2TailParts {
  double w = 0.0;
  double z3 = 1.0;       // mass of the tail envelope at p = 3
  double tail_m2 = 0.0;  // tail second moment = tail_mass(1)/z3

  double r(double tau) const {
    return (1.0 - w) * std::exp(-0.5 * tau * tau) + w * osc::tail_cos(tau, 3) / z3;
  }
  double r1(double tau) const {
    return (1.0 - w) * (-tau) * std::exp(-0.5 * tau * tau) - w * osc::tail_sin(tau, 2) / z3;
  }
  double r2(double tau) const {
    return (1.0 - w) * (tau * tau - 1.0) * std::exp(-0.5 * tau * tau) -
           w * osc::tail_cos(tau, 1) / z3;
  }
  double r2_at0() const { return -((1.0 - w) + w * tail_m2); }
  double theta2(double tau) const {
    double u = 0.5 * tau * tau;
    double gauss = tau * tau * std::exp(-u) - std::expm1(-u);
    return (1.0 - w) * gauss + w * osc::tail_one_minus_cos(tau) / z3;
  }
};

enum class Builtin { None, Gaussian, Cosine };

}  // namespace

struct CovarianceModel::Impl {
  enum class Kind { Expression, Spectral, Synthetic, GaussLog2Tail };
  Kind kind = Kind::Expression;
  std::string name;
  expr::NodePtr ast;  // covariance expression, or theta'' for Synthetic
  std::optional<SpectralDensity> density;
  Log2TailParts tail;
  Builtin builtin = Builtin::None;
  double param = 0.0;  // builtin parameter (scale or frequency)
  double delta_max = 0.0;
  double veps = 1e-9;
  bool simulable = false;
  Eq1Check eq1;
  double c = 0.0;        // -r''(0)
  long double cl = 0.0L; // same, full long double precision
  double d4 = kInf;      // r''''(0)
  SmallLag small;

  Jet<long double> jet_hi(double tau) const {
    return expr::eval(*ast, Jet<long double>::variable(static_cast<long double>(tau)));
  }
  Jet4 jet(double tau) const {
    switch (kind) {
      case Kind::Expression:
        return expr::eval(*ast, Jet4::variable(tau));
      case Kind::Spectral: {
        auto d = density->covariance_derivs(tau, 4);
        return Jet4{d[0], d[1], d[2], d[3], d[4]};
      }
      case Kind::GaussLog2Tail:
        return Jet4{tail.r(tau), tail.r1(tau), tail.r2(tau), kNaN, kNaN};
      case Kind::Synthetic:
        throw Error(ErrorKind::Unsupported,
                    "synthetic theta''-models expose only L and theta''; r is undefined");
    }
    return Jet4{};
  }
  double r_value(double tau) const {
    switch (kind) {
      case Kind::Expression: return expr::eval(*ast, tau);
      case Kind::Spectral: return density->covariance_derivs(tau, 0)[0];
      case Kind::GaussLog2Tail: return tail.r(tau);
      case Kind::Synthetic:
        throw Error(ErrorKind::Unsupported, "synthetic model has no covariance values");
    }
    return 0.0;
  }
  // r''(tau) - r''(0) through the most stable route available per kind.
  double theta2(double tau) const {
    switch (kind) {
      case Kind::Expression: {
        if (builtin == Builtin::Gaussian) {
          double s2 = param * param;
          double u = 0.5 * tau * tau / s2;
          return (tau * tau / (s2 * s2)) * std::exp(-u) - std::expm1(-u) / s2;
        }
        if (builtin == Builtin::Cosine) {
          double s = std::sin(0.5 * param * tau);
          return 2.0 * param * param * s * s;
        }
        return static_cast<double>(jet_hi(tau).d[2] + cl);
      }
      case Kind::Spectral: return density->theta2(tau);
      case Kind::GaussLog2Tail: return tail.theta2(tau);
      case Kind::Synthetic: return expr::eval(*ast, tau);
    }
    return 0.0;
  }
  // theta and theta' where a cancellation-free form exists; NaN means "use
  // the jet route" (resolution-floored by the caller).
  double theta0_exact(double tau) const {
    if (builtin == Builtin::Gaussian)
      return detail::expm1_minus(-0.5 * tau * tau / (param * param));
    if (builtin == Builtin::Cosine) return detail::cosm1_plus_half(param * tau);
    if (kind == Kind::Spectral) return density->theta0(tau);
    return kNaN;
  }
  double theta1_exact(double tau) const {
    if (builtin == Builtin::Gaussian) {
      double s2 = param * param;
      return -(tau / s2) * std::expm1(-0.5 * tau * tau / s2);
    }
    if (builtin == Builtin::Cosine) return param * detail::u_minus_sin(param * tau);
    if (kind == Kind::Spectral) return density->theta1(tau);
    return kNaN;
  }
};

namespace {

using Impl = CovarianceModel::Impl;

// Direct long-double regression quantities for the small-lag matching.
void direct_sigma2_rho(const Impl& im, double tau, long double& sigma2, long double& rho) {
  Jet<long double> j;
  if (im.kind == Impl::Kind::Expression) {
    j = im.jet_hi(tau);
  } else {
    auto d = im.density->covariance_derivs(tau, 2);
    j = Jet<long double>{static_cast<long double>(d[0]), static_cast<long double>(d[1]),
                         static_cast<long double>(d[2]), 0.0L, 0.0L};
  }
  long double r = j.d[0], r1 = j.d[1], r2 = j.d[2];
  long double e = 1.0L - r * r;
  sigma2 = im.cl - r1 * r1 / e;
  rho = (-r2 * e - r1 * r1 * r) / (im.cl * e - r1 * r1);
}

void validate_basics(Impl& im) {
  double r0, r1d;
  if (im.kind == Impl::Kind::Expression) {
    auto j0 = im.jet_hi(0.0);
    r0 = static_cast<double>(j0.d[0]);
    r1d = static_cast<double>(j0.d[1]);
    im.cl = -j0.d[2];
    im.d4 = static_cast<double>(j0.d[4]);
  } else if (im.kind == Impl::Kind::Spectral) {
    r0 = 1.0;
    r1d = 0.0;
    im.cl = static_cast<long double>(im.density->second_moment());
    im.d4 = im.density->fourth_moment();
  } else {  // GaussLog2Tail
    r0 = 1.0;
    r1d = 0.0;
    im.cl = static_cast<long double>(-im.tail.r2_at0());
    im.d4 = kInf;
  }
  im.c = static_cast<double>(im.cl);
  if (std::abs(r0 - 1.0) > im.veps)
    throw Error(ErrorKind::Validation,
                im.name + ": r(0) = " + fmt(r0) + " violates r(0) = 1 (eps " + fmt(im.veps) + ")");
  if (std::abs(r1d) > im.veps)
    throw Error(ErrorKind::Validation, im.name + ": r'(0) = " + fmt(r1d) + " violates r'(0) = 0");
  if (!(im.c > im.veps))
    throw Error(ErrorKind::Validation,
                im.name + ": r''(0) = " + fmt(-im.c) + " is not strictly negative");

  // |r| <= 1 over a sample of (0, delta_max]
  double top = std::min(im.delta_max, CovarianceModel::kUnboundedDelta);
  std::vector<double> taus;
  for (int i = 1; i <= 512; ++i) taus.push_back(top * i / 512.0);
  for (int j = 1; j <= 64; ++j) taus.push_back(top * std::pow(2.0, -j / 3.0));
  double bound_slack = im.kind == Impl::Kind::Expression ? 1e-12 : 1e-6;
  for (double tau : taus) {
    double rv = im.r_value(tau);
    if (std::abs(rv) > 1.0 + bound_slack)
      throw Error(ErrorKind::Validation,
                  im.name + ": |r(" + fmt(tau) + ")| = " + fmt(std::abs(rv)) + " exceeds 1");
  }
}

// Grid verification of the small-lag structure. theta positivity is checked
// down to the resolution floor of the evaluation route; each limit sequence
// must have dropped below 1e-3 (and below its starting value) by j = 20.
void check_eq1(Impl& im) {
  if (im.kind == Impl::Kind::Synthetic) {
    double delta = std::min(1.0, im.delta_max);
    for (int j = 0; j <= 20; ++j) {
      double tau = delta * std::pow(2.0, -j);
      if (!(expr::eval(*im.ast, tau) >= 0.0)) {
        im.eq1.detail = "theta''(" + fmt(tau) + ") < 0";
        return;
      }
    }
    im.eq1.declared = true;
    im.eq1.verified_delta = delta;
    return;
  }

  const double theta_floor = 64.0 * static_cast<double>(kEpsL);
  double delta = std::min(1.0, im.delta_max / 4.0);
  for (int attempt = 0; attempt < 6; ++attempt, delta *= 0.5) {
    bool ok = true;
    std::string why;
    double first0 = 0, first1 = 0, first2 = 0, last0 = 0, last1 = 0, last2 = 0;
    for (int j = 0; j <= 20 && ok; ++j) {
      double tau = delta * std::pow(2.0, -j);
      double t0 = im.theta0_exact(tau), t1 = im.theta1_exact(tau);
      bool exact = !std::isnan(t0);
      double floor = theta_floor;
      if (!exact) {
        if (im.kind == Impl::Kind::GaussLog2Tail) {
          t0 = im.r_value(tau) - 1.0 + 0.5 * im.c * tau * tau;
          t1 = im.tail.r1(tau) + im.c * tau;
          floor = 1e-12 * (1.0 + im.c);  // quadrature + double cancellation level
        } else {
          auto jet = im.jet_hi(tau);
          long double t = static_cast<long double>(tau);
          t0 = static_cast<double>(jet.d[0] - 1.0L + im.cl * t * t / 2.0L);
          t1 = static_cast<double>(jet.d[1] + im.cl * t);
        }
      }
      double t2 = im.theta2(tau);
      if (t0 <= 0.0 && (exact || std::abs(t0) > floor)) {
        ok = false;
        why = "theta(" + fmt(tau) + ") = " + fmt(t0) + " not positive";
        break;
      }
      double s0 = t0 / (tau * tau), s1 = std::abs(t1) / tau, s2 = std::abs(t2);
      if (j == 0) { first0 = s0; first1 = s1; first2 = s2; }
      last0 = s0; last1 = s1; last2 = s2;
    }
    if (ok) {
      auto settled = [](double first, double last) {
        return last < 1e-3 && (last <= first || first < 1e-3);
      };
      if (!settled(first0, last0) || !settled(first1, last1) || !settled(first2, last2)) {
        ok = false;
        why = "limits not below 1e-3 by j = 20 (theta/tau^2 = " + fmt(last0) +
              ", theta'/tau = " + fmt(last1) + ", theta'' = " + fmt(last2) + ")";
      }
    }
    if (ok) {
      im.eq1.declared = true;
      im.eq1.verified_delta = delta;
      im.eq1.detail.clear();
      return;
    }
    im.eq1.detail = why;
  }
}

void fit_small_lag(Impl& im) {
  im.small.usable = false;
  if (!std::isfinite(im.d4)) return;
  double q0 = (im.d4 - im.c * im.c) / 4.0;
  if (!(q0 > 1e-12 * im.c * im.c)) return;  // degenerate (single spectral atom)
  double tau_c =
      std::min({4e-3 / std::sqrt(im.c), 0.1 * std::sqrt(im.c / im.d4), im.delta_max / 4.0});
  for (int attempt = 0; attempt < 3; ++attempt, tau_c *= 0.5) {
    long double s2d, rhod;
    direct_sigma2_rho(im, tau_c, s2d, rhod);
    if (!(s2d > 0.0L) || !(rhod < 0.0L)) continue;
    double s2 = (static_cast<double>(s2d) / (q0 * tau_c * tau_c) - 1.0) / (tau_c * tau_c);
    double kappa = (static_cast<double>(rhod) + 1.0) / (tau_c * tau_c);
    if (std::abs(s2) * tau_c * tau_c > 0.5 || kappa < 0.0) continue;
    im.small = {true, tau_c, q0, s2, kappa};
    return;
  }
}

std::shared_ptr<const Impl> finish(std::shared_ptr<Impl> im) {
  if (im->kind != Impl::Kind::Synthetic) {
    validate_basics(*im);
    fit_small_lag(*im);
  } else {
    im->c = im->param > 0.0 ? im->param : 1.0;  // curvature convention
    im->cl = static_cast<long double>(im->c);
    im->d4 = kInf;
  }
  check_eq1(*im);
  return im;
}

}  // namespace

// ---------------------------------------------------------------------------
// Factories

CovarianceModel CovarianceModel::gaussian(double scale, double delta_max) {
  if (!(scale > 0.0)) throw Error(ErrorKind::Config, "gaussian scale must be positive");
  auto im = std::make_shared<Impl>();
  im->kind = Impl::Kind::Expression;
  im->builtin = Builtin::Gaussian;
  im->param = scale;
  im->name = "gaussian(" + fmt(scale) + ")";
  im->ast = expr::parse("exp(-tau^2/" + fmt(2.0 * scale * scale) + ")");
  im->delta_max = delta_max;
  im->simulable = true;
  return CovarianceModel(finish(std::move(im)));
}

CovarianceModel CovarianceModel::cosine(double freq, double delta_max) {
  if (!(freq > 0.0)) throw Error(ErrorKind::Config, "cosine frequency must be positive");
  auto im = std::make_shared<Impl>();
  im->kind = Impl::Kind::Expression;
  im->builtin = Builtin::Cosine;
  im->param = freq;
  im->name = "cosine(" + fmt(freq) + ")";
  im->ast = expr::parse("cos(" + fmt(freq) + "*tau)");
  im->delta_max = delta_max;
  im->simulable = true;
  return CovarianceModel(finish(std::move(im)));
}

CovarianceModel CovarianceModel::gauss_log2tail(double tail_weight, double delta_max) {
  if (!(tail_weight > 0.0) || !(tail_weight < 1.0))
    throw Error(ErrorKind::Config, "tail weight must lie in (0, 1)");
  auto im = std::make_shared<Impl>();
  im->kind = Impl::Kind::GaussLog2Tail;
  im->name = "gauss_log2tail(" + fmt(tail_weight) + ")";
  im->tail.w = tail_weight;
  im->tail.z3 = osc::tail_mass(3);
  im->tail.tail_m2 = osc::tail_mass(1) / im->tail.z3;
  im->delta_max = delta_max;
  im->simulable = true;
  return CovarianceModel(finish(std::move(im)));
}

CovarianceModel CovarianceModel::from_expression(std::string_view text, double delta_max,
                                                 double validation_eps) {
  if (!(delta_max > 0.0)) throw Error(ErrorKind::Config, "delta_max must be positive");
  auto im = std::make_shared<Impl>();
  im->kind = Impl::Kind::Expression;
  im->ast = expr::parse(text);
  im->name = expr::to_string(*im->ast);
  im->delta_max = delta_max;
  im->veps = validation_eps;
  im->simulable = true;
  return CovarianceModel(finish(std::move(im)));
}

CovarianceModel CovarianceModel::from_spectral(SpectralDensity density, double delta_max,
                                               double validation_eps) {
  if (!(delta_max > 0.0)) throw Error(ErrorKind::Config, "delta_max must be positive");
  auto im = std::make_shared<Impl>();
  im->kind = Impl::Kind::Spectral;
  im->density = std::move(density);
  im->name = im->density->describe();
  im->delta_max = delta_max;
  im->veps = validation_eps;
  im->simulable = true;
  return CovarianceModel(finish(std::move(im)));
}

CovarianceModel CovarianceModel::synthetic_theta2(std::string_view theta2_in_tau,
                                                  double delta_max, double curvature) {
  if (!(delta_max > 0.0) || delta_max > 1.0)
    throw Error(ErrorKind::Config, "synthetic models live on (0, delta_max], delta_max <= 1");
  if (!(curvature > 0.0)) throw Error(ErrorKind::Config, "curvature must be positive");
  auto im = std::make_shared<Impl>();
  im->kind = Impl::Kind::Synthetic;
  im->ast = expr::parse(theta2_in_tau);
  im->name = "synthetic[theta''=" + expr::to_string(*im->ast) + "]";
  im->delta_max = delta_max;
  im->simulable = false;
  im->param = curvature;
  return CovarianceModel(finish(std::move(im)));
}

CovarianceModel CovarianceModel::parse(std::string_view text, double delta_max,
                                       double validation_eps) {
  std::string trimmed(text);
  auto is_space = [](char ch) { return std::isspace(static_cast<unsigned char>(ch)); };
  trimmed.erase(std::remove_if(trimmed.begin(), trimmed.end(), is_space), trimmed.end());
  struct { const char* id; int which; } builtins[] = {
      {"gaussian", 0}, {"cosine", 1}, {"gauss_log2tail", 2}};
  for (auto [id, which] : builtins) {
    std::string prefix = std::string(id) + "(";
    if (trimmed.rfind(prefix, 0) == 0 && !trimmed.empty() && trimmed.back() == ')') {
      std::string arg = trimmed.substr(prefix.size(), trimmed.size() - prefix.size() - 1);
      char* end = nullptr;
      double v = std::strtod(arg.c_str(), &end);
      if (!arg.empty() && end == arg.c_str() + arg.size()) {
        if (which == 0) return gaussian(v, delta_max);
        if (which == 1) return cosine(v, delta_max);
        return gauss_log2tail(v, delta_max);
      }
    }
  }
  return from_expression(text, delta_max, validation_eps);
}

// ---------------------------------------------------------------------------
// Evaluation

double CovarianceModel::r(double tau) const { return impl_->r_value(tau); }

Jet4 CovarianceModel::derivatives_at(double tau) const {
  if (!(tau >= 0.0) || tau > impl_->delta_max)
    throw Error(ErrorKind::Domain, "tau = " + fmt(tau) + " outside [0, delta_max = " +
                                       fmt(impl_->delta_max) + "]");
  return impl_->jet(tau);
}

double CovarianceModel::theta_at(double tau) const {
  if (!(tau > 0.0) || tau > impl_->delta_max)
    throw Error(ErrorKind::Domain,
                "theta is reported on (0, delta_max]; tau = " + fmt(tau) + " rejected");
  double exact = impl_->theta0_exact(tau);
  if (!std::isnan(exact)) return exact;
  switch (impl_->kind) {
    case Impl::Kind::Expression: {
      auto j = impl_->jet_hi(tau);
      long double t = static_cast<long double>(tau);
      return static_cast<double>(j.d[0] - 1.0L + impl_->cl * t * t / 2.0L);
    }
    case Impl::Kind::GaussLog2Tail:
      return impl_->r_value(tau) - 1.0 + 0.5 * impl_->c * tau * tau;
    default:
      throw Error(ErrorKind::Unsupported, "synthetic model defines theta'' only");
  }
}

double CovarianceModel::theta2_at(double tau) const {
  if (!(tau > 0.0) || tau > impl_->delta_max)
    throw Error(ErrorKind::Domain, "tau outside (0, delta_max]");
  return impl_->theta2(tau);
}

double CovarianceModel::geman_L(double tau) const {
  if (!(tau > 0.0) || tau > impl_->delta_max)
    throw Error(ErrorKind::Domain, "L is defined on (0, delta_max]; tau = " + fmt(tau));
  return impl_->theta2(tau) / tau;
}

bool CovarianceModel::L_resolvable(double tau) const {
  if (!(tau > 0.0)) return false;
  switch (impl_->kind) {
    case Impl::Kind::Synthetic: return true;
    case Impl::Kind::Spectral:
    case Impl::Kind::GaussLog2Tail:
      return std::abs(impl_->theta2(tau)) > 1e-9;  // quadrature-level floor
    case Impl::Kind::Expression: {
      if (impl_->builtin != Builtin::None) return true;  // stable closed forms
      double noise = static_cast<double>(kEpsL) * impl_->c * 1e3;
      return std::abs(impl_->theta2(tau)) > noise;
    }
  }
  return false;
}

double CovarianceModel::rpp0() const { return -impl_->c; }
double CovarianceModel::fourth_deriv_at0() const { return impl_->d4; }
int CovarianceModel::derivative_order() const {
  return impl_->kind == Impl::Kind::GaussLog2Tail ? 2 : 4;
}
double CovarianceModel::delta_max() const { return impl_->delta_max; }
double CovarianceModel::validation_eps() const { return impl_->veps; }
bool CovarianceModel::simulable() const { return impl_->simulable; }
bool CovarianceModel::synthetic() const { return impl_->kind == Impl::Kind::Synthetic; }
const Eq1Check& CovarianceModel::eq1() const { return impl_->eq1; }
std::string CovarianceModel::describe() const { return impl_->name; }
const SpectralDensity* CovarianceModel::spectral() const {
  return impl_->density ? &*impl_->density : nullptr;
}
const expr::Node* CovarianceModel::expression() const {
  return impl_->kind == Impl::Kind::Expression ? impl_->ast.get() : nullptr;
}
const CovarianceModel::SmallLag& CovarianceModel::small_lag() const { return impl_->small; }

bool CovarianceModel::has_spectral_density() const {
  return impl_->kind == Impl::Kind::Spectral || impl_->kind == Impl::Kind::GaussLog2Tail;
}

double CovarianceModel::spectral_density(double lambda) const {
  switch (impl_->kind) {
    case Impl::Kind::Spectral: return impl_->density->density(lambda);
    case Impl::Kind::GaussLog2Tail: {
      const auto& tp = impl_->tail;
      double gauss = std::sqrt(2.0 / 3.14159265358979323846) * std::exp(-0.5 * lambda * lambda);
      return (1.0 - tp.w) * gauss + tp.w * osc::tail_envelope(lambda, 3) / tp.z3;
    }
    default:
      throw Error(ErrorKind::Unsupported, impl_->name + " carries no spectral density");
  }
}

CovarianceModel CovarianceModel::rescaled(double time_scale) const {
  if (!(time_scale > 0.0)) throw Error(ErrorKind::Config, "time scale must be positive");
  switch (impl_->kind) {
    case Impl::Kind::Expression: {
      auto scaled = expr::scale_variable(*impl_->ast, time_scale);
      return from_expression(expr::to_string(*scaled), impl_->delta_max / time_scale,
                             impl_->veps);
    }
    case Impl::Kind::Synthetic: {
      // theta''_c(tau) = c^2 theta''(c tau); the curvature scales the same way
      auto scaled = expr::scale_variable(*impl_->ast, time_scale);
      std::string text =
          fmt(time_scale * time_scale) + "*(" + expr::to_string(*scaled) + ")";
      return synthetic_theta2(text, std::min(1.0, impl_->delta_max / time_scale),
                              impl_->c * time_scale * time_scale);
    }
    default:
      throw Error(ErrorKind::Unsupported, "rescaling is provided for expression models");
  }
}

}  // namespace crossings

#include "crossings/diagnostics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "crossings/error.hpp"
#include "crossings/moments.hpp"
#include "crossings/quadrature.hpp"

namespace crossings {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ExponentFit fit_exponents(const std::vector<double>& taus, const std::vector<double>& values,
                          int fit_points, double time_unit = 1.0) {
  // samples arrive descending in tau; the fit takes the smallest lags.
  // Lags are normalized by the model's natural time unit so the verdict is
  // exactly covariant under r(tau) -> r(c tau); the |log| regressor needs
  // its argument well away from 1.
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    double scaled = taus[i] * time_unit;
    if (values[i] > 0.0 && std::isfinite(values[i]) && std::abs(std::log(scaled)) > 0.5)
      pts.emplace_back(scaled, values[i]);
  }
  int use = std::min<int>(fit_points, static_cast<int>(pts.size()));
  ExponentFit fit;
  fit.points_used = use;
  if (use < 3) return fit;
  Eigen::MatrixXd X(use, 3);
  Eigen::VectorXd y(use);
  for (int i = 0; i < use; ++i) {
    auto [tau, v] = pts[pts.size() - static_cast<std::size_t>(use) + static_cast<std::size_t>(i)];
    X(i, 0) = 1.0;
    X(i, 1) = std::log(tau);
    X(i, 2) = std::log(std::abs(std::log(tau)));
    y(i) = std::log(v);
  }
  Eigen::Vector3d coef = X.colPivHouseholderQr().solve(y);
  fit.log_c = coef(0);
  fit.alpha = coef(1);
  fit.beta = coef(2);
  fit.residual_rms = std::sqrt((X * coef - y).squaredNorm() / use);
  return fit;
}

// Decision rule shared by the Geman classifier and the curve condition. At
// alpha = -1 the |log|^-1 boundary family diverges, so beta lands on the
// divergent side of its own margin band.
Verdict decide(const ExponentFit& fit, double margin) {
  if (fit.points_used < 3 || fit.residual_rms > 0.5) return Verdict::Inconclusive;
  if (fit.alpha > -1.0 + margin) return Verdict::Integrable;
  if (fit.alpha < -1.0 - margin) return Verdict::NonIntegrable;
  return fit.beta >= -1.0 - margin ? Verdict::NonIntegrable : Verdict::Integrable;
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Integrable: return "integrable";
    case Verdict::NonIntegrable: return "non_integrable";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

double geman_function(const CovarianceModel& model, double tau) { return model.geman_L(tau); }

GemanReport classify_geman(const CovarianceModel& model, double delta,
                           const ClassifierControl& control) {
  if (!(delta > 0.0) || delta > model.delta_max())
    throw Error(ErrorKind::Domain, "delta outside (0, delta_max]");
  GemanReport rep;
  rep.delta = delta;
  for (int j = 0; j <= control.levels; ++j) {
    double tau = delta * std::pow(2.0, -j);
    if (tau < control.tau_min) break;
    if (!model.L_resolvable(tau)) break;  // grid floored at the jet's accuracy
    rep.grid.push_back(tau);
    rep.L_values.push_back(model.geman_L(tau));
  }
  if (rep.grid.size() < 8)
    throw Error(ErrorKind::Domain, "fewer than 8 usable grid points for the Geman classifier");

  ExponentFit fit = fit_exponents(rep.grid, rep.L_values, control.fit_points,
                                  std::sqrt(-model.rpp0()));
  rep.local_exponent = fit.alpha;
  rep.log_exponent = fit.beta;
  rep.fit_residual = fit.residual_rms;

  // integral of L over [floor, delta] on the geometric segments, then two
  // extra halvings to probe stability of the endpoint
  auto segment = [&](double lo, double hi) {
    return quad::gl_integrate([&](double tau) { return model.geman_L(tau); }, lo, hi, 7);
  };
  double floor_tau = rep.grid.back();
  double integral = 0.0;
  for (std::size_t i = rep.grid.size(); i-- > 1;) integral += segment(rep.grid[i], rep.grid[i - 1]);
  double ext1 = model.L_resolvable(0.5 * floor_tau) ? segment(0.5 * floor_tau, floor_tau) : 0.0;
  double ext2 =
      model.L_resolvable(0.25 * floor_tau) ? segment(0.25 * floor_tau, 0.5 * floor_tau) : 0.0;
  rep.integral_estimate = integral;
  rep.integral_drift = (ext1 + ext2) / std::max(integral, 1e-300);

  rep.verdict = decide(fit, control.margin);
  if (rep.verdict == Verdict::Integrable && rep.integral_drift > 0.01)
    rep.verdict = Verdict::Inconclusive;
  return rep;
}

LemmaReport lemma_report(const CovarianceModel& model, double delta) {
  if (!(delta > 0.0) || delta > model.delta_max())
    throw Error(ErrorKind::Domain, "delta outside (0, delta_max]");
  if (model.synthetic())
    throw Error(ErrorKind::Unsupported, "lemma report needs the full regression structure");
  LemmaReport rep;
  rep.delta = delta;
  rep.lemma2_rho_max = -kInf;
  rep.lemma2_ratio_bound = 0.0;
  rep.lemma3_lower_margin = kInf;
  double l3_max = -kInf;
  std::vector<double> l_over_tau;
  for (int j = 0; j <= 20; ++j) {
    double tau = delta * std::pow(2.0, -j);
    RegressionCoefficients reg = regression_at(model, tau, 0.0);
    double L = model.geman_L(tau);
    double r1 = model.derivatives_at(tau).d[1];
    rep.lemma2_ratio_bound = std::max(rep.lemma2_ratio_bound, std::abs(r1) / reg.sigma());
    rep.lemma2_rho_max = std::max(rep.lemma2_rho_max, reg.rho);
    double l3 = L * tau / reg.sigma2;
    rep.lemma3_lower_margin = std::min(rep.lemma3_lower_margin, l3);
    l3_max = std::max(l3_max, l3);
    l_over_tau.push_back(L / tau);
  }
  rep.lemma3_C_estimate = l3_max - 2.0;

  // limit of L(tau)/tau read off the small end of the grid
  std::size_t n = l_over_tau.size();
  double v_last = l_over_tau[n - 1], v_prev = l_over_tau[n - 2];
  if (v_last > 1.5 * v_prev && v_prev > 1.5 * l_over_tau[n - 3]) {
    rep.lemma1_diverging = true;
    rep.lemma1_limit = kInf;
  } else {
    rep.lemma1_diverging = false;
    rep.lemma1_limit = v_last;
  }
  return rep;
}

CurveConditionReport curve_condition(CurveSpec curve, double delta,
                                     const ClassifierControl& control) {
  if (!(delta > 0.0)) throw Error(ErrorKind::Domain, "delta must be positive");
  CurveConditionReport rep;
  rep.delta = delta;
  if (!curve.has_gamma()) {
    curve.estimate_gamma(delta);
    rep.gamma_estimated = true;
  }

  std::vector<double> grid, values;
  double prev_gamma = kInf;
  double gmax = 0.0;
  for (int j = 0; j <= control.levels; ++j) {
    double s = delta * std::pow(2.0, -j);
    if (s < control.tau_min) break;
    if (rep.gamma_estimated && s < delta / 1024.0) break;  // sampling resolution
    double g = curve.gamma(s);
    if (g > prev_gamma * (1.0 + 1e-9))
      throw Error(ErrorKind::Validation, "gamma is not nondecreasing (invalid modulus)");
    prev_gamma = g;
    gmax = std::max(gmax, g);
    grid.push_back(s);
    values.push_back(g / s);
  }

  // flat-zero modulus (constant or linear psi): trivially satisfied
  if (gmax <= 1e-14) {
    rep.verdict = Verdict::Integrable;
    rep.integral_estimate = 0.0;
    return rep;
  }

  ExponentFit fit = fit_exponents(grid, values, control.fit_points);
  rep.local_exponent = fit.alpha;
  rep.log_exponent = fit.beta;
  rep.verdict = decide(fit, control.margin);

  double integral = 0.0;
  for (std::size_t i = grid.size(); i-- > 1;)
    integral += quad::gl_integrate([&](double s) { return curve.gamma(s) / s; }, grid[i],
                                   grid[i - 1], 7);
  rep.integral_estimate = integral;
  return rep;
}

}  // namespace crossings

#pragma once

#include <string>
#include <vector>

#include "crossings/covariance.hpp"
#include "crossings/curve.hpp"

namespace crossings {

enum class Verdict { Integrable, NonIntegrable, Inconclusive };
std::string to_string(Verdict v);

/// L(tau) = (r''(tau) - r''(0)) / tau on (0, delta_max].
double geman_function(const CovarianceModel& model, double tau);

/// Exponent fit of a positive sample set on a geometric grid:
/// log g = log c + alpha log tau + beta log |log tau|, least squares over the
/// smallest `fit_points` usable grid points.
struct ExponentFit {
  double alpha = 0.0;
  double beta = 0.0;
  double log_c = 0.0;
  double residual_rms = 0.0;
  int points_used = 0;
};

struct GemanReport {
  std::vector<double> grid;       // descending geometric lags actually used
  std::vector<double> L_values;
  double local_exponent = 0.0;    // alpha
  double log_exponent = 0.0;      // beta
  Verdict verdict = Verdict::Inconclusive;
  double integral_estimate = 0.0; // integral of L over [grid floor, delta]
  double integral_drift = 0.0;    // relative change when the floor is halved
  double delta = 0.0;
  double fit_residual = 0.0;
};

struct ClassifierControl {
  double margin = 0.05;    // inconclusive band around the critical exponents
  int levels = 40;         // geometric grid depth
  double tau_min = 1e-10;  // absolute floor; raised where resolution runs out
  int fit_points = 24;     // smallest usable points entering the fit
};

/// Samples L on tau_j = delta 2^-j, fits the local exponents and issues the
/// integrability verdict. At alpha = -1 the boundary family |log tau|^-1 is
/// itself divergent, so beta >= -1 - margin counts as non-integrable; a
/// verdict of integrable additionally requires the integral estimate to be
/// stable when the grid floor halves.
GemanReport classify_geman(const CovarianceModel& model, double delta,
                           const ClassifierControl& control = {});

struct LemmaReport {
  double lemma1_limit = 0.0;        // lim L(tau)/tau when finite
  bool lemma1_diverging = false;
  double lemma2_ratio_bound = 0.0;  // max |r'(tau)| / sigma(tau)
  double lemma2_rho_max = 0.0;      // max rho(tau)
  double lemma3_lower_margin = 0.0; // min L tau / sigma^2 (>= 1 expected)
  double lemma3_C_estimate = 0.0;   // max L tau / sigma^2 - 2
  double delta = 0.0;
};

/// Grid report for the three neighborhood-of-zero lemmas. Degenerate models
/// (sigma^2 identically zero, e.g. the pure cosine) are reported as errors.
LemmaReport lemma_report(const CovarianceModel& model, double delta);

struct CurveConditionReport {
  Verdict verdict = Verdict::Inconclusive;  // Integrable <=> satisfied
  double integral_estimate = 0.0;           // integral of gamma(s)/s
  double local_exponent = 0.0;
  double log_exponent = 0.0;
  double delta = 0.0;
  bool gamma_estimated = false;
};

/// Integrability of gamma(s)/s near zero, the smoothness half of the curve
/// theorem. Uses the supplied gamma or estimates one from psi_dot samples.
CurveConditionReport curve_condition(CurveSpec curve, double delta,
                                     const ClassifierControl& control = {});

}  // namespace crossings

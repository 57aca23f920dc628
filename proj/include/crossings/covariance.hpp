#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "crossings/expr.hpp"
#include "crossings/jet.hpp"
#include "crossings/spectral.hpp"

namespace crossings {

/// Grid verification of the small-lag covariance structure: theta(tau) > 0
/// with theta/tau^2, theta'/tau and theta'' all decaying to zero on a
/// geometric grid. Recorded, not enforced: models that fail simply do not
/// carry the declaration.
struct Eq1Check {
  bool declared = false;
  double verified_delta = 0.0;  // largest delta for which the grid checks held
  std::string detail;           // first failure, empty when declared
};

/// A stationary correlation function r with pointwise derivatives up to
/// order 4, validated at construction: r(0) = 1, r'(0) = 0, r''(0) < 0 and
/// |r| <= 1 on a sample grid. Immutable and cheap to copy; all evaluation is
/// const and thread-safe.
///
/// Sources: parsed expressions in `tau` (builtins are sugar over the same
/// machinery), compactly supported spectral densities, the heavy-tail
/// Gaussian/log^2 spectral mixture, and synthetic diagnostics-only models
/// specified directly by theta''.
class CovarianceModel {
 public:
  static constexpr double kUnboundedDelta = 1e6;

  static CovarianceModel gaussian(double scale = 1.0, double delta_max = kUnboundedDelta);
  static CovarianceModel cosine(double freq = 1.0, double delta_max = kUnboundedDelta);
  /// Mixture (1-w) Gaussian spectrum + w * 1/(lambda^3 log^2 lambda) tail:
  /// finite second spectral moment, divergent lambda^2 log lambda moment, so
  /// the Geman function behaves like 1/(tau |log tau|) and the crossing
  /// count has infinite variance.
  static CovarianceModel gauss_log2tail(double tail_weight,
                                        double delta_max = kUnboundedDelta);
  static CovarianceModel from_expression(std::string_view text, double delta_max,
                                         double validation_eps = 1e-9);
  static CovarianceModel from_spectral(SpectralDensity density, double delta_max,
                                       double validation_eps = 1e-9);
  /// Diagnostics-only model defined by a closed-form theta''(tau) on
  /// (0, delta_max]; r''(0) = -curvature by convention (rescaling a synthetic
  /// model multiplies the curvature by the squared time scale). Not
  /// simulable; operations needing r itself reject it.
  static CovarianceModel synthetic_theta2(std::string_view theta2_in_tau,
                                          double delta_max = 1.0, double curvature = 1.0);

  /// Front door matching the covariance text in configs: either a builtin
  /// id -- gaussian(scale), cosine(freq), gauss_log2tail(w) -- or an
  /// expression in tau.
  static CovarianceModel parse(std::string_view text, double delta_max,
                               double validation_eps = 1e-9);

  double r(double tau) const;
  /// (r, r', r'', r''', r'''')(tau); exact jet evaluation at tau = 0.
  /// Components beyond derivative_order() are NaN.
  Jet4 derivatives_at(double tau) const;
  /// theta(tau) = r(tau) - 1 - r''(0) tau^2 / 2, tau in (0, delta_max].
  double theta_at(double tau) const;
  /// r''(tau) - r''(0), through a cancellation-free route where one exists.
  double theta2_at(double tau) const;
  /// Geman function L(tau) = (r''(tau) - r''(0)) / tau.
  double geman_L(double tau) const;
  /// False when roundoff swamps theta'' at this lag (grid floor for fits).
  bool L_resolvable(double tau) const;

  double rpp0() const;              // r''(0)
  double fourth_deriv_at0() const;  // r''''(0); +infinity when it does not exist
  int derivative_order() const;     // 4, or 2 for the heavy-tail mixture
  double delta_max() const;
  double validation_eps() const;
  bool simulable() const;
  bool synthetic() const;
  const Eq1Check& eq1() const;
  std::string describe() const;
  const SpectralDensity* spectral() const;
  const expr::Node* expression() const;
  /// One-sided density with unit mass when the model carries one (spectral
  /// sources and the heavy-tail mixture); used by the exact-in-law sampler.
  bool has_spectral_density() const;
  double spectral_density(double lambda) const;

  /// The model r(c tau): time rescaling, used by scale-invariance checks.
  CovarianceModel rescaled(double time_scale) const;

  /// Small-lag evaluation support for the regression quantities. Below
  /// tau_c the direct formulas for sigma^2 and rho lose every digit to
  /// fourth-order cancellation; the jet at 0 gives the exact leading
  /// behavior and the correction terms are matched at tau_c.
  struct SmallLag {
    bool usable = false;
    double tau_c = 0.0;
    double q0 = 0.0;     // sigma^2(tau) ~ q0 tau^2, q0 = (r4(0) - r''(0)^2) / 4
    double s2 = 0.0;     // sigma^2 correction: q0 tau^2 (1 + s2 tau^2)
    double kappa = 0.0;  // rho(tau) ~ -1 + kappa tau^2
  };
  const SmallLag& small_lag() const;

  struct Impl;

 private:
  explicit CovarianceModel(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

}  // namespace crossings

#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace crossings {

/// A continuously differentiable curve psi with its derivative and the
/// modulus of continuity gamma of psi-dot. gamma can be supplied in closed
/// form or estimated empirically from psi-dot samples; either way it is
/// nondecreasing with gamma(0+) -> 0.
class CurveSpec {
 public:
  /// Expressions in the variable `s` (gamma, when supplied, in `h`).
  static CurveSpec from_expressions(std::string_view psi, std::string_view psi_dot,
                                    std::optional<std::string> gamma = std::nullopt);
  static CurveSpec from_callables(std::function<double(double)> psi,
                                  std::function<double(double)> psi_dot,
                                  std::function<double(double)> gamma = nullptr,
                                  std::string label = "curve");
  /// The constant curve psi == x (the level case).
  static CurveSpec constant(double x);

  double psi(double s) const { return psi_(s); }
  double psi_dot(double s) const { return psi_dot_(s); }

  bool has_gamma() const { return static_cast<bool>(gamma_) || !gamma_h_.empty(); }
  /// Closed-form gamma, or the empirical estimate once built.
  double gamma(double h) const;
  /// Empirical modulus from 4096 psi-dot samples on [0, delta], evaluated on
  /// dyadic h; kept only down to the resolvable spacing.
  void estimate_gamma(double delta);

  /// Checks psi_dot against central differences of psi on [0, span].
  /// Throws Error(Validation) on mismatch beyond 1e-5 relative.
  void validate_derivative(double span) const;

  const std::string& describe() const { return label_; }
  bool is_constant_level() const { return constant_level_.has_value(); }
  std::optional<double> constant_level() const { return constant_level_; }

 private:
  CurveSpec() = default;
  std::function<double(double)> psi_, psi_dot_, gamma_;
  std::vector<double> gamma_h_, gamma_v_;  // empirical table (descending h)
  std::optional<double> constant_level_;
  std::string label_;
};

}  // namespace crossings

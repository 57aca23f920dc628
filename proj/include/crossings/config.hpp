#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crossings/covariance.hpp"
#include "crossings/curve.hpp"

namespace crossings {

/// One self-contained run description, loaded from an ini-style file with
/// [section] headers and key = value lines ('#' starts a comment).
/// Unknown keys are rejected so typos surface immediately.
struct RunConfig {
  // [covariance] -- exactly one of the four sources
  std::string covariance;        // builtin id or expression in tau
  std::string spectral;          // expression in lambda (needs lambda_max)
  std::string spectral_table;    // CSV path with "lambda,value" rows
  std::string synthetic_theta2;  // expression in tau
  double lambda_max = 0.0;
  double delta_max = CovarianceModel::kUnboundedDelta;

  // [target]
  bool is_curve = false;
  double level = 0.0;
  std::string psi, psi_dot, gamma;

  // [run]
  double t = 1.0;
  double delta = 0.5;
  double dt = 1e-3;
  std::int64_t n_paths = 10000;
  std::uint64_t seed = 20060401;
  std::vector<double> dt_sequence;

  // [tolerances]
  double quad_tol = 1e-8;
  double series_tol = 1e-9;
  double margin = 0.05;
  double validation_eps = 1e-9;
  double tau_min = 1e-8;

  // [output]
  std::string out_dir = ".";
  std::string format = "table";  // table | json | csv

  // command-line only
  double sigma2_scale = 1.0;  // test hook for cmd_compare mutation runs
  int threads = 0;

  static RunConfig load(const std::string& path);
  static RunConfig parse_text(const std::string& text);

  CovarianceModel build_model() const;
  std::optional<CurveSpec> build_curve() const;
  /// delta clamped into the model's valid lag range.
  double effective_delta(const CovarianceModel& model) const;
  void validate() const;
};

}  // namespace crossings

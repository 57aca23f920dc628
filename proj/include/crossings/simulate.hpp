#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "crossings/covariance.hpp"
#include "crossings/curve.hpp"

namespace crossings {

struct PathGrid {
  double dt = 0.0;
  std::int64_t n = 0;
  Eigen::ArrayXd values;
  std::uint64_t seed = 0;
};

/// Level value or curve to cross.
using Target = std::variant<double, CurveSpec>;
std::string target_label(const Target& target);

/// Deterministic per-path seed derivation: splitmix64 applied to the master
/// seed advanced by (index + 1) golden-ratio steps. Fixed for reproducibility
/// across runs and thread schedules.
std::uint64_t path_seed(std::uint64_t master_seed, std::int64_t index);
std::uint64_t splitmix64(std::uint64_t& state);

/// Circulant embedding of r(k dt) on a power-of-two ring >= 4n. Negative
/// eigenvalues are clipped; a relative clipped mass above 1e-3 is an error.
/// One instance precomputes the spectrum and samples any number of paths.
class CirculantEmbedding {
 public:
  CirculantEmbedding(const CovarianceModel& model, double t, double dt);
  PathGrid sample(std::uint64_t seed) const;
  double clipped_mass() const { return clipped_; }
  std::int64_t n() const { return n_; }
  std::int64_t ring() const { return ring_; }

 private:
  double dt_ = 0.0;
  std::int64_t n_ = 0;
  std::int64_t ring_ = 0;
  Eigen::ArrayXd scaled_sqrt_eigs_;  // sqrt(mu_q M) for the half spectrum
  double clipped_ = 0.0;
};

/// One path of X on {0, dt, ..., n dt <= t}, exact in law when the embedding
/// is nonnegative definite; bit-identical for equal seeds.
PathGrid sample_path(const CovarianceModel& model, double t, double dt, std::uint64_t seed);

/// Strict sign changes of X - target across the grid. A grid value exactly
/// on the target inherits the sign of its left neighbor (first point: the
/// first differing neighbor to the right).
std::int64_t count_crossings(const PathGrid& path, const Target& target);

struct McSummary {
  std::int64_t n_paths = 0;
  std::string target;
  double mean_count = 0.0;
  double second_factorial = 0.0;  // mean of N(N-1)
  double variance = 0.0;
  double se_mean = 0.0;
  double se_second_factorial = 0.0;
  double se_variance = 0.0;
  double dt = 0.0;
  double t = 0.0;
  std::uint64_t seed = 0;
  double clipped_mass = 0.0;
};

struct McControl {
  int threads = 0;  // 0: hardware concurrency
};

/// Ensemble moments over n_paths independent paths with per-path derived
/// seeds; aggregation runs in index order after all paths complete, so any
/// thread schedule produces the same summary.
McSummary mc_moments(const CovarianceModel& model, const Target& target, double t, double dt,
                     std::int64_t n_paths, std::uint64_t seed, const McControl& control = {});

struct ProbeRow {
  double dt = 0.0;
  double mean_count = 0.0;
  double variance = 0.0;
  double se_variance = 0.0;
  std::int64_t n_paths = 0;
};

/// Empirical Var(N) across a decreasing dt sequence: stabilizes under the
/// integrability of L, keeps growing when it fails.
std::vector<ProbeRow> divergence_probe(const CovarianceModel& model, double x, double t,
                                       const std::vector<double>& dt_sequence,
                                       std::int64_t n_paths, std::uint64_t seed,
                                       const McControl& control = {});

}  // namespace crossings

#include "crossings/simulate.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <complex>
#include <limits>
#include <thread>

#include "crossings/error.hpp"

namespace crossings {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// xoshiro256** with a splitmix64-seeded state; integer-only, so identical
// streams on every platform.
struct Rng {
  std::uint64_t s[4];

  explicit Rng(std::uint64_t seed) {
    for (auto& w : s) w = splitmix64(seed);
  }
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t next() {
    std::uint64_t result = rotl(s[1] * 5, 7) * 9;
    std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }
  double uniform() {  // (0, 1]
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }
  // Marsaglia polar method; two normals per acceptance.
  void normal_pair(double& z1, double& z2) {
    for (;;) {
      double u = 2.0 * uniform() - 1.0;
      double v = 2.0 * uniform() - 1.0;
      double s2 = u * u + v * v;
      if (s2 > 0.0 && s2 < 1.0) {
        double f = std::sqrt(-2.0 * std::log(s2) / s2);
        z1 = u * f;
        z2 = v * f;
        return;
      }
    }
  }
};

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += kGolden);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t path_seed(std::uint64_t master_seed, std::int64_t index) {
  std::uint64_t state = master_seed + kGolden * static_cast<std::uint64_t>(index + 1);
  return splitmix64(state);
}

std::string target_label(const Target& target) {
  if (std::holds_alternative<double>(target))
    return "level " + std::to_string(std::get<double>(target));
  return std::get<CurveSpec>(target).describe();
}

CirculantEmbedding::CirculantEmbedding(const CovarianceModel& model, double t, double dt) {
  if (!model.simulable())
    throw Error(ErrorKind::Unsupported,
                model.describe() + " is a diagnostics-only model and cannot be simulated");
  if (!(dt > 0.0) || !(t > 0.0)) throw Error(ErrorKind::Domain, "need positive t and dt");
  n_ = static_cast<std::int64_t>(std::floor(t / dt)) + 1;
  if (n_ < 2) throw Error(ErrorKind::Domain, "grid needs at least 2 points");
  if (n_ > (1LL << 22)) throw Error(ErrorKind::Domain, "grid exceeds 2^22 points");
  dt_ = dt;
  if (model.has_spectral_density()) {
    // Exact-in-law sampling from the folded spectral density: eigenvalues
    // are density values, nonnegative by construction, so nothing is ever
    // clipped. The ring is long enough that covariance periodization images
    // are negligible.
    std::uint64_t want = std::max<std::uint64_t>(static_cast<std::uint64_t>(4 * n_),
                                                 static_cast<std::uint64_t>(64.0 / dt));
    ring_ = static_cast<std::int64_t>(std::bit_ceil(std::min<std::uint64_t>(want, 1ULL << 23)));
    const std::int64_t half = ring_ / 2;
    const double base = 2.0 * std::numbers::pi / (static_cast<double>(ring_) * dt);
    const double wrap = 2.0 * std::numbers::pi / dt;
    scaled_sqrt_eigs_.resize(half + 1);
    std::vector<double> mu(static_cast<std::size_t>(half) + 1);
    double total = 0.0;
    for (std::int64_t q = 0; q <= half; ++q) {
      double lam = base * static_cast<double>(q);
      double dens = model.spectral_density(lam) + model.spectral_density(wrap - lam) +
                    model.spectral_density(wrap + lam) +
                    model.spectral_density(2.0 * wrap - lam);
      mu[static_cast<std::size_t>(q)] = std::numbers::pi / dt * dens;
      double weight = (q == 0 || q == half) ? 1.0 : 2.0;
      total += weight * mu[static_cast<std::size_t>(q)];
    }
    total /= static_cast<double>(ring_);
    for (std::int64_t q = 0; q <= half; ++q)
      scaled_sqrt_eigs_(static_cast<Eigen::Index>(q)) =
          std::sqrt(mu[static_cast<std::size_t>(q)] / total * static_cast<double>(ring_));
    clipped_ = 0.0;
    return;
  }
  // The ring starts at the smallest power of two >= 4n and doubles until the
  // wrap-around mismatch stops bleeding eigenvalue mass. The target is far
  // below the 1e-3 refusal threshold: clipping only removes the negative
  // half of the wrap artifact, and the surviving positive half rides the
  // paths as white noise, which crossing counts feel as soon as it nears
  // the genuine increment variance 2(1 - r(dt)).
  const double clip_target = std::min(1e-4, 0.02 * (1.0 - model.r(dt)));
  ring_ = static_cast<std::int64_t>(std::bit_ceil(static_cast<std::uint64_t>(4 * n_)));
  for (;; ring_ *= 2) {
    const double max_lag = 0.5 * static_cast<double>(ring_) * dt;
    if (max_lag > model.delta_max())
      throw Error(ErrorKind::Domain,
                  "embedding needs r up to lag " + std::to_string(max_lag) +
                      " > delta_max; raise delta_max or shorten the horizon");
    std::vector<double> c(static_cast<std::size_t>(ring_));
    for (std::int64_t j = 0; j < ring_; ++j) {
      std::int64_t d = std::min(j, ring_ - j);
      c[static_cast<std::size_t>(j)] = model.r(static_cast<double>(d) * dt);
    }
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spec;
    fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    fft.fwd(spec, c);

    scaled_sqrt_eigs_.resize(static_cast<Eigen::Index>(spec.size()));
    double neg = 0.0, total = 0.0;
    for (std::size_t q = 0; q < spec.size(); ++q) {
      double mu = spec[q].real();
      total += std::abs(mu);
      if (mu < 0.0) {
        neg += -mu;
        mu = 0.0;
      }
      scaled_sqrt_eigs_(static_cast<Eigen::Index>(q)) =
          std::sqrt(mu * static_cast<double>(ring_));
    }
    clipped_ = neg / total;
    if (clipped_ <= clip_target) return;
    if (ring_ >= (1LL << 23)) {
      if (clipped_ <= 1e-3) return;  // acceptable by contract, reported
      throw Error(ErrorKind::Simulation,
                  "circulant embedding failed: clipped eigenvalue mass " +
                      std::to_string(clipped_) +
                      " > 1e-3 even on the largest ring; try a smaller dt");
    }
  }
}

PathGrid CirculantEmbedding::sample(std::uint64_t seed) const {
  const std::int64_t m = ring_;
  const std::int64_t half = m / 2;
  Rng rng(seed);
  std::vector<std::complex<double>> y(static_cast<std::size_t>(half) + 1);
  double z1, z2;
  rng.normal_pair(z1, z2);
  y[0] = scaled_sqrt_eigs_(0) * z1;
  y[static_cast<std::size_t>(half)] = scaled_sqrt_eigs_(static_cast<Eigen::Index>(half)) * z2;
  const double inv_sqrt2 = 0.7071067811865475244;
  for (std::int64_t q = 1; q < half; ++q) {
    rng.normal_pair(z1, z2);
    y[static_cast<std::size_t>(q)] =
        scaled_sqrt_eigs_(static_cast<Eigen::Index>(q)) *
        std::complex<double>(z1 * inv_sqrt2, z2 * inv_sqrt2);
  }
  thread_local Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> ring_path(static_cast<std::size_t>(m));
  fft.inv(ring_path, y);

  PathGrid path;
  path.dt = dt_;
  path.n = n_;
  path.seed = seed;
  path.values = Eigen::Map<Eigen::ArrayXd>(ring_path.data(), static_cast<Eigen::Index>(n_));
  return path;
}

PathGrid sample_path(const CovarianceModel& model, double t, double dt, std::uint64_t seed) {
  CirculantEmbedding emb(model, t, dt);
  return emb.sample(seed);
}

std::int64_t count_crossings(const PathGrid& path, const Target& target) {
  const std::int64_t n = path.n;
  auto target_at = [&](std::int64_t i) -> double {
    if (std::holds_alternative<double>(target)) return std::get<double>(target);
    return std::get<CurveSpec>(target).psi(static_cast<double>(i) * path.dt);
  };
  // resolve signs with the tie rule: zeros inherit the left sign, a leading
  // zero takes the first nonzero sign to its right
  int prev_sign = 0;
  std::int64_t first = 0;
  while (first < n) {
    double d = path.values(static_cast<Eigen::Index>(first)) - target_at(first);
    if (d != 0.0) {
      prev_sign = d > 0.0 ? 1 : -1;
      break;
    }
    ++first;
  }
  if (first == n) return 0;  // identically on target: no strict sign change
  std::int64_t crossings = 0;
  for (std::int64_t i = first + 1; i < n; ++i) {
    double d = path.values(static_cast<Eigen::Index>(i)) - target_at(i);
    int s = d > 0.0 ? 1 : (d < 0.0 ? -1 : prev_sign);
    if (s != prev_sign) ++crossings;
    prev_sign = s;
  }
  return crossings;
}

McSummary mc_moments(const CovarianceModel& model, const Target& target, double t, double dt,
                     std::int64_t n_paths, std::uint64_t seed, const McControl& control) {
  if (n_paths < 1) throw Error(ErrorKind::Domain, "need at least one path");
  CirculantEmbedding emb(model, t, dt);

  // curve values on the grid are shared by every path
  Target effective = target;
  if (std::holds_alternative<CurveSpec>(target)) {
    const CurveSpec& c = std::get<CurveSpec>(target);
    if (c.is_constant_level()) effective = Target{*c.constant_level()};
  }
  std::vector<double> psi_grid;
  if (std::holds_alternative<CurveSpec>(effective)) {
    const CurveSpec& c = std::get<CurveSpec>(effective);
    psi_grid.resize(static_cast<std::size_t>(emb.n()));
    for (std::int64_t i = 0; i < emb.n(); ++i)
      psi_grid[static_cast<std::size_t>(i)] = c.psi(static_cast<double>(i) * dt);
  }

  std::vector<double> counts(static_cast<std::size_t>(n_paths));
  const int threads = std::min<std::int64_t>(resolve_threads(control.threads), n_paths);
  auto worker = [&](int w) {
    for (std::int64_t i = w; i < n_paths; i += threads) {
      PathGrid p = emb.sample(path_seed(seed, i));
      if (!psi_grid.empty()) p.values -= Eigen::Map<const Eigen::ArrayXd>(
          psi_grid.data(), static_cast<Eigen::Index>(psi_grid.size()));
      counts[static_cast<std::size_t>(i)] = static_cast<double>(
          count_crossings(p, psi_grid.empty() ? effective : Target{0.0}));
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& th : pool) th.join();
  }

  // index-order reduction: the summary is schedule-independent
  McSummary s;
  s.n_paths = n_paths;
  s.target = target_label(target);
  s.dt = dt;
  s.t = t;
  s.seed = seed;
  s.clipped_mass = emb.clipped_mass();
  const double n = static_cast<double>(n_paths);
  double sum = 0.0, sum_fac = 0.0;
  for (double c : counts) {
    sum += c;
    sum_fac += c * (c - 1.0);
  }
  s.mean_count = sum / n;
  s.second_factorial = sum_fac / n;
  double ss_mean = 0.0, ss_fac = 0.0, m4 = 0.0;
  for (double c : counts) {
    double d = c - s.mean_count;
    ss_mean += d * d;
    m4 += d * d * d * d;
    double df = c * (c - 1.0) - s.second_factorial;
    ss_fac += df * df;
  }
  s.variance = n_paths > 1 ? ss_mean / (n - 1.0) : 0.0;
  s.se_mean = n_paths > 1 ? std::sqrt(s.variance / n) : std::numeric_limits<double>::infinity();
  s.se_second_factorial =
      n_paths > 1 ? std::sqrt(ss_fac / (n - 1.0) / n) : std::numeric_limits<double>::infinity();
  m4 /= n;
  double var_of_var = (m4 - s.variance * s.variance * (n - 3.0) / (n - 1.0)) / n;
  s.se_variance = n_paths > 1 && var_of_var > 0.0 ? std::sqrt(var_of_var)
                                                  : std::numeric_limits<double>::infinity();
  return s;
}

std::vector<ProbeRow> divergence_probe(const CovarianceModel& model, double x, double t,
                                       const std::vector<double>& dt_sequence,
                                       std::int64_t n_paths, std::uint64_t seed,
                                       const McControl& control) {
  std::vector<ProbeRow> rows;
  for (double dt : dt_sequence) {
    McSummary s = mc_moments(model, Target{x}, t, dt, n_paths, seed, control);
    rows.push_back({dt, s.mean_count, s.variance, s.se_variance, n_paths});
  }
  return rows;
}

}  // namespace crossings

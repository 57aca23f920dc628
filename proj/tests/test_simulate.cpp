#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "crossings/error.hpp"
#include "crossings/moments.hpp"
#include "crossings/simulate.hpp"

using namespace crossings;

namespace {

PathGrid make_path(std::initializer_list<double> vals, double dt = 1.0) {
  PathGrid p;
  p.dt = dt;
  p.n = static_cast<std::int64_t>(vals.size());
  p.values = Eigen::ArrayXd(p.n);
  std::int64_t i = 0;
  for (double v : vals) p.values(i++) = v;
  return p;
}

}  // namespace

TEST_CASE("crossing counts on hand-built paths") {
  CHECK(count_crossings(make_path({1.0, -1.0, 1.0}), Target{0.0}) == 2);
  CHECK(count_crossings(make_path({2.0, 2.0, 2.0}), Target{0.0}) == 0);
  CHECK(count_crossings(make_path({1.0, -1.0, 1.0}), Target{CurveSpec::constant(0.0)}) == 2);
  // tie rule: an exact hit inherits the left sign
  CHECK(count_crossings(make_path({1.0, 0.0, -1.0}), Target{0.0}) == 1);
  CHECK(count_crossings(make_path({1.0, 0.0, 1.0}), Target{0.0}) == 0);
  // leading zero takes the first nonzero sign to its right
  CHECK(count_crossings(make_path({0.0, 1.0, -1.0}), Target{0.0}) == 1);
  CHECK(count_crossings(make_path({0.0, 0.0, 0.0}), Target{0.0}) == 0);
}

TEST_CASE("same seed gives a bit-identical path") {
  auto g = CovarianceModel::gaussian(1.0);
  PathGrid a = sample_path(g, 2.0, 1e-2, 42);
  PathGrid b = sample_path(g, 2.0, 1e-2, 42);
  REQUIRE(a.n == b.n);
  for (std::int64_t i = 0; i < a.n; ++i) CHECK(a.values(i) == b.values(i));
  PathGrid c = sample_path(g, 2.0, 1e-2, 43);
  CHECK(a.values(0) != c.values(0));
}

TEST_CASE("marginal law is standard normal within sampling error") {
  auto g = CovarianceModel::gaussian(1.0);
  CirculantEmbedding emb(g, 10.0, 1e-3);
  CHECK(emb.clipped_mass() < 1e-10);
  double acc = 0.0;
  std::int64_t total = 0;
  for (int i = 0; i < 100; ++i) {
    PathGrid p = emb.sample(path_seed(7, i));
    acc += p.values.square().sum();
    total += p.n;
  }
  double var = acc / static_cast<double>(total);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("empirical lag covariance matches the model") {
  auto g = CovarianceModel::gaussian(1.0);
  const double dt = 0.01;
  CirculantEmbedding emb(g, 2.0, dt);
  const int n_paths = 10000;
  const std::int64_t n = emb.n();
  std::vector<double> acc(static_cast<std::size_t>(n), 0.0);
  std::int64_t pairs = 0;
  for (int i = 0; i < n_paths; ++i) {
    PathGrid p = emb.sample(path_seed(1234, i));
    for (std::int64_t k = 0; k < n; ++k) acc[static_cast<std::size_t>(k)] += p.values(0) * p.values(k);
    ++pairs;
  }
  double worst = 0.0;
  for (std::int64_t k = 0; k < n; ++k) {
    double emp = acc[static_cast<std::size_t>(k)] / static_cast<double>(pairs);
    worst = std::max(worst, std::abs(emp - g.r(static_cast<double>(k) * dt)));
  }
  CHECK(worst < 0.02);
}

TEST_CASE("parity of the crossing count") {
  auto g = CovarianceModel::gaussian(1.0);
  CirculantEmbedding emb(g, 5.0, 1e-2);
  for (int i = 0; i < 200; ++i) {
    PathGrid p = emb.sample(path_seed(99, i));
    for (double x : {0.0, 0.7}) {
      std::int64_t c = count_crossings(p, Target{x});
      double d0 = p.values(0) - x;
      double dn = p.values(p.n - 1) - x;
      bool same_side = (d0 > 0) == (dn > 0);
      CAPTURE(i);
      CHECK((c % 2 == 0) == same_side);
    }
  }
}

TEST_CASE("ensemble summary: reproducible, stationary, level-monotone") {
  auto g = CovarianceModel::gaussian(1.0);
  McSummary a = mc_moments(g, Target{0.0}, 4.0, 5e-3, 2000, 2024);
  McSummary b = mc_moments(g, Target{0.0}, 4.0, 5e-3, 2000, 2024);
  CHECK(a.mean_count == b.mean_count);
  CHECK(a.second_factorial == b.second_factorial);
  CHECK(a.variance == b.variance);

  // rice check at loose tolerance: E N = 4 / pi
  double expect = 4.0 / std::numbers::pi;
  CHECK(std::abs(a.mean_count - expect) < 4.0 * a.se_mean + 0.02);

  // monotone level effect
  McSummary x2 = mc_moments(g, Target{2.0}, 4.0, 5e-3, 2000, 2024);
  CHECK(a.mean_count > x2.mean_count);

  // stationarity: window counts agree within combined error
  CirculantEmbedding emb(g, 4.0, 5e-3);
  double first = 0.0, second = 0.0;
  const int n_paths = 2000;
  for (int i = 0; i < n_paths; ++i) {
    PathGrid p = emb.sample(path_seed(5150, i));
    std::int64_t half = p.n / 2;
    PathGrid w1{p.dt, half, p.values.head(half), 0};
    PathGrid w2{p.dt, p.n - half, p.values.tail(p.n - half), 0};
    first += static_cast<double>(count_crossings(w1, Target{0.0}));
    second += static_cast<double>(count_crossings(w2, Target{0.0}));
  }
  first /= n_paths;
  second /= n_paths;
  CHECK(std::abs(first - second) < 0.1);
}

TEST_CASE("thread count does not change the summary") {
  auto g = CovarianceModel::gaussian(1.0);
  McControl one;
  one.threads = 1;
  McControl four;
  four.threads = 4;
  McSummary a = mc_moments(g, Target{0.0}, 2.0, 1e-2, 500, 77, one);
  McSummary b = mc_moments(g, Target{0.0}, 2.0, 1e-2, 500, 77, four);
  CHECK(a.mean_count == b.mean_count);
  CHECK(a.variance == b.variance);
}

TEST_CASE("curve crossings equal level crossings of the residual") {
  auto g = CovarianceModel::gaussian(1.0);
  auto sine = CurveSpec::from_expressions("sin(s)", "cos(s)");
  CirculantEmbedding emb(g, 2.0, 1e-2);
  for (int i = 0; i < 50; ++i) {
    PathGrid p = emb.sample(path_seed(31, i));
    std::int64_t direct = count_crossings(p, Target{sine});
    PathGrid shifted = p;
    for (std::int64_t k = 0; k < p.n; ++k)
      shifted.values(k) -= std::sin(static_cast<double>(k) * p.dt);
    CHECK(direct == count_crossings(shifted, Target{0.0}));
  }
}

TEST_CASE("divergence probe basics") {
  auto g = CovarianceModel::gaussian(1.0);
  CHECK(divergence_probe(g, 0.0, 1.0, {}, 100, 1).empty());
  auto rows = divergence_probe(g, 0.0, 2.0, {2e-2, 1e-2}, 400, 11);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].dt == 2e-2);
  CHECK(rows[1].dt == 1e-2);
  CHECK(rows[0].variance > 0.0);
}

TEST_CASE("simulation preconditions") {
  auto syn = CovarianceModel::synthetic_theta2("1/log(tau)^2", 0.5);
  CHECK_THROWS_AS(sample_path(syn, 1.0, 1e-2, 1), Error);
  auto g = CovarianceModel::gaussian(1.0, 3.0);
  // embedding ring needs lags beyond delta_max
  CHECK_THROWS_AS(sample_path(g, 2.0, 1e-2, 1), Error);
  CHECK_THROWS_AS(sample_path(CovarianceModel::gaussian(1.0), 1.0, 1e-9, 1), Error);
}

TEST_CASE("mc agreement with the rice mean at t = 10") {
  auto g = CovarianceModel::gaussian(1.0);
  McSummary s = mc_moments(g, Target{0.0}, 10.0, 2e-3, 1500, 314159);
  double expect = 10.0 / std::numbers::pi;
  CAPTURE(s.mean_count);
  CAPTURE(s.se_mean);
  CHECK(std::abs(s.mean_count - expect) < 3.5 * s.se_mean + 0.02);
}

TEST_CASE("halving dt moves the mean by less than a standard error") {
  auto g = CovarianceModel::gaussian(1.0);
  McSummary coarse = mc_moments(g, Target{0.0}, 5.0, 2e-3, 3000, 555);
  McSummary fine = mc_moments(g, Target{0.0}, 5.0, 1e-3, 3000, 555);
  double combined = std::sqrt(coarse.se_mean * coarse.se_mean + fine.se_mean * fine.se_mean);
  CHECK(std::abs(coarse.mean_count - fine.mean_count) < combined);
}

TEST_CASE("sine-curve ensemble agrees with the curve second moment") {
  auto g = CovarianceModel::gaussian(1.0);
  auto sine = CurveSpec::from_expressions("sin(s)", "cos(s)");
  MomentResult mr = curve_second_moment(g, sine, 2.0, 0.5);
  McSummary mc = mc_moments(g, Target{sine}, 2.0, 1e-3, 10000, 2718);
  double combined = std::sqrt(mc.se_second_factorial * mc.se_second_factorial +
                              mr.quad_error * mr.quad_error);
  CAPTURE(mr.m2);
  CAPTURE(mc.second_factorial);
  CHECK(std::abs(mr.m2 - mc.second_factorial) < 2.0 * combined);
  // the generalized mean as well
  double zm = (mr.rice_mean - mc.mean_count) / mc.se_mean;
  CHECK(std::abs(zm) < 3.0);
}

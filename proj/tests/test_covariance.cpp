#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "crossings/covariance.hpp"
#include "crossings/error.hpp"
#include "oracles.hpp"

using namespace crossings;

TEST_CASE("gaussian model validates with the textbook jet at zero") {
  auto m = CovarianceModel::parse("exp(-tau^2/2)", 5.0);
  Jet4 j = m.derivatives_at(0.0);
  CHECK(j.d[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(j.d[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(j.d[2] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(j.d[3] == doctest::Approx(0.0).epsilon(1e-12));
  // Taylor series 1 - tau^2/2 + tau^4/8 gives r''''(0) = 4! / 8 = 3
  CHECK(j.d[4] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(m.rpp0() == doctest::Approx(-1.0));
  CHECK(m.eq1().declared);
}

TEST_CASE("gaussian jet at tau = 1") {
  auto m = CovarianceModel::gaussian(1.0, 5.0);
  Jet4 j = m.derivatives_at(1.0);
  double e = std::exp(-0.5);
  CHECK(j.d[0] == doctest::Approx(e).epsilon(1e-13));
  CHECK(j.d[1] == doctest::Approx(-e).epsilon(1e-13));
  // r''(tau) = (tau^2 - 1) exp(-tau^2/2) vanishes at tau = 1
  CHECK(std::abs(j.d[2]) < 1e-13);
}

TEST_CASE("cosine model validates") {
  auto m = CovarianceModel::parse("cos(tau)", 3.0);
  Jet4 j = m.derivatives_at(0.0);
  CHECK(j.d[2] == doctest::Approx(-1.0));
  CHECK(j.d[4] == doctest::Approx(1.0));
  CHECK(m.eq1().declared);
}

TEST_CASE("r(0) != 1 is rejected with the measured value") {
  try {
    CovarianceModel::parse("2*exp(-tau^2)", 5.0);
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Validation);
    CHECK(std::string(e.what()).find("r(0) = 2") != std::string::npos);
  }
}

TEST_CASE("other validation failures name the broken invariant") {
  // r'(0) != 0
  CHECK_THROWS_AS(CovarianceModel::parse("exp(-tau)", 5.0), Error);
  // r''(0) >= 0
  CHECK_THROWS_AS(CovarianceModel::parse("1+tau^2-tau^2", 5.0), Error);
  // |r| > 1 away from zero: dips below -1 near tau = pi
  CHECK_THROWS_AS(CovarianceModel::parse("cos(tau)+0.002*(cos(3*tau)-1)", 4.0), Error);
  // malformed text
  CHECK_THROWS_AS(CovarianceModel::parse("exp(-tau^2", 5.0), Error);
}

TEST_CASE("theta values match high-precision series") {
  auto g = CovarianceModel::gaussian(1.0, 5.0);
  // leading order tau^4/8 at tau = 0.1
  CHECK(g.theta_at(0.1) == doctest::Approx(std::exp(-0.005) - 1.0 + 0.005).epsilon(1e-10));
  CHECK(g.theta_at(0.1) / 1.25e-5 == doctest::Approx(1.0).epsilon(2e-3));

  auto c = CovarianceModel::cosine(1.0, 3.0);
  CHECK(c.theta_at(0.1) == doctest::Approx(std::cos(0.1) - 1.0 + 0.005).epsilon(1e-10));
  CHECK(c.theta_at(0.1) / 4.1653e-6 == doctest::Approx(1.0).epsilon(1e-3));

  CHECK_THROWS_AS(g.theta_at(0.0), Error);
  CHECK_THROWS_AS(g.theta_at(6.0), Error);
}

TEST_CASE("theta limit sequences shrink toward zero") {
  // Builtins carry cancellation-free theta forms: strict positivity holds on
  // the whole grid. Parsed expressions bottom out at the long double floor,
  // where theta is indistinguishable from zero.
  struct Case { CovarianceModel m; bool exact; };
  Case cases[] = {{CovarianceModel::gaussian(1.0, 8.0), true},
                  {CovarianceModel::cosine(1.0, 8.0), true},
                  {CovarianceModel::parse("exp(-tau^2/2)*cos(tau/2)", 8.0), false}};
  for (const auto& [m, exact] : cases) {
    CAPTURE(m.describe());
    REQUIRE(m.eq1().declared);
    double delta = m.eq1().verified_delta;
    double first = 0.0, last = 0.0;
    for (int j = 0; j <= 20; ++j) {
      double tau = delta * std::pow(2.0, -j);
      double theta = m.theta_at(tau);
      double v = theta / (tau * tau);
      if (exact)
        CHECK(theta > 0.0);
      else
        CHECK(theta > -1e-17);
      if (j == 0) first = v;
      last = v;
    }
    CHECK(last < 1e-3);
    CHECK(last <= first);
  }
}

TEST_CASE("jet derivatives agree with finite differences at random lags") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> U(0.05, 0.95);
  auto models = {CovarianceModel::gaussian(1.0, 5.0), CovarianceModel::cosine(1.0, 5.0),
                 CovarianceModel::parse("exp(-tau^2/3)*cos(tau)", 5.0),
                 CovarianceModel::parse("1/(1+tau^2)", 5.0)};
  for (const auto& m : models) {
    auto f = [&](long double t) -> long double {
      return crossings::expr::eval(*m.expression(), t);
    };
    for (int i = 0; i < 20; ++i) {
      double tau = U(rng) * 5.0;
      Jet4 j = m.derivatives_at(tau);
      for (int k = 1; k <= 4; ++k) {
        double fd = oracles::central_diff4(f, tau, k);
        double scale = std::max({1.0, std::abs(fd), std::abs(j.d[k])});
        CAPTURE(m.describe());
        CAPTURE(tau);
        CAPTURE(k);
        CHECK(std::abs(j.d[k] - fd) / scale < 1e-5);
      }
    }
  }
}

TEST_CASE("geman function values") {
  auto g = CovarianceModel::gaussian(1.0, 5.0);
  // L(tau)/tau -> r''''(0)/2 = 3/2
  CHECK(g.geman_L(1e-4) / 1e-4 == doctest::Approx(1.5).epsilon(1e-4));
  auto c = CovarianceModel::cosine(1.0, 3.0);
  CHECK(c.geman_L(1.0) == doctest::Approx(1.0 - std::cos(1.0)).epsilon(1e-12));
  CHECK_THROWS_AS(g.geman_L(0.0), Error);
}

TEST_CASE("synthetic theta'' models expose L only") {
  auto syn = CovarianceModel::synthetic_theta2("1/(0-log(tau))", 0.5);
  CHECK(syn.synthetic());
  CHECK(!syn.simulable());
  double tau = 0.01;
  CHECK(syn.geman_L(tau) == doctest::Approx(1.0 / (tau * std::abs(std::log(tau)))).epsilon(1e-12));
  CHECK_THROWS_AS(syn.r(0.1), Error);
  CHECK_THROWS_AS(syn.theta_at(0.1), Error);
  CHECK_THROWS_AS(syn.derivatives_at(0.1), Error);
}

TEST_CASE("builtin text forms parse") {
  auto g = CovarianceModel::parse("gaussian(2)", 5.0);
  CHECK(g.rpp0() == doctest::Approx(-0.25));
  auto c = CovarianceModel::parse("cosine(3)", 5.0);
  CHECK(c.rpp0() == doctest::Approx(-9.0));
  CHECK(c.r(1.0) == doctest::Approx(std::cos(3.0)));
}

TEST_CASE("small-lag regression constants exist for smooth models") {
  auto g = CovarianceModel::gaussian(1.0, 5.0);
  const auto& sl = g.small_lag();
  REQUIRE(sl.usable);
  CHECK(sl.q0 == doctest::Approx(0.5));       // (3 - 1)/4
  CHECK(sl.s2 == doctest::Approx(-1.0 / 6.0).epsilon(1e-3));
  CHECK(sl.kappa > 0.0);

  auto c = CovarianceModel::cosine(1.0, 5.0);
  CHECK(!c.small_lag().usable);  // single spectral atom: sigma^2 identically 0
}

TEST_CASE("rescaled models keep their structure") {
  auto g = CovarianceModel::gaussian(1.0, 8.0);
  auto g2 = g.rescaled(2.0);
  CHECK(g2.r(0.5) == doctest::Approx(g.r(1.0)).epsilon(1e-12));
  CHECK(g2.rpp0() == doctest::Approx(-4.0).epsilon(1e-10));
}

TEST_CASE("spectral density model: gaussian-like base reproduces moments") {
  auto sd = SpectralDensity::from_expression("exp(-lambda^2/2)", 12.0);
  auto m = CovarianceModel::from_spectral(std::move(sd), 5.0);
  CHECK(m.rpp0() == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(m.fourth_deriv_at0() == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(m.r(1.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-7));
  CHECK(m.eq1().declared);
}

TEST_CASE("heavy-tail mixture: finite second moment, L ~ 1/(tau |log tau|)") {
  auto m = CovarianceModel::gauss_log2tail(0.5, 100.0);
  CHECK(m.rpp0() < 0.0);
  CHECK(!std::isfinite(m.fourth_deriv_at0()));
  CHECK(m.derivative_order() == 2);
  // L(tau) * tau * |log tau| hovers near the tail constant as tau -> 0
  double w_over_z3 = 0.5 / osc::tail_mass(3);
  for (double tau : {1e-4, 1e-6, 1e-8}) {
    double ratio = m.geman_L(tau) * tau * std::abs(std::log(tau)) / w_over_z3;
    CAPTURE(tau);
    CHECK(ratio > 0.5);
    CHECK(ratio < 2.0);
  }
  CHECK(m.simulable());
}

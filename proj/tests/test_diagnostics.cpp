#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "crossings/diagnostics.hpp"
#include "crossings/error.hpp"
#include "crossings/moments.hpp"

using namespace crossings;

TEST_CASE("geman function values") {
  auto g = CovarianceModel::gaussian(1.0);
  // L(tau)/tau -> r''''(0)/2 = 3/2 (Taylor oracle)
  CHECK(geman_function(g, 1e-3) / 1e-3 == doctest::Approx(1.5).epsilon(1e-5));
  CHECK(geman_function(g, 1e-5) / 1e-5 == doctest::Approx(1.5).epsilon(1e-6));
  auto c = CovarianceModel::cosine(1.0, 8.0);
  CHECK(geman_function(c, 1.0) == doctest::Approx(1.0 - std::cos(1.0)).epsilon(1e-13));
  CHECK(geman_function(c, 1.0) == doctest::Approx(0.45970).epsilon(1e-4));
  // r''(delta) = r''(0) makes L vanish: cosine at 2 pi
  CHECK(geman_function(c, 2.0 * std::numbers::pi) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("classifier calibration on the four reference models") {
  auto gauss = classify_geman(CovarianceModel::gaussian(1.0), 0.5);
  CHECK(gauss.verdict == Verdict::Integrable);
  CHECK(gauss.local_exponent == doctest::Approx(1.0).epsilon(0.02));

  auto borderline = classify_geman(CovarianceModel::synthetic_theta2("1/(0-log(tau))", 0.5), 0.5);
  CHECK(borderline.verdict == Verdict::NonIntegrable);
  CHECK(borderline.local_exponent == doctest::Approx(-1.0).epsilon(0.02));
  CHECK(borderline.log_exponent == doctest::Approx(-1.0).epsilon(0.05));

  auto logsq = classify_geman(CovarianceModel::synthetic_theta2("1/log(tau)^2", 0.5), 0.5);
  CHECK(logsq.verdict == Verdict::Integrable);
  CHECK(logsq.log_exponent == doctest::Approx(-2.0).epsilon(0.05));

  auto cosine = classify_geman(CovarianceModel::cosine(1.0, 5.0), 0.5);
  CHECK(cosine.verdict == Verdict::Integrable);
}

TEST_CASE("L stays nonnegative on the grid for declared models") {
  for (auto m : {CovarianceModel::gaussian(1.0), CovarianceModel::cosine(1.0, 5.0),
                 CovarianceModel::synthetic_theta2("1/(0-log(tau))", 0.5)}) {
    REQUIRE(m.eq1().declared);
    auto rep = classify_geman(m, std::min(0.5, m.delta_max()));
    for (double L : rep.L_values) CHECK(L >= -1e-9);
  }
}

TEST_CASE("verdicts survive time rescaling") {
  for (double scale : {0.5, 2.0}) {
    auto gauss = CovarianceModel::gaussian(1.0).rescaled(scale);
    CHECK(classify_geman(gauss, 0.5).verdict == Verdict::Integrable);
    auto borderline =
        CovarianceModel::synthetic_theta2("1/(0-log(tau))", 1.0).rescaled(scale);
    CHECK(classify_geman(borderline, std::min(0.5, borderline.delta_max())).verdict ==
          Verdict::NonIntegrable);
  }
}

TEST_CASE("geman report invariants") {
  auto rep = classify_geman(CovarianceModel::gaussian(1.0), 0.5);
  CHECK(rep.grid.size() >= 8);
  CHECK(rep.grid.front() == doctest::Approx(0.5));
  // integrable verdict implies endpoint stability
  CHECK(rep.integral_drift < 0.01);
  CHECK(rep.integral_estimate > 0.0);
  // independent Simpson oracle of integral (tau^2 e^{-tau^2/2} - expm1(-tau^2/2))/tau
  // over (0, 0.5]: 0.17810298 (leading order 1.5 tau integrates to 0.1875,
  // the exponential damping trims it)
  CHECK(std::abs(rep.integral_estimate - 0.17810298) < 2e-4);
}

TEST_CASE("classifier rejects bad deltas and starved grids") {
  auto g = CovarianceModel::gaussian(1.0, 5.0);
  CHECK_THROWS_AS(classify_geman(g, 0.0), Error);
  CHECK_THROWS_AS(classify_geman(g, 6.0), Error);
  ClassifierControl starved;
  starved.levels = 4;
  CHECK_THROWS_AS(classify_geman(g, 0.5, starved), Error);
}

TEST_CASE("lemma report on the gaussian bell, delta = 0.5") {
  auto rep = lemma_report(CovarianceModel::gaussian(1.0), 0.5);
  CHECK(!rep.lemma1_diverging);
  CHECK(rep.lemma1_limit == doctest::Approx(1.5).epsilon(0.01));
  CHECK(rep.lemma2_rho_max <= 1e-9);
  CHECK(rep.lemma2_ratio_bound > 0.0);
  CHECK(std::isfinite(rep.lemma2_ratio_bound));
  CHECK(rep.lemma3_lower_margin >= 1.0 - 1e-6);
  CHECK(rep.lemma3_C_estimate >= 0.0);
  CHECK(std::isfinite(rep.lemma3_C_estimate));
}

TEST_CASE("lemma 3 sandwich holds pointwise on the grid") {
  auto g = CovarianceModel::gaussian(1.0);
  for (int j = 0; j <= 20; ++j) {
    double tau = 0.5 * std::pow(2.0, -j);
    double L = g.geman_L(tau);
    double sigma2 = regression_at(g, tau, 0.0).sigma2;
    CHECK(sigma2 / tau <= L * (1.0 + 1e-6));
  }
}

TEST_CASE("lemma report flags the degenerate cosine") {
  try {
    lemma_report(CovarianceModel::cosine(1.0, 5.0), 0.5);
    FAIL("expected a degenerate error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Degenerate);
  }
}

TEST_CASE("lemma 1 dichotomy: finite fourth derivative vs heavy tail") {
  auto smooth = lemma_report(CovarianceModel::parse("exp(-tau^2/2)", 8.0), 0.5);
  CHECK(!smooth.lemma1_diverging);
  CHECK(smooth.lemma1_limit ==
        doctest::Approx(CovarianceModel::gaussian(1.0).fourth_deriv_at0() / 2.0).epsilon(0.01));

  auto heavy = lemma_report(CovarianceModel::gauss_log2tail(0.5, 100.0), 0.5);
  CHECK(heavy.lemma1_diverging);
}

TEST_CASE("curve condition verdicts") {
  // Lipschitz psi-dot: gamma(h) = min(h, 2), integrand bounded
  auto sine = CurveSpec::from_expressions("sin(s)", "cos(s)");
  auto lips = curve_condition(sine, 0.5);
  CHECK(lips.verdict == Verdict::Integrable);
  CHECK(lips.gamma_estimated);

  // Hoelder gamma = C h^a
  for (double a : {0.3, 0.7, 1.0}) {
    auto curve = CurveSpec::from_callables([](double s) { return s; }, [](double) { return 1.0; },
                                           [a](double h) { return 2.0 * std::pow(h, a); },
                                           "hoelder");
    CAPTURE(a);
    CHECK(curve_condition(curve, 0.5).verdict == Verdict::Integrable);
  }

  // gamma = 1/|log h|: divergent integral
  auto rough = CurveSpec::from_callables(
      [](double s) { return s; }, [](double) { return 1.0; },
      [](double h) { return h < 1.0 ? 1.0 / std::abs(std::log(h)) : 1.0; }, "log-modulus");
  CHECK(curve_condition(rough, 0.5).verdict == Verdict::NonIntegrable);

  // constant curve: gamma vanishes identically
  CHECK(curve_condition(CurveSpec::constant(1.0), 0.5).verdict == Verdict::Integrable);
}

TEST_CASE("invalid modulus is rejected") {
  auto bad = CurveSpec::from_callables([](double s) { return s; }, [](double) { return 1.0; },
                                       [](double h) { return 1.0 - h; }, "decreasing");
  CHECK_THROWS_AS(curve_condition(bad, 0.5), Error);
}

TEST_CASE("derivative validation catches a wrong psi_dot") {
  auto bad = CurveSpec::from_expressions("sin(s)", "cos(s)+0.01");
  CHECK_THROWS_AS(bad.validate_derivative(2.0), Error);
  auto good = CurveSpec::from_expressions("sin(s)", "cos(s)");
  CHECK_NOTHROW(good.validate_derivative(2.0));
}

TEST_CASE("empirical gamma estimation approximates the sine modulus") {
  auto sine = CurveSpec::from_expressions("sin(s)", "cos(s)");
  sine.estimate_gamma(0.5);
  REQUIRE(sine.has_gamma());
  // psi-dot = cos: gamma(h) ~ h sup |sin| over [0, delta] ~ h sin(0.5)
  double h = 0.125;
  double est = sine.gamma(h);
  CHECK(est > 0.2 * h);
  CHECK(est < 1.2 * h);
  // nondecreasing
  CHECK(sine.gamma(0.25) >= sine.gamma(0.125));
}

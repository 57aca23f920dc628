// Acceptance suite: one criterion per block, one verdict line per criterion.
// Every tolerance is fixed here, in code; the suite exits nonzero when any
// criterion fails. Expect a few minutes of Monte Carlo on two cores.

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "crossings/diagnostics.hpp"
#include "crossings/moments.hpp"
#include "crossings/simulate.hpp"
#include "oracles.hpp"

using namespace crossings;

namespace {

int failures = 0;

void verdict(int index, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%d/8] %-34s %s  (%s)\n", index, name.c_str(), pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* pattern, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

constexpr std::uint64_t kSeed = 20060401;

void criterion1_rice_reproduction() {
  auto model = CovarianceModel::gaussian(1.0);
  McSummary mc = mc_moments(model, Target{0.0}, 10.0, 1e-3, 10000, kSeed);
  double expect = 10.0 / std::numbers::pi;
  double z = (mc.mean_count - expect) / mc.se_mean;
  verdict(1, "rice mean reproduction", std::abs(z) < 3.0,
          fmt("mean %.4f vs %.4f, se %.4f, z = %.2f", mc.mean_count, expect, mc.se_mean, z));
}

void criterion2_second_moment_agreement() {
  auto model = CovarianceModel::gaussian(1.0);
  MomentResult mr = second_factorial_moment(model, 0.0, 2.0, 0.5);
  McSummary mc = mc_moments(model, Target{0.0}, 2.0, 5e-4, 100000, kSeed + 1);
  double combined = std::sqrt(mc.se_second_factorial * mc.se_second_factorial +
                              mr.quad_error * mr.quad_error);
  double z = (mr.m2 - mc.second_factorial) / combined;
  verdict(2, "second-moment agreement", std::abs(z) < 3.0,
          fmt("M2 %.5f vs MC %.5f, se %.5f, z = %.2f", mr.m2, mc.second_factorial, combined, z));
}

void criterion3_theorem_dichotomy() {
  const std::vector<double> dts{1e-2, 1e-3, 1e-4};
  auto good = divergence_probe(CovarianceModel::gaussian(1.0), 0.0, 5.0, dts, 3000, kSeed + 2);
  double diff = std::abs(good[2].variance - good[1].variance);
  double se = std::sqrt(good[2].se_variance * good[2].se_variance +
                        good[1].se_variance * good[1].se_variance);
  bool stabilizes = diff < 3.0 * se;

  auto heavy = CovarianceModel::gauss_log2tail(0.5, 2000.0);
  bool heavy_verdict = classify_geman(heavy, 0.5).verdict == Verdict::NonIntegrable;
  auto bad = divergence_probe(heavy, 0.0, 5.0, dts, 3000, kSeed + 3);
  bool growing = bad[0].variance < bad[1].variance && bad[1].variance < bad[2].variance;

  verdict(3, "variance dichotomy under dt", stabilizes && growing && heavy_verdict,
          fmt("stable: |%.3f - %.3f| < 3x%.3f; growing: %.2f < %.2f < %.2f; verdict %s",
              good[1].variance, good[2].variance, se, bad[0].variance, bad[1].variance,
              bad[2].variance, heavy_verdict ? "non_integrable" : "WRONG"));
}

void criterion4_mehler_oracle() {
  std::mt19937 rng(424242);
  std::uniform_real_distribution<double> Um(-3.0, 3.0), Ur(-0.95, 0.95);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    double m1 = Um(rng), m2 = Um(rng), rho = Ur(rng);
    double series = mehler_cross(m1, m2, rho);
    double oracle = oracles::mehler_cross_oracle(m1, m2, rho);
    worst = std::max(worst, std::abs(series - oracle));
  }
  verdict(4, "mehler series vs quadrature", worst < 1e-7,
          fmt("max |series - oracle| = %.2e over 200 draws", worst));
}

void criterion5_paper_bounds() {
  bool ok = true;
  double worst_low = 1e300, worst_high = -1e300;
  std::vector<double> rhos;
  for (int i = 0; i <= 19; ++i) rhos.push_back(-0.05 * i);
  rhos.push_back(-0.97);
  rhos.push_back(-0.99);
  rhos.push_back(-1.0);
  for (double m = 0.0; m <= 3.0; m += 0.5) {
    double lower = (2.0 / std::numbers::pi) * std::exp(-m * m);
    double upper = 1.0 + m * m;
    for (double rho : rhos) {
      double A = mehler_cross(m, -m, rho);
      worst_low = std::min(worst_low, A - lower);
      worst_high = std::max(worst_high, A - upper);
      ok = ok && A >= lower - 1e-9 && A <= upper + 1e-9;
      // the upper bound holds on the positive side as well
      double Ap = mehler_cross(m, -m, -rho);
      worst_high = std::max(worst_high, Ap - upper);
      ok = ok && Ap <= upper + 1e-9;
    }
  }
  verdict(5, "paper bound suite", ok,
          fmt("min margin above lower %.2e, max excess over upper %.2e", worst_low, worst_high));
}

void criterion6_lemma_suite() {
  auto model = CovarianceModel::gaussian(1.0);
  LemmaReport rep = lemma_report(model, 0.5);
  double small = model.geman_L(1e-4) / 1e-4;
  bool ok = rep.lemma2_rho_max <= 1e-9 && rep.lemma3_lower_margin >= 1.0 - 1e-6 &&
            std::isfinite(rep.lemma3_C_estimate) && rep.lemma3_C_estimate >= 0.0 &&
            std::abs(small - 1.5) < 0.015;
  verdict(6, "lemma suite at delta = 0.5", ok,
          fmt("rho_max %.1e, L tau/sigma^2 min %.4f, C %.3f, L/tau(1e-4) %.5f",
              rep.lemma2_rho_max, rep.lemma3_lower_margin, rep.lemma3_C_estimate, small));
}

void criterion7_curve_reduction() {
  auto model = CovarianceModel::gaussian(1.0);
  bool ok = true;
  std::string detail;
  for (double x : {0.0, 1.0}) {
    MomentResult level = second_factorial_moment(model, x, 2.0, 0.5);
    MomentResult curve = curve_second_moment(model, CurveSpec::constant(x), 2.0, 0.5);
    double gap = std::abs(level.m2 - curve.m2);
    double budget = level.quad_error + curve.quad_error;
    ok = ok && gap <= budget;
    detail += fmt("x=%g gap %.1e <= %.1e; ", x, gap, budget);
  }
  auto sine = CurveSpec::from_expressions("sin(s)", "cos(s)");
  bool lips = curve_condition(sine, 0.5).verdict == Verdict::Integrable;
  auto rough = CurveSpec::from_callables(
      [](double s) { return s; }, [](double) { return 1.0; },
      [](double h) { return h < 0.99 ? 1.0 / std::abs(std::log(h)) : 1.0 / 0.01; }, "log-mod");
  bool violated = curve_condition(rough, 0.5).verdict == Verdict::NonIntegrable;
  ok = ok && lips && violated;
  detail += fmt("lipschitz %s, log-modulus %s", lips ? "satisfied" : "WRONG",
                violated ? "violated" : "WRONG");
  verdict(7, "curve reduction and condition", ok, detail);
}

void criterion8_classifier_calibration() {
  bool g = classify_geman(CovarianceModel::gaussian(1.0), 0.5).verdict == Verdict::Integrable;
  bool b = classify_geman(CovarianceModel::synthetic_theta2("1/(0-log(tau))", 0.5), 0.5)
               .verdict == Verdict::NonIntegrable;
  bool l = classify_geman(CovarianceModel::synthetic_theta2("1/log(tau)^2", 0.5), 0.5)
               .verdict == Verdict::Integrable;
  bool c = classify_geman(CovarianceModel::cosine(1.0, 5.0), 0.5).verdict ==
           Verdict::Integrable;
  verdict(8, "classifier calibration", g && b && l && c,
          fmt("gaussian %s, 1/(t|log t|) %s, 1/(t log^2 t) %s, cos %s", g ? "ok" : "WRONG",
              b ? "ok" : "WRONG", l ? "ok" : "WRONG", c ? "ok" : "WRONG"));
}

}  // namespace

int main() {
  std::printf("acceptance suite (seed %llu)\n", static_cast<unsigned long long>(kSeed));
  criterion1_rice_reproduction();
  criterion2_second_moment_agreement();
  criterion3_theorem_dichotomy();
  criterion4_mehler_oracle();
  criterion5_paper_bounds();
  criterion6_lemma_suite();
  criterion7_curve_reduction();
  criterion8_classifier_calibration();
  std::printf("%d of 8 criteria passed\n", 8 - failures);
  return failures == 0 ? 0 : 1;
}

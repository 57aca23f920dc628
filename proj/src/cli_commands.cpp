#include "crossings/cli_commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include "crossings/diagnostics.hpp"
#include "crossings/error.hpp"
#include "crossings/moments.hpp"
#include "crossings/report_json.hpp"
#include "crossings/simulate.hpp"

namespace crossings::cli {
namespace {

namespace fs = std::filesystem;

void write_file(const RunConfig& cfg, const std::string& name, const std::string& text) {
  fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  fs::path path = dir / name;
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Config, "cannot write " + path.string());
  out << text;
}

void emit(const RunConfig& cfg, const std::string& command, const json& report,
          const std::string& table, const std::string& csv, std::ostream& out) {
  write_file(cfg, command + ".json", with_header(report, cfg.seed, command).dump(2) + "\n");
  if (!csv.empty()) write_file(cfg, command + ".csv", csv);
  if (cfg.format == "json")
    out << report.dump(2) << "\n";
  else if (cfg.format == "csv" && !csv.empty())
    out << csv;
  else
    out << table;
}

std::string fmt_g(double v, int prec = 6) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

json z_json(double v) { return std::isfinite(v) ? json(v) : json("inf"); }

QuadControl quad_control(const RunConfig& cfg) {
  QuadControl qc;
  qc.tau_min = cfg.tau_min;
  qc.series_tol = cfg.series_tol;
  qc.quad_tol = cfg.quad_tol;
  qc.sigma2_scale = cfg.sigma2_scale;
  return qc;
}

MomentResult formula_moments(const RunConfig& cfg, const CovarianceModel& model,
                             bool nonintegrable) {
  auto curve = cfg.build_curve();
  if (curve)
    return curve_second_moment(model, *curve, cfg.t, cfg.effective_delta(model),
                               quad_control(cfg), nonintegrable);
  return second_factorial_moment(model, cfg.level, cfg.t, cfg.effective_delta(model),
                                 quad_control(cfg), nonintegrable);
}

std::string moments_table(const MomentResult& mr, double level, bool is_curve) {
  std::ostringstream os;
  os << std::left << std::setw(8) << "t" << std::setw(14) << "target" << std::setw(12) << "E[N]"
     << std::setw(14) << "M2" << std::setw(14) << "Var" << std::setw(12) << "quad_error"
     << std::setw(8) << "K" << "\n";
  os << std::left << std::setw(8) << fmt_g(mr.t) << std::setw(14)
     << (is_curve ? mr.target.substr(0, 13) : fmt_g(level)) << std::setw(12)
     << fmt_g(mr.rice_mean) << std::setw(14) << fmt_g(mr.m2) << std::setw(14)
     << fmt_g(mr.variance) << std::setw(12) << fmt_g(mr.quad_error, 3) << std::setw(8)
     << mr.series_K << "\n";
  return os.str();
}

}  // namespace

int cmd_diagnose(const RunConfig& cfg, std::ostream& out) {
  CovarianceModel model = cfg.build_model();
  ClassifierControl cc;
  cc.margin = cfg.margin;
  GemanReport geman = classify_geman(model, cfg.effective_delta(model), cc);

  json report;
  report["model"] = model.describe();
  report["geman"] = to_json(geman);

  std::ostringstream table;
  table << "model: " << model.describe() << "\n";
  table << "geman verdict:      " << to_string(geman.verdict) << "\n";
  table << "  local exponent    " << fmt_g(geman.local_exponent) << "\n";
  table << "  log exponent      " << fmt_g(geman.log_exponent) << "\n";
  table << "  integral estimate " << fmt_g(geman.integral_estimate) << "\n";
  table << "  grid points       " << geman.grid.size() << "\n";

  if (!model.synthetic()) {
    try {
      LemmaReport lemma = lemma_report(model, cfg.effective_delta(model));
      report["lemma"] = to_json(lemma);
      table << "lemma1 limit        "
            << (lemma.lemma1_diverging ? std::string("diverging") : fmt_g(lemma.lemma1_limit))
            << "\n";
      table << "lemma2 rho max      " << fmt_g(lemma.lemma2_rho_max) << "\n";
      table << "lemma2 ratio bound  " << fmt_g(lemma.lemma2_ratio_bound) << "\n";
      table << "lemma3 lower margin " << fmt_g(lemma.lemma3_lower_margin) << "\n";
      table << "lemma3 C estimate   " << fmt_g(lemma.lemma3_C_estimate) << "\n";
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Degenerate) throw;
      report["lemma"] = json{{"degenerate", true}, {"message", e.what()}};
      table << "lemma report:       degenerate (" << e.what() << ")\n";
    }
  }

  bool violated = geman.verdict == Verdict::NonIntegrable;
  bool inconclusive = geman.verdict == Verdict::Inconclusive;
  auto curve = cfg.build_curve();
  if (curve) {
    ClassifierControl curve_cc;
    curve_cc.margin = cfg.margin;
    CurveConditionReport cond =
        curve_condition(*curve, std::min(cfg.delta, cfg.t > 0 ? cfg.t : cfg.delta), curve_cc);
    report["curve_condition"] = to_json(cond);
    table << "curve condition:    " << to_json(cond)["verdict"].get<std::string>() << "\n";
    violated = violated || cond.verdict == Verdict::NonIntegrable;
    inconclusive = inconclusive || cond.verdict == Verdict::Inconclusive;
  }

  emit(cfg, "diagnose", report, table.str(), "", out);
  if (violated) return 2;
  if (inconclusive) return 3;
  return 0;
}

int cmd_moments(const RunConfig& cfg, std::ostream& out) {
  CovarianceModel model = cfg.build_model();
  ClassifierControl cc;
  cc.margin = cfg.margin;
  GemanReport geman = classify_geman(model, cfg.effective_delta(model), cc);
  bool noninteg = geman.verdict == Verdict::NonIntegrable;

  if (cfg.is_curve) {
    auto curve = cfg.build_curve();
    ClassifierControl curve_cc;
    curve_cc.margin = cfg.margin;
    CurveConditionReport cond =
        curve_condition(*curve, std::min(cfg.delta, cfg.t > 0 ? cfg.t : cfg.delta), curve_cc);
    if (cond.verdict == Verdict::NonIntegrable) {
      out << "curve condition violated: the theorem's hypothesis fails; no finite-variance "
             "guarantee\n";
      return 2;
    }
  }

  MomentResult mr = formula_moments(cfg, model, noninteg);
  json report = to_json(mr);
  report["geman_verdict"] = to_string(geman.verdict);

  std::ostringstream csv;
  csv << "t,target,rice_mean,m2,variance,quad_error,series_K,finite\n";
  csv << mr.t << "," << (cfg.is_curve ? "\"" + mr.target + "\"" : fmt_g(cfg.level)) << ","
      << fmt_g(mr.rice_mean, 12) << "," << fmt_g(mr.m2, 12) << "," << fmt_g(mr.variance, 12)
      << "," << fmt_g(mr.quad_error, 6) << "," << mr.series_K << "," << (mr.finite ? 1 : 0)
      << "\n";

  emit(cfg, "moments", report, moments_table(mr, cfg.level, cfg.is_curve), csv.str(), out);
  return mr.finite ? 0 : 2;
}

int cmd_compare(const RunConfig& cfg, std::ostream& out) {
  CovarianceModel model = cfg.build_model();
  ClassifierControl cc;
  cc.margin = cfg.margin;
  GemanReport geman = classify_geman(model, cfg.effective_delta(model), cc);
  bool noninteg = geman.verdict == Verdict::NonIntegrable;
  MomentResult mr = formula_moments(cfg, model, noninteg);

  Target target = cfg.is_curve ? Target{*cfg.build_curve()} : Target{cfg.level};
  McControl mc_ctl;
  mc_ctl.threads = cfg.threads;
  McSummary mc = mc_moments(model, target, cfg.t, cfg.dt, cfg.n_paths, cfg.seed, mc_ctl);

  auto zscore = [](double formula, double estimate, double se_mc, double se_formula) {
    double combined = std::sqrt(se_mc * se_mc + se_formula * se_formula);
    if (!std::isfinite(combined) || combined == 0.0) return 0.0;
    return (formula - estimate) / combined;
  };
  double z_mean = zscore(mr.rice_mean, mc.mean_count, mc.se_mean, 0.0);
  double z_m2 = mr.finite
                    ? zscore(mr.m2, mc.second_factorial, mc.se_second_factorial, mr.quad_error)
                    : std::numeric_limits<double>::infinity();
  double z_var =
      mr.finite ? zscore(mr.variance, mc.variance, mc.se_variance, mr.quad_error)
                : std::numeric_limits<double>::infinity();

  json report;
  report["formula"] = to_json(mr);
  report["monte_carlo"] = to_json(mc);
  report["z_scores"] = json{{"mean", z_json(z_mean)},
                            {"second_factorial", z_json(z_m2)},
                            {"variance", z_json(z_var)}};

  std::ostringstream table, csv;
  table << std::left << std::setw(20) << "quantity" << std::setw(15) << "formula"
        << std::setw(15) << "monte_carlo" << std::setw(12) << "mc_se" << std::setw(9) << "z"
        << "\n";
  csv << "quantity,formula,monte_carlo,mc_se,z\n";
  auto row = [&](const char* name, double formula, double estimate, double se, double z) {
    table << std::left << std::setw(20) << name << std::setw(15) << fmt_g(formula, 8)
          << std::setw(15) << fmt_g(estimate, 8) << std::setw(12) << fmt_g(se, 4) << std::setw(9)
          << fmt_g(z, 3) << "\n";
    csv << name << "," << fmt_g(formula, 12) << "," << fmt_g(estimate, 12) << ","
        << fmt_g(se, 6) << "," << fmt_g(z, 6) << "\n";
  };
  row("mean_count", mr.rice_mean, mc.mean_count, mc.se_mean, z_mean);
  row("second_factorial", mr.m2, mc.second_factorial, mc.se_second_factorial, z_m2);
  row("variance", mr.variance, mc.variance, mc.se_variance, z_var);

  emit(cfg, "compare", report, table.str(), csv.str(), out);
  bool ok = mr.finite && std::abs(z_mean) < 3.0 && std::abs(z_m2) < 3.0 && std::abs(z_var) < 3.0;
  return ok ? 0 : 2;
}

int cmd_sample(const RunConfig& cfg, std::ostream& out) {
  CovarianceModel model = cfg.build_model();
  PathGrid path = sample_path(model, cfg.t, cfg.dt, cfg.seed);
  std::ostringstream csv;
  csv << "t,X\n" << std::setprecision(17);
  for (std::int64_t i = 0; i < path.n; ++i)
    csv << static_cast<double>(i) * path.dt << "," << path.values(static_cast<Eigen::Index>(i))
        << "\n";
  write_file(cfg, "path.csv", csv.str());
  double mean = path.values.mean();
  double var = (path.values - mean).square().sum() / static_cast<double>(path.n - 1);
  json report{{"n", path.n}, {"dt", path.dt},   {"seed", path.seed},
              {"mean", mean}, {"variance", var}, {"file", "path.csv"}};
  std::ostringstream table;
  table << "wrote path.csv: n = " << path.n << ", dt = " << path.dt
        << ", sample mean = " << fmt_g(mean, 4) << ", sample var = " << fmt_g(var, 4) << "\n";
  emit(cfg, "sample", report, table.str(), "", out);
  return 0;
}

int cmd_probe(const RunConfig& cfg, std::ostream& out) {
  CovarianceModel model = cfg.build_model();
  McControl mc_ctl;
  mc_ctl.threads = cfg.threads;
  std::vector<ProbeRow> rows =
      divergence_probe(model, cfg.level, cfg.t, cfg.dt_sequence, cfg.n_paths, cfg.seed, mc_ctl);
  std::ostringstream table, csv;
  table << std::left << std::setw(12) << "dt" << std::setw(14) << "mean" << std::setw(14)
        << "Var(N)" << std::setw(12) << "se(Var)" << "\n";
  csv << "dt,mean_count,variance,se_variance,n_paths\n";
  for (const auto& row : rows) {
    table << std::left << std::setw(12) << fmt_g(row.dt) << std::setw(14)
          << fmt_g(row.mean_count, 6) << std::setw(14) << fmt_g(row.variance, 6)
          << std::setw(12) << fmt_g(row.se_variance, 4) << "\n";
    csv << row.dt << "," << fmt_g(row.mean_count, 10) << "," << fmt_g(row.variance, 10) << ","
        << fmt_g(row.se_variance, 6) << "," << row.n_paths << "\n";
  }
  emit(cfg, "probe", to_json(rows), table.str(), csv.str(), out);
  return 0;
}

int run_command(const std::string& name, const RunConfig& cfg, std::ostream& out,
                std::ostream& err) {
  try {
    if (name == "diagnose") return cmd_diagnose(cfg, out);
    if (name == "moments") return cmd_moments(cfg, out);
    if (name == "compare") return cmd_compare(cfg, out);
    if (name == "sample") return cmd_sample(cfg, out);
    if (name == "probe") return cmd_probe(cfg, out);
    err << "unknown command: " << name << "\n";
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::Degenerate: return 4;
      default: return 1;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace crossings::cli

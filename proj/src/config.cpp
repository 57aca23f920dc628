#include "crossings/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "crossings/error.hpp"
#include "crossings/spectral.hpp"

namespace crossings {
namespace {

std::string trim(std::string s) {
  auto notspace = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
  s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
  return s;
}

double parse_double(const std::string& v, const std::string& key) {
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size())
    throw Error(ErrorKind::Config, "bad numeric value for " + key + ": '" + v + "'");
  return x;
}

std::int64_t parse_int(const std::string& v, const std::string& key) {
  double x = parse_double(v, key);
  return static_cast<std::int64_t>(x);
}

}  // namespace

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str());
}

RunConfig RunConfig::parse_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw Error(ErrorKind::Config, "line " + std::to_string(lineno) + ": unterminated section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Config, "line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    std::string qual = section.empty() ? key : section + "." + key;

    if (qual == "covariance.covariance" || qual == "covariance.text") cfg.covariance = value;
    else if (qual == "covariance.spectral") cfg.spectral = value;
    else if (qual == "covariance.spectral_table") cfg.spectral_table = value;
    else if (qual == "covariance.synthetic_theta2") cfg.synthetic_theta2 = value;
    else if (qual == "covariance.lambda_max") cfg.lambda_max = parse_double(value, qual);
    else if (qual == "covariance.delta_max") cfg.delta_max = parse_double(value, qual);
    else if (qual == "target.kind") {
      if (value == "level") cfg.is_curve = false;
      else if (value == "curve") cfg.is_curve = true;
      else throw Error(ErrorKind::Config, "target.kind must be level or curve");
    } else if (qual == "target.level") cfg.level = parse_double(value, qual);
    else if (qual == "target.psi") { cfg.psi = value; cfg.is_curve = true; }
    else if (qual == "target.psi_dot") cfg.psi_dot = value;
    else if (qual == "target.gamma") cfg.gamma = value;
    else if (qual == "run.t") cfg.t = parse_double(value, qual);
    else if (qual == "run.delta") cfg.delta = parse_double(value, qual);
    else if (qual == "run.dt") cfg.dt = parse_double(value, qual);
    else if (qual == "run.n_paths") cfg.n_paths = parse_int(value, qual);
    else if (qual == "run.seed") cfg.seed = static_cast<std::uint64_t>(parse_int(value, qual));
    else if (qual == "run.dt_sequence") {
      cfg.dt_sequence.clear();
      std::istringstream seq(value);
      std::string item;
      while (std::getline(seq, item, ','))
        if (!trim(item).empty()) cfg.dt_sequence.push_back(parse_double(trim(item), qual));
    } else if (qual == "tolerances.quad_tol") cfg.quad_tol = parse_double(value, qual);
    else if (qual == "tolerances.series_tol") cfg.series_tol = parse_double(value, qual);
    else if (qual == "tolerances.margin") cfg.margin = parse_double(value, qual);
    else if (qual == "tolerances.validation_eps") cfg.validation_eps = parse_double(value, qual);
    else if (qual == "tolerances.tau_min") cfg.tau_min = parse_double(value, qual);
    else if (qual == "output.dir") cfg.out_dir = value;
    else if (qual == "output.format") cfg.format = value;
    else throw Error(ErrorKind::Config,
                     "line " + std::to_string(lineno) + ": unknown key '" + qual + "'");
  }
  cfg.validate();
  return cfg;
}

void RunConfig::validate() const {
  int sources = !covariance.empty() + !spectral.empty() + !spectral_table.empty() +
                !synthetic_theta2.empty();
  if (sources != 1)
    throw Error(ErrorKind::Config,
                "exactly one covariance source required (covariance | spectral | "
                "spectral_table | synthetic_theta2)");
  if (!spectral.empty() && !(lambda_max > 0.0))
    throw Error(ErrorKind::Config, "spectral expressions need lambda_max > 0");
  const std::pair<double, const char*> tolerances[] = {{quad_tol, "quad_tol"},
                                                       {series_tol, "series_tol"},
                                                       {margin, "margin"},
                                                       {validation_eps, "validation_eps"},
                                                       {tau_min, "tau_min"}};
  for (auto [v, name] : tolerances)
    if (!(v > 0.0)) throw Error(ErrorKind::Config, std::string(name) + " must be positive");
  if (n_paths < 1) throw Error(ErrorKind::Config, "n_paths must be at least 1");
  if (!(dt > 0.0)) throw Error(ErrorKind::Config, "dt must be positive");
  if (!(t >= 0.0)) throw Error(ErrorKind::Config, "t must be nonnegative");
  if (format != "table" && format != "json" && format != "csv")
    throw Error(ErrorKind::Config, "format must be table, json or csv");
  if (is_curve && (psi.empty() || psi_dot.empty()))
    throw Error(ErrorKind::Config, "curve targets need both psi and psi_dot");
}

CovarianceModel RunConfig::build_model() const {
  if (!covariance.empty())
    return CovarianceModel::parse(covariance, delta_max, validation_eps);
  if (!synthetic_theta2.empty())
    return CovarianceModel::synthetic_theta2(synthetic_theta2, std::min(delta_max, 1.0));
  if (!spectral.empty())
    return CovarianceModel::from_spectral(
        SpectralDensity::from_expression(spectral, lambda_max), delta_max, validation_eps);
  std::ifstream in(spectral_table);
  if (!in) throw Error(ErrorKind::Config, "cannot open spectral table " + spectral_table);
  std::vector<double> lam, val;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a, b;
    if (row >> a >> b) {
      lam.push_back(a);
      val.push_back(b);
    }
  }
  return CovarianceModel::from_spectral(SpectralDensity::from_table(std::move(lam), std::move(val)),
                                        delta_max, validation_eps);
}

std::optional<CurveSpec> RunConfig::build_curve() const {
  if (!is_curve) return std::nullopt;
  auto curve = CurveSpec::from_expressions(
      psi, psi_dot, gamma.empty() ? std::nullopt : std::optional<std::string>(gamma));
  curve.validate_derivative(t);
  return curve;
}

double RunConfig::effective_delta(const CovarianceModel& model) const {
  return std::min(delta, model.delta_max());
}

}  // namespace crossings

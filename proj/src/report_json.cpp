#include "crossings/report_json.hpp"

#include <chrono>
#include <cmath>

namespace crossings {
namespace {

json finite_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return nullptr;
  return v;
}

}  // namespace

json to_json(const GemanReport& report) {
  return json{{"grid", report.grid},
              {"L_values", report.L_values},
              {"local_exponent", report.local_exponent},
              {"log_exponent", report.log_exponent},
              {"verdict", to_string(report.verdict)},
              {"integral_estimate", report.integral_estimate},
              {"integral_drift", report.integral_drift},
              {"fit_residual", report.fit_residual},
              {"delta", report.delta}};
}

json to_json(const LemmaReport& report) {
  return json{{"lemma1_limit",
               report.lemma1_diverging ? json("diverging") : json(report.lemma1_limit)},
              {"lemma2_ratio_bound", report.lemma2_ratio_bound},
              {"lemma2_rho_max", report.lemma2_rho_max},
              {"lemma3_lower_margin", report.lemma3_lower_margin},
              {"lemma3_C_estimate", report.lemma3_C_estimate},
              {"delta", report.delta}};
}

json to_json(const CurveConditionReport& report) {
  const char* verdict = report.verdict == Verdict::Integrable      ? "satisfied"
                        : report.verdict == Verdict::NonIntegrable ? "violated"
                                                                   : "inconclusive";
  return json{{"verdict", verdict},
              {"integral_estimate", report.integral_estimate},
              {"local_exponent", report.local_exponent},
              {"log_exponent", report.log_exponent},
              {"delta", report.delta},
              {"gamma_estimated", report.gamma_estimated}};
}

json to_json(const MomentResult& result) {
  return json{{"t", result.t},
              {"target", result.target},
              {"rice_mean", result.rice_mean},
              {"m2", finite_or_inf(result.m2)},
              {"m2_delta", finite_or_inf(result.m2_delta)},
              {"variance", finite_or_inf(result.variance)},
              {"quad_error", result.quad_error},
              {"series_K", result.series_K},
              {"finite", result.finite}};
}

json to_json(const McSummary& summary) {
  return json{{"n_paths", summary.n_paths},
              {"target", summary.target},
              {"mean_count", summary.mean_count},
              {"second_factorial", summary.second_factorial},
              {"variance", summary.variance},
              {"se_mean", summary.se_mean},
              {"se_second_factorial", summary.se_second_factorial},
              {"se_variance", summary.se_variance},
              {"dt", summary.dt},
              {"t", summary.t},
              {"seed", summary.seed},
              {"clipped_mass", summary.clipped_mass}};
}

json to_json(const std::vector<ProbeRow>& rows) {
  json arr = json::array();
  for (const auto& row : rows)
    arr.push_back(json{{"dt", row.dt},
                       {"mean_count", row.mean_count},
                       {"variance", row.variance},
                       {"se_variance", row.se_variance},
                       {"n_paths", row.n_paths}});
  return arr;
}

json with_header(json report, std::uint64_t seed, const std::string& command) {
  auto now = std::chrono::system_clock::now().time_since_epoch();
  return json{{"header",
               {{"command", command},
                {"seed", seed},
                {"timestamp_ms",
                 std::chrono::duration_cast<std::chrono::milliseconds>(now).count()}}},
              {"report", std::move(report)}};
}

bool matches_schema(const json& schema, const json& value, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (schema.contains("oneOf")) {
    for (const auto& alt : schema["oneOf"])
      if (matches_schema(alt, value, nullptr)) return true;
    return fail("no oneOf alternative matched at " + value.dump().substr(0, 60));
  }
  if (schema.contains("enum")) {
    for (const auto& e : schema["enum"])
      if (e == value) return true;
    return fail("value not in enum: " + value.dump());
  }
  if (!schema.contains("type")) return true;
  const std::string type = schema["type"];
  if (type == "object") {
    if (!value.is_object()) return fail("expected object, got " + value.dump().substr(0, 60));
    if (schema.contains("required"))
      for (const auto& req : schema["required"])
        if (!value.contains(req.get<std::string>()))
          return fail("missing required property " + req.get<std::string>());
    if (schema.contains("properties"))
      for (auto& [key, sub] : schema["properties"].items())
        if (value.contains(key) && !matches_schema(sub, value[key], why)) return false;
    return true;
  }
  if (type == "array") {
    if (!value.is_array()) return fail("expected array");
    if (schema.contains("items"))
      for (const auto& item : value)
        if (!matches_schema(schema["items"], item, why)) return false;
    return true;
  }
  if (type == "number") {
    if (!value.is_number()) return fail("expected number, got " + value.dump().substr(0, 40));
    return true;
  }
  if (type == "integer") {
    if (!value.is_number_integer() && !value.is_number_unsigned())
      return fail("expected integer");
    return true;
  }
  if (type == "string") {
    if (!value.is_string()) return fail("expected string, got " + value.dump().substr(0, 40));
    return true;
  }
  if (type == "boolean") {
    if (!value.is_boolean()) return fail("expected boolean");
    return true;
  }
  if (type == "null") {
    if (!value.is_null()) return fail("expected null");
    return true;
  }
  return true;
}

}  // namespace crossings

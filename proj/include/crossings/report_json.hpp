#pragma once

#include <json.hpp>
#include <string>

#include "crossings/diagnostics.hpp"
#include "crossings/moments.hpp"
#include "crossings/simulate.hpp"

namespace crossings {

using json = nlohmann::json;

json to_json(const GemanReport& report);
json to_json(const LemmaReport& report);
json to_json(const CurveConditionReport& report);
json to_json(const MomentResult& result);
json to_json(const McSummary& summary);
json to_json(const std::vector<ProbeRow>& rows);

/// Wraps a report with the run header; the timestamp lives only here so the
/// report object itself is byte-stable across reruns.
json with_header(json report, std::uint64_t seed, const std::string& command);

/// Minimal structural validator for the shipped schemas: checks `type`,
/// `required`, `properties`, `items` and scalar `enum`/`oneOf` alternatives.
bool matches_schema(const json& schema, const json& value, std::string* why = nullptr);

}  // namespace crossings

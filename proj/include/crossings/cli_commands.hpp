#pragma once

#include <iosfwd>
#include <string>

#include "crossings/config.hpp"

namespace crossings::cli {

/// Exit code contract shared by every subcommand:
///   0  success (integrable / satisfied / all z-scores within 3)
///   1  configuration, parse or validation failure
///   2  non-integrable Geman verdict, violated curve condition, or a
///      formula-vs-Monte-Carlo disagreement
///   3  inconclusive classification
///   4  degenerate model (sigma^2 identically zero)
int cmd_diagnose(const RunConfig& cfg, std::ostream& out);
int cmd_moments(const RunConfig& cfg, std::ostream& out);
int cmd_compare(const RunConfig& cfg, std::ostream& out);
int cmd_sample(const RunConfig& cfg, std::ostream& out);
int cmd_probe(const RunConfig& cfg, std::ostream& out);

/// Dispatch by name with Error-to-exit-code mapping applied.
int run_command(const std::string& name, const RunConfig& cfg, std::ostream& out,
                std::ostream& err);

}  // namespace crossings::cli

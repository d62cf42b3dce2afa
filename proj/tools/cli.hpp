#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bcp/eval.hpp"

namespace bcp::cli {

enum class Subcommand { regress, classify, beta_scan, compare, selftest };

struct CliConfig {
  Subcommand subcommand = Subcommand::regress;
  std::optional<std::filesystem::path> config_file;
  ExperimentConfig experiment;
  std::filesystem::path out;
  ReportFormat format = ReportFormat::json;
};

/// Either a config or a usage result (exit code plus the text to print).
struct ParseResult {
  std::optional<CliConfig> config;
  int exit_code = 0;
  std::string message;
};

ParseResult parse_args(const std::vector<std::string>& args);
ParseResult parse_args(int argc, const char* const* argv);

/// Runs the subcommand; returns 0 on success, 1 on runtime failure and 2 when
/// no dataset was given.
int run(const CliConfig& config, std::ostream& out, std::ostream& err);

}  // namespace bcp::cli

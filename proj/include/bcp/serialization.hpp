#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "bcp/conformal.hpp"
#include "bcp/datasets.hpp"
#include "bcp/eval.hpp"
#include "bcp/optimizer.hpp"
#include "bcp/posterior.hpp"
#include "bcp/scores.hpp"

namespace bcp {

using json = nlohmann::json;

json to_json(const SplitSpec& split);
SplitSpec split_from_json(const json& j);
json to_json(const Standardizer& standardizer);
Standardizer standardizer_from_json(const json& j);

json to_json(const McmcConfig& mcmc);
json to_json(const Threshold& threshold);
json to_json(const Feasibility& feasibility);
json to_json(const BcpSolution& solution);

json to_json(const ExperimentConfig& config);
/// Overlays the keys present in `j` onto `base`; unknown keys throw.
ExperimentConfig config_from_json(const json& j, ExperimentConfig base = {});
json read_json_file(const std::filesystem::path& path);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Draws as CSV (header = parameter names) next to `<stem>.json`.
void save_draws(const PosteriorDraws& draws, const std::filesystem::path& csv_path);
PosteriorDraws load_draws(const std::filesystem::path& csv_path);

/// Test scores as CSV, one row per test input, with a JSON header file.
void save_scores(const ScoreMatrix& scores, const std::filesystem::path& csv_path);
ScoreMatrix load_scores(const std::filesystem::path& csv_path);

}  // namespace bcp

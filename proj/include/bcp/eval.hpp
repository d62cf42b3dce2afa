#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bcp/datasets.hpp"
#include "bcp/posterior.hpp"
#include "bcp/scores.hpp"

namespace bcp {

enum class Method { split_cp, bci, cb, bcp, msp };

std::string_view to_string(Method method);
Method method_from_string(std::string_view name);

enum class Profile { desk, paper };

std::string_view to_string(Profile profile);
Profile profile_from_string(std::string_view name);

struct ExperimentConfig {
  std::string data_path;
  TaskKind task = TaskKind::regression;
  std::vector<Method> methods{Method::split_cp, Method::bci, Method::cb, Method::bcp};
  Profile profile = Profile::desk;
  std::size_t n_splits = 10;
  SplitRatios ratios;
  double alpha = 0.2;
  std::vector<double> betas{0.6};
  std::vector<double> prior_scales{1.0};  // regression c values
  double logistic_weight_sd = 1.0;
  McmcConfig mcmc{.total_iters = 2000, .burn_in = 500};
  std::size_t grid_size = 100;
  std::uint64_t seed = 0;
  double lasso_penalty = 0.004;
  std::size_t dirichlet_draws = 2000;
  std::size_t bci_samples_per_draw = 1;
  std::size_t bq_nodes = 64;
  bool hpd = false;
  bool asymmetric_scores = false;
  bool use_mc = false;
  std::size_t threads = 1;

  void validate() const;
  /// Applies the split count and MCMC budget of a profile.
  void apply_profile(Profile p);
};

/// Per-split, per-setting result of one method.
struct SplitRecord {
  std::size_t split_index = 0;
  std::uint64_t seed = 0;
  Method method = Method::bcp;
  double prior_scale = 0.0;  // c for regression, weight sd for classification
  std::optional<double> beta;
  double coverage = 0.0;
  double mean_size = 0.0;
  double lambda = 0.0;
  bool fallback = false;
  double pred_time = 0.0;   // seconds per test point
  double calib_time = 0.0;  // seconds per split
  std::size_t n_test = 0;
};

struct MethodSummary {
  Method method = Method::bcp;
  double prior_scale = 0.0;
  std::optional<double> beta;
  double coverage_mean = 0.0;
  double coverage_sd = 0.0;
  double size_mean = 0.0;
  double size_sd = 0.0;
  double pred_time_mean = 0.0;
  double calib_time_mean = 0.0;
  std::size_t fallback_count = 0;
  std::size_t n_splits = 0;
};

struct MetricsSummary {
  ExperimentConfig config;
  std::vector<SplitRecord> per_split;
  std::vector<MethodSummary> summary;

  /// Summary row for (method, prior_scale, beta); beta ignored for non-BCP rows.
  const MethodSummary& find(Method method, double prior_scale, std::optional<double> beta = std::nullopt) const;
};

class SplitError : public std::runtime_error {
 public:
  SplitError(std::size_t split_index, std::uint64_t seed, const std::string& what);
  std::size_t split_index() const { return split_index_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::size_t split_index_;
  std::uint64_t seed_;
};

std::uint64_t split_seed(const ExperimentConfig& config, std::size_t split_index);

/// One split of the regression protocol; rerunning it reproduces its records.
std::vector<SplitRecord> run_regression_split(const ExperimentConfig& config, const Dataset& data,
                                              std::size_t split_index);
std::vector<SplitRecord> run_classification_split(const ExperimentConfig& config, const Dataset& data,
                                                  std::size_t split_index);

MetricsSummary run_regression_experiment(const ExperimentConfig& config, const Dataset& data);
MetricsSummary run_regression_experiment(const ExperimentConfig& config);
MetricsSummary run_classification_experiment(const ExperimentConfig& config, const Dataset& data);
MetricsSummary run_classification_experiment(const ExperimentConfig& config);

/// Mean/sd per (method, prior_scale, beta) folded in split-index order.
std::vector<MethodSummary> summarize(const std::vector<SplitRecord>& records);

struct BetaScanRow {
  double beta = 0.0;
  double coverage_mean = 0.0;
  double coverage_sd = 0.0;
  double width_mean = 0.0;
  double width_sd = 0.0;
  double miscoverage = 0.0;
  double gap = 0.0;  // alpha - miscoverage
  std::size_t n_splits = 0;
};

std::vector<BetaScanRow> beta_table(const MetricsSummary& summary, double prior_scale);
std::vector<BetaScanRow> beta_scan(const ExperimentConfig& config, const Dataset& data);

/// Monte Carlo estimate of the posterior-averaged miscoverage of C(x; lambda):
/// every draw t contributes `samples_per_draw` pairs with x drawn from
/// `eval_inputs` and y ~ f_t(. | x).
double posterior_avg_risk(const PosteriorDraws& draws, double lambda, const Matrix& eval_inputs,
                          std::size_t samples_per_draw, std::uint64_t seed,
                          ScoreKind kind = ScoreKind::aoi_neglog);

enum class ReportFormat { json, csv };

ReportFormat report_format_from_string(std::string_view name);

/// Deterministic report: sorted keys, coverage rounded to 4 significant
/// digits, sizes to 3.
std::string render_report(const MetricsSummary& summary, ReportFormat format);
void emit_report(const MetricsSummary& summary, ReportFormat format, const std::filesystem::path& path);

std::string render_beta_table(const std::vector<BetaScanRow>& rows, ReportFormat format, double alpha);

double round_significant(double value, int digits);

}  // namespace bcp

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "bcp/conformal.hpp"
#include "bcp/posterior.hpp"
#include "bcp/quadrature.hpp"
#include "bcp/scores.hpp"

namespace bcp {

struct CandidateRow {
  double lambda = 0.0;
  double bq_mean = 0.0;
  double bq_variance = 0.0;
  bool feasible = false;
  double feasibility_prob = 0.0;
  std::optional<double> exact_prob;
};

struct BcpSolution {
  double lambda_star = kInf;
  double bq_size_at_star = 0.0;
  double feasibility_prob = 0.0;
  std::size_t star_index = 0;
  std::vector<CandidateRow> candidate_table;
  bool fallback_used = false;
  /// Estimated size curve decreased somewhere by more than the tolerance.
  bool non_monotone_sizes = false;
};

/// argmin of bq_mean over feasible rows, ties toward smaller lambda; falls back
/// to the last row (the +inf sentinel) when nothing is feasible.
BcpSolution select_from_table(std::vector<CandidateRow> table);

/// Builds the candidate table with one shared Dirichlet bank (seeded from
/// `risk.seed`) so feasibility is monotone in lambda, then selects.
BcpSolution select_lambda(std::span<const double> lambdas, std::span<const BqEstimate> bq,
                          const std::vector<std::vector<double>>& losses_per_lambda, const RiskConfig& risk);

struct BcpOptions {
  TaskKind task = TaskKind::regression;
  ScoreKind cal_score_kind = ScoreKind::aoi_neglog;
  ScoreKind test_score_kind = ScoreKind::aoi_neglog;
  CandidateStrategy strategy = CandidateStrategy::score_quantiles;
  std::size_t n_candidates = 0;  // 0: one per calibration score
  std::size_t max_nodes = 64;
  bool use_mc = false;           // empirical mean instead of BQ
  std::optional<KernelConfig> kernel;  // default: median heuristic + node-value variance
  double monotone_tolerance = 1e-6;
};

/// Calibration from precomputed scores. `eval_scores` holds s(x, y) for every
/// evaluation input (rows) and candidate label (columns); the expected set size
/// is integrated over those inputs.
BcpSolution bcp_calibrate_scores(std::span<const double> cal_scores, const Matrix& eval_inputs,
                                 const Matrix& eval_scores, std::span<const double> label_grid,
                                 const RiskConfig& risk, const BcpOptions& options);

/// End-to-end: scores from the posterior, the size integral over the
/// calibration inputs (or `eval_pool` when given), L+ feasibility, selection.
BcpSolution bcp_calibrate(const PosteriorDraws& draws, const Matrix& cal_features, const Vector& cal_labels,
                          std::span<const double> label_grid, const RiskConfig& risk, const BcpOptions& options,
                          const Matrix* eval_pool = nullptr);

}  // namespace bcp

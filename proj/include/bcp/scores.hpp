#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "bcp/common.hpp"
#include "bcp/posterior.hpp"

namespace bcp {

enum class ScoreKind {
  aoi_neglog,   // -log( sum f^2 / sum f )
  mean_neglog,  // -log( mean f )
  residual,     // |y - posterior mean prediction|, regression only
};

std::string_view to_string(ScoreKind kind);
ScoreKind score_kind_from_string(std::string_view name);

struct AoiWeights {
  Vector weights;
};

/// Normalized importance weights f_t / sum f.
AoiWeights aoi_weights(std::span<const double> likes);
/// sum_t w_t f_t = sum f^2 / sum f.
double aoi_predictive(std::span<const double> likes);
double mean_predictive(std::span<const double> likes);
double neglog_score(double density);

// Log-space forms; inputs are per-draw log-likelihoods.
double log_sum_exp(std::span<const double> values);
AoiWeights aoi_weights_from_log(std::span<const double> loglikes);
double log_aoi_predictive(std::span<const double> loglikes);
double log_mean_predictive(std::span<const double> loglikes);

/// The one scoring routine every calibration and test score goes through.
/// For residual scores pass the posterior-mean predictor as `eta_mean`.
double score_from_loglik(std::span<const double> loglikes, ScoreKind kind, double y = 0.0,
                         double eta_mean = 0.0);

struct ScoreMatrix {
  Vector cal_scores;
  Matrix test_scores;  // n_test x K
  ScoreKind score_kind = ScoreKind::aoi_neglog;
  std::vector<double> candidate_grid;
};

/// s(X_i, Y_i) for each calibration row.
Vector compute_cal_scores(const PosteriorDraws& draws, const Matrix& features, const Vector& labels,
                          ScoreKind kind);

/// s(x, y) over every (test input, candidate label) pair.
ScoreMatrix compute_test_scores(const PosteriorDraws& draws, const Matrix& features,
                                std::span<const double> candidate_grid, ScoreKind kind);

/// Candidate labels for binary classification.
std::vector<double> binary_label_grid();

}  // namespace bcp

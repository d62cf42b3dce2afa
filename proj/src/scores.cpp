#include "bcp/scores.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bcp {

std::string_view to_string(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::aoi_neglog: return "aoi_neglog";
    case ScoreKind::mean_neglog: return "mean_neglog";
    case ScoreKind::residual: return "residual";
  }
  return "unknown";
}

ScoreKind score_kind_from_string(std::string_view name) {
  if (name == "aoi_neglog") return ScoreKind::aoi_neglog;
  if (name == "mean_neglog") return ScoreKind::mean_neglog;
  if (name == "residual") return ScoreKind::residual;
  throw std::invalid_argument("unknown score kind: " + std::string(name));
}

namespace {
double checked_sum(std::span<const double> likes) {
  if (likes.empty()) throw std::invalid_argument("empty likelihood vector");
  double total = 0.0;
  for (double f : likes) {
    if (!(f >= 0.0) || !std::isfinite(f)) throw std::invalid_argument("likelihoods must be finite and non-negative");
    total += f;
  }
  if (!(total > 0.0)) throw std::invalid_argument("all likelihoods are zero; cannot normalize");
  return total;
}
}  // namespace

AoiWeights aoi_weights(std::span<const double> likes) {
  const double total = checked_sum(likes);
  AoiWeights out;
  out.weights.resize(static_cast<Eigen::Index>(likes.size()));
  for (std::size_t t = 0; t < likes.size(); ++t) out.weights[static_cast<Eigen::Index>(t)] = likes[t] / total;
  return out;
}

double aoi_predictive(std::span<const double> likes) {
  const double total = checked_sum(likes);
  double sq = 0.0;
  for (double f : likes) sq += f * (f / total);
  return sq;
}

double mean_predictive(std::span<const double> likes) {
  if (likes.empty()) throw std::invalid_argument("empty likelihood vector");
  return std::accumulate(likes.begin(), likes.end(), 0.0) / static_cast<double>(likes.size());
}

double neglog_score(double density) { return -std::log(std::max(density, kDensityFloor)); }

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("log_sum_exp of empty vector");
  const double m = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(m)) return m;
  double total = 0.0;
  for (double v : values) total += std::exp(v - m);
  return m + std::log(total);
}

AoiWeights aoi_weights_from_log(std::span<const double> loglikes) {
  const double lse = log_sum_exp(loglikes);
  if (!std::isfinite(lse)) throw std::invalid_argument("all likelihoods are zero; cannot normalize");
  AoiWeights out;
  out.weights.resize(static_cast<Eigen::Index>(loglikes.size()));
  for (std::size_t t = 0; t < loglikes.size(); ++t)
    out.weights[static_cast<Eigen::Index>(t)] = std::exp(loglikes[t] - lse);
  return out;
}

double log_aoi_predictive(std::span<const double> loglikes) {
  if (loglikes.empty()) throw std::invalid_argument("empty likelihood vector");
  const double m = *std::max_element(loglikes.begin(), loglikes.end());
  if (!std::isfinite(m)) throw std::invalid_argument("all likelihoods are zero; cannot normalize");
  double s1 = 0.0;
  double s2 = 0.0;
  for (double v : loglikes) {
    const double e = std::exp(v - m);
    s1 += e;
    s2 += e * e;
  }
  return m + std::log(s2) - std::log(s1);
}

double log_mean_predictive(std::span<const double> loglikes) {
  return log_sum_exp(loglikes) - std::log(static_cast<double>(loglikes.size()));
}

double score_from_loglik(std::span<const double> loglikes, ScoreKind kind, double y, double eta_mean) {
  switch (kind) {
    case ScoreKind::aoi_neglog: return -std::max(log_aoi_predictive(loglikes), kLogDensityFloor);
    case ScoreKind::mean_neglog: return -std::max(log_mean_predictive(loglikes), kLogDensityFloor);
    case ScoreKind::residual: return std::abs(y - eta_mean);
  }
  throw std::invalid_argument("unknown score kind");
}

Vector compute_cal_scores(const PosteriorDraws& draws, const Matrix& features, const Vector& labels,
                          ScoreKind kind) {
  if (features.rows() != labels.size()) throw std::invalid_argument("feature rows and label count differ");
  if (kind == ScoreKind::residual && draws.model != ModelKind::sparse_linear)
    throw std::invalid_argument("residual scores need a regression model");
  const Matrix eta = linear_predictors(draws, features);
  const std::size_t t_count = draws.size();
  std::vector<double> loglik(t_count);
  Vector out(labels.size());
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    std::span<const double> col(eta.col(i).data(), t_count);
    loglik_from_predictors(draws, col, labels[i], loglik);
    out[i] = score_from_loglik(loglik, kind, labels[i], eta.col(i).mean());
  }
  return out;
}

ScoreMatrix compute_test_scores(const PosteriorDraws& draws, const Matrix& features,
                                std::span<const double> candidate_grid, ScoreKind kind) {
  if (candidate_grid.empty()) throw std::invalid_argument("empty candidate grid");
  if (kind == ScoreKind::residual && draws.model != ModelKind::sparse_linear)
    throw std::invalid_argument("residual scores need a regression model");
  const Matrix eta = linear_predictors(draws, features);
  const std::size_t t_count = draws.size();
  std::vector<double> loglik(t_count);
  ScoreMatrix out;
  out.score_kind = kind;
  out.candidate_grid.assign(candidate_grid.begin(), candidate_grid.end());
  out.test_scores.resize(features.rows(), static_cast<Eigen::Index>(candidate_grid.size()));
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    std::span<const double> col(eta.col(i).data(), t_count);
    const double eta_mean = eta.col(i).mean();
    for (std::size_t k = 0; k < candidate_grid.size(); ++k) {
      loglik_from_predictors(draws, col, candidate_grid[k], loglik);
      out.test_scores(i, static_cast<Eigen::Index>(k)) = score_from_loglik(loglik, kind, candidate_grid[k], eta_mean);
    }
  }
  return out;
}

std::vector<double> binary_label_grid() { return {0.0, 1.0}; }

}  // namespace bcp

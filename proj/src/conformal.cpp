#include "bcp/conformal.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/beta.hpp>

#include "bcp/scores.hpp"

namespace bcp {

void RiskConfig::validate() const {
  if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("alpha must lie in (0,1)");
  if (!(beta > 0 && beta < 1)) throw std::invalid_argument("beta must lie in (0,1)");
  if (!(loss_bound > 0)) throw std::invalid_argument("loss bound B must be positive");
  if (dirichlet_draws == 0) throw std::invalid_argument("dirichlet_draws must be at least 1");
}

std::string_view to_string(ThresholdMethod method) {
  return method == ThresholdMethod::split_quantile ? "split_quantile" : "crc_lplus";
}

bool PredictionSet::contains_index(std::size_t idx) const {
  return std::binary_search(members.begin(), members.end(), idx);
}

bool PredictionSet::contains_value(double y) const {
  switch (kind) {
    case Kind::interval:
    case Kind::grid_interval: return !empty() && y >= lower && y <= upper;
    case Kind::label_subset:
      return y >= 0 && y == std::floor(y) && contains_index(static_cast<std::size_t>(y));
  }
  return false;
}

namespace {
std::size_t conformal_rank(std::size_t n, double alpha) {
  return static_cast<std::size_t>(std::ceil(static_cast<double>(n + 1) * (1.0 - alpha) - 1e-9));
}
}  // namespace

Threshold split_threshold(std::span<const double> cal_scores, double alpha) {
  if (cal_scores.empty()) throw std::invalid_argument("empty calibration scores");
  if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("alpha must lie in (0,1)");
  const std::size_t n = cal_scores.size();
  const std::size_t k = conformal_rank(n, alpha);
  Threshold out;
  out.method = ThresholdMethod::split_quantile;
  if (k > n) {
    out.lambda = kInf;
    out.feasible = false;
    return out;
  }
  std::vector<double> sorted(cal_scores.begin(), cal_scores.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end());
  out.lambda = sorted[k - 1];
  return out;
}

PredictionSet build_set(std::span<const double> test_score_row, std::span<const double> candidate_grid,
                        double lambda, TaskKind task) {
  if (test_score_row.size() != candidate_grid.size())
    throw std::invalid_argument("score row and candidate grid lengths differ");
  PredictionSet out;
  out.kind = task == TaskKind::regression ? PredictionSet::Kind::grid_interval : PredictionSet::Kind::label_subset;
  for (std::size_t k = 0; k < test_score_row.size(); ++k)
    if (test_score_row[k] <= lambda) out.members.push_back(k);
  if (task == TaskKind::classification) {
    out.size = static_cast<double>(out.members.size());
    return out;
  }
  if (out.members.empty()) {
    out.lower = 1.0;
    out.upper = 0.0;
    return out;
  }
  out.lower = candidate_grid[out.members.front()];
  out.upper = candidate_grid[out.members.back()];
  const double spacing = candidate_grid.size() > 1 ? candidate_grid[1] - candidate_grid[0] : 0.0;
  out.size = static_cast<double>(out.members.size() - 1) * spacing;
  return out;
}

std::vector<double> miscoverage_losses(std::span<const double> cal_scores, double lambda) {
  std::vector<double> out(cal_scores.size());
  for (std::size_t i = 0; i < cal_scores.size(); ++i) out[i] = cal_scores[i] > lambda ? 1.0 : 0.0;
  return out;
}

Matrix sample_flat_dirichlet(std::size_t draws, std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw std::invalid_argument("Dirichlet dimension must be positive");
  Rng rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Matrix out(static_cast<Eigen::Index>(draws), static_cast<Eigen::Index>(dim));
  std::vector<double> cuts(dim - 1);
  for (std::size_t m = 0; m < draws; ++m) {
    for (auto& c : cuts) c = uniform(rng);
    std::sort(cuts.begin(), cuts.end());
    double prev = 0.0;
    for (std::size_t j = 0; j + 1 < dim; ++j) {
      out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(j)) = cuts[j] - prev;
      prev = cuts[j];
    }
    out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(dim - 1)) = 1.0 - prev;
  }
  return out;
}

Vector lplus_draws(std::span<const double> losses, double loss_bound, const Matrix& dirichlet) {
  const std::size_t n = losses.size();
  if (static_cast<std::size_t>(dirichlet.cols()) != n + 1)
    throw std::invalid_argument("Dirichlet bank must have n+1 columns");
  Vector sorted(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!(losses[i] >= 0.0 && losses[i] <= loss_bound))
      throw std::invalid_argument("loss outside [0, B]");
    sorted[static_cast<Eigen::Index>(i)] = losses[i];
  }
  std::sort(sorted.begin(), sorted.end());
  const auto nn = static_cast<Eigen::Index>(n);
  Vector out = dirichlet.leftCols(nn) * sorted;
  out += loss_bound * dirichlet.col(nn);
  return out;
}

Vector lplus_draws(std::span<const double> losses, double loss_bound, std::size_t draws, std::uint64_t seed) {
  if (draws == 0) throw std::invalid_argument("need at least one draw");
  return lplus_draws(losses, loss_bound, sample_flat_dirichlet(draws, losses.size() + 1, seed));
}

double lplus_binary_cdf(std::size_t ones, std::size_t n, double alpha_over_b) {
  if (ones > n) throw std::invalid_argument("more ones than losses");
  if (alpha_over_b <= 0.0) return 0.0;
  if (alpha_over_b >= 1.0) return 1.0;
  if (ones == n) return 0.0;  // L+ = B almost surely
  return boost::math::ibeta(static_cast<double>(ones + 1), static_cast<double>(n - ones), alpha_over_b);
}

Feasibility crc_feasible(std::span<const double> losses, const RiskConfig& risk, const Matrix& dirichlet) {
  risk.validate();
  const Vector draws = lplus_draws(losses, risk.loss_bound, dirichlet);
  Feasibility out;
  out.draws = static_cast<std::size_t>(draws.size());
  out.seed = risk.seed;
  const auto below = (draws.array() <= risk.alpha).count();
  out.probability = static_cast<double>(below) / static_cast<double>(draws.size());
  out.feasible = out.probability >= 1.0 - risk.beta;

  std::size_t ones = 0;
  bool binary = true;
  for (double l : losses) {
    if (l == risk.loss_bound)
      ++ones;
    else if (l != 0.0)
      binary = false;
  }
  if (binary) out.exact_probability = lplus_binary_cdf(ones, losses.size(), risk.alpha / risk.loss_bound);
  return out;
}

Feasibility crc_feasible(std::span<const double> losses, const RiskConfig& risk) {
  risk.validate();
  return crc_feasible(losses, risk, sample_flat_dirichlet(risk.dirichlet_draws, losses.size() + 1, risk.seed));
}

CbConformal::CbConformal(const PosteriorDraws& draws, const Matrix& cal_features, const Vector& cal_labels)
    : draws_(draws) {
  if (cal_features.rows() != cal_labels.size()) throw std::invalid_argument("feature rows and label count differ");
  if (cal_labels.size() == 0) throw std::invalid_argument("empty calibration set");
  const Matrix eta = linear_predictors(draws, cal_features);
  const auto t_count = static_cast<Eigen::Index>(draws.size());
  scaled_.resize(cal_labels.size(), t_count);
  row_max_.resize(cal_labels.size());
  std::vector<double> loglik(draws.size());
  for (Eigen::Index i = 0; i < cal_labels.size(); ++i) {
    loglik_from_predictors(draws, {eta.col(i).data(), draws.size()}, cal_labels[i], loglik);
    const double m = *std::max_element(loglik.begin(), loglik.end());
    row_max_[i] = m;
    for (Eigen::Index t = 0; t < t_count; ++t) scaled_(i, t) = std::exp(loglik[static_cast<std::size_t>(t)] - m);
  }
}

std::vector<bool> CbConformal::included(const Vector& x, std::span<const double> candidate_grid, double alpha) const {
  if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("alpha must lie in (0,1)");
  const auto n = static_cast<std::size_t>(scaled_.rows());
  const std::size_t k = conformal_rank(n, alpha);
  const auto kk = static_cast<Eigen::Index>(candidate_grid.size());
  std::vector<bool> out(candidate_grid.size(), false);
  if (k > n) {
    std::fill(out.begin(), out.end(), true);
    return out;
  }

  Vector eta = draws_.weights() * x + draws_.intercepts();
  const auto t_count = static_cast<Eigen::Index>(draws_.size());
  Matrix weights(t_count, kk);
  std::vector<double> test_scores(candidate_grid.size());
  std::vector<bool> usable(candidate_grid.size(), true);
  std::vector<double> loglik(draws_.size());
  for (Eigen::Index c = 0; c < kk; ++c) {
    loglik_from_predictors(draws_, {eta.data(), draws_.size()}, candidate_grid[static_cast<std::size_t>(c)], loglik);
    const double lse = log_sum_exp(loglik);
    if (!std::isfinite(lse)) {
      usable[static_cast<std::size_t>(c)] = false;
      ++degenerate_;
      weights.col(c).setZero();
      continue;
    }
    for (Eigen::Index t = 0; t < t_count; ++t) weights(t, c) = std::exp(loglik[static_cast<std::size_t>(t)] - lse);
    test_scores[static_cast<std::size_t>(c)] = score_from_loglik(loglik, ScoreKind::aoi_neglog);
  }

  const Matrix reweighted = scaled_ * weights;  // n_cal x K
  for (Eigen::Index c = 0; c < kk; ++c) {
    if (!usable[static_cast<std::size_t>(c)]) continue;
    const double s_test = test_scores[static_cast<std::size_t>(c)];
    std::size_t below = 0;
    for (Eigen::Index i = 0; i < scaled_.rows(); ++i) {
      const double log_p = row_max_[i] + std::log(reweighted(i, c));
      const double s_i = -std::max(log_p, kLogDensityFloor);
      if (s_i < s_test) ++below;
    }
    out[static_cast<std::size_t>(c)] = below + 1 <= k;
  }
  return out;
}

PredictionSet CbConformal::predict(const Vector& x, std::span<const double> candidate_grid, double alpha,
                                   TaskKind task) const {
  const auto keep = included(x, candidate_grid, alpha);
  // Reuse build_set on a 0/1 pseudo-score row.
  std::vector<double> row(keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) row[k] = keep[k] ? 0.0 : 1.0;
  return build_set(row, candidate_grid, 0.5, task);
}

PredictionSet cb_full_conformal(const PosteriorDraws& draws, const Matrix& cal_features, const Vector& cal_labels,
                                const Vector& x, std::span<const double> candidate_grid, double alpha,
                                TaskKind task) {
  return CbConformal(draws, cal_features, cal_labels).predict(x, candidate_grid, alpha, task);
}

}  // namespace bcp

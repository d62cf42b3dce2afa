#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bcp/common.hpp"
#include "bcp/posterior.hpp"

namespace bcp {

struct RiskConfig {
  double alpha = 0.2;
  double beta = 0.6;
  double loss_bound = 1.0;  // B
  std::size_t dirichlet_draws = 2000;  // M
  std::uint64_t seed = 0;

  void validate() const;
};

enum class ThresholdMethod { split_quantile, crc_lplus };

std::string_view to_string(ThresholdMethod method);

struct Threshold {
  double lambda = kInf;
  ThresholdMethod method = ThresholdMethod::split_quantile;
  /// False when the requested order statistic does not exist and lambda = +inf.
  bool feasible = true;
};

/// Prediction set over a candidate grid, a label subset, or a continuous interval.
struct PredictionSet {
  enum class Kind { grid_interval, label_subset, interval };

  Kind kind = Kind::grid_interval;
  std::vector<std::size_t> members;  // grid or label indices, ascending
  double lower = 0.0;                // interval bounds; meaningful when !empty()
  double upper = 0.0;
  double size = 0.0;  // width for intervals, cardinality for label subsets

  bool empty() const { return kind == Kind::interval ? !(upper >= lower) : members.empty(); }
  bool contains_index(std::size_t idx) const;
  /// Interval containment; for label subsets `y` is the label value.
  bool contains_value(double y) const;
};

/// k-th smallest score with k = ceil((n+1)(1-alpha)); +inf and feasible=false when k > n.
Threshold split_threshold(std::span<const double> cal_scores, double alpha);

/// {y : s(x, y) <= lambda}. Regression width is (count - 1) * grid spacing.
PredictionSet build_set(std::span<const double> test_score_row, std::span<const double> candidate_grid,
                        double lambda, TaskKind task);

/// l_i = 1{s_i > lambda}
std::vector<double> miscoverage_losses(std::span<const double> cal_scores, double lambda);

/// M x (n+1) flat-Dirichlet draws from the gaps of n sorted uniforms.
Matrix sample_flat_dirichlet(std::size_t draws, std::size_t dim, std::uint64_t seed);

/// L+ = sum_i U_i l_(i) + U_{n+1} B with ascending losses and a shared Dirichlet bank.
Vector lplus_draws(std::span<const double> losses, double loss_bound, const Matrix& dirichlet);
Vector lplus_draws(std::span<const double> losses, double loss_bound, std::size_t draws,
                   std::uint64_t seed);

struct Feasibility {
  bool feasible = false;
  double probability = 0.0;  // Monte Carlo estimate of P[L+ <= alpha]
  /// Closed-form P[L+ <= alpha] when every loss is 0 or B.
  std::optional<double> exact_probability;
  std::size_t draws = 0;
  std::uint64_t seed = 0;
};

/// P[L+ <= alpha] >= 1 - beta, estimated on the given Dirichlet bank.
Feasibility crc_feasible(std::span<const double> losses, const RiskConfig& risk, const Matrix& dirichlet);
Feasibility crc_feasible(std::span<const double> losses, const RiskConfig& risk);

/// Exact P[L+ <= alpha] for binary losses with `ones` losses equal to B out of n:
/// L+ / B ~ Beta(ones + 1, n - ones).
double lplus_binary_cdf(std::size_t ones, std::size_t n, double alpha_over_b);

/// Full-conformal Bayesian sets through importance reweighting of posterior
/// draws. Calibration log-likelihoods are computed once per instance.
class CbConformal {
 public:
  CbConformal(const PosteriorDraws& draws, const Matrix& cal_features, const Vector& cal_labels);

  /// Conformal p-value rank test for each candidate label.
  PredictionSet predict(const Vector& x, std::span<const double> candidate_grid, double alpha,
                        TaskKind task) const;
  /// Inclusion decision for each candidate (same rule as predict).
  std::vector<bool> included(const Vector& x, std::span<const double> candidate_grid, double alpha) const;

  std::size_t excluded_degenerate() const { return degenerate_; }

 private:
  const PosteriorDraws& draws_;
  Matrix scaled_;      // n_cal x T, exp(loglik - row max)
  Vector row_max_;     // n_cal
  mutable std::size_t degenerate_ = 0;
};

PredictionSet cb_full_conformal(const PosteriorDraws& draws, const Matrix& cal_features, const Vector& cal_labels,
                                const Vector& x, std::span<const double> candidate_grid, double alpha,
                                TaskKind task);

}  // namespace bcp

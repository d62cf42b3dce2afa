#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "bcp/common.hpp"

namespace bcp {

struct KernelConfig {
  double lengthscale = 1.0;
  double signal_var = 1.0;
  double jitter = 1e-8;

  void validate() const;
};

/// g_lambda(x_i) for each evaluation input (rows) and candidate threshold (columns).
struct SizeCurve {
  std::vector<double> lambda_grid;
  Matrix per_input_sizes;  // n_eval x n_lambda
};

struct BqEstimate {
  double mean = 0.0;
  double variance = 0.0;
  std::size_t n_nodes = 0;
};

/// Set size of {y : s(x_i, y) <= lambda_j}: cardinality for classification,
/// grid width for regression. `score_matrix` is n_eval x K.
SizeCurve set_size_per_input(const Matrix& score_matrix, std::span<const double> candidate_grid,
                             std::span<const double> lambda_grid, TaskKind task);

double rbf_kernel(const RowVector& a, const RowVector& b, const KernelConfig& kernel);

/// Median pairwise Euclidean distance; 1 when all points coincide.
double median_pairwise_distance(const Matrix& inputs);

/// Greedy farthest-point subsample of min(max_nodes, n) row indices.
std::vector<std::size_t> farthest_point_nodes(const Matrix& inputs, std::size_t max_nodes);

/// Bayesian quadrature estimate of the empirical mean of `sizes` over
/// `eval_inputs`, observing only the node rows. Weights are shifted so they
/// sum to one (constant mean marginalized under a flat prior).
BqEstimate bq_expected_size(const Matrix& eval_inputs, std::span<const double> sizes,
                            std::span<const std::size_t> nodes, const KernelConfig& kernel);

/// Quadrature weights on the nodes, reusable across integrands with the same kernel.
class BqWeights {
 public:
  BqWeights(const Matrix& eval_inputs, std::span<const std::size_t> nodes, const KernelConfig& kernel);

  const Vector& weights() const { return weights_; }
  const std::vector<std::size_t>& nodes() const { return nodes_; }
  /// Posterior mean and variance; variance scales with kernel.signal_var.
  BqEstimate integrate(std::span<const double> sizes) const;

 private:
  std::vector<std::size_t> nodes_;
  Vector weights_;
  double variance_ = 0.0;
};

double mc_expected_size(std::span<const double> sizes);

enum class CandidateStrategy { score_quantiles, uniform };

std::string_view to_string(CandidateStrategy strategy);

/// Sorted thresholds ending with a +inf sentinel.
std::vector<double> candidate_grid(std::span<const double> cal_scores, CandidateStrategy strategy,
                                   std::size_t size);

}  // namespace bcp

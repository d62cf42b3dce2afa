#include "bcp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bcp {

void KernelConfig::validate() const {
  if (!(lengthscale > 0 && signal_var > 0 && jitter > 0))
    throw std::invalid_argument("kernel parameters must be strictly positive");
}

std::string_view to_string(CandidateStrategy strategy) {
  return strategy == CandidateStrategy::score_quantiles ? "score_quantiles" : "uniform";
}

SizeCurve set_size_per_input(const Matrix& score_matrix, std::span<const double> candidate_grid,
                             std::span<const double> lambda_grid, TaskKind task) {
  if (static_cast<std::size_t>(score_matrix.cols()) != candidate_grid.size())
    throw std::invalid_argument("score matrix columns must match the candidate grid");
  if (!std::is_sorted(lambda_grid.begin(), lambda_grid.end()))
    throw std::invalid_argument("lambda grid must be sorted");
  const double spacing = candidate_grid.size() > 1 ? candidate_grid[1] - candidate_grid[0] : 0.0;

  SizeCurve out;
  out.lambda_grid.assign(lambda_grid.begin(), lambda_grid.end());
  out.per_input_sizes.resize(score_matrix.rows(), static_cast<Eigen::Index>(lambda_grid.size()));
  std::vector<double> row(candidate_grid.size());
  for (Eigen::Index i = 0; i < score_matrix.rows(); ++i) {
    for (std::size_t k = 0; k < row.size(); ++k) row[k] = score_matrix(i, static_cast<Eigen::Index>(k));
    if (std::any_of(row.begin(), row.end(), [](double s) { return std::isnan(s); }))
      throw std::invalid_argument("NaN score");
    std::sort(row.begin(), row.end());
    for (std::size_t j = 0; j < lambda_grid.size(); ++j) {
      const auto count =
          static_cast<double>(std::upper_bound(row.begin(), row.end(), lambda_grid[j]) - row.begin());
      double size = count;
      if (task == TaskKind::regression) size = count > 0 ? (count - 1) * spacing : 0.0;
      out.per_input_sizes(i, static_cast<Eigen::Index>(j)) = size;
    }
  }
  return out;
}

double rbf_kernel(const RowVector& a, const RowVector& b, const KernelConfig& kernel) {
  return kernel.signal_var * std::exp(-0.5 * (a - b).squaredNorm() / (kernel.lengthscale * kernel.lengthscale));
}

double median_pairwise_distance(const Matrix& inputs) {
  std::vector<double> dist;
  for (Eigen::Index i = 0; i < inputs.rows(); ++i)
    for (Eigen::Index j = i + 1; j < inputs.rows(); ++j) dist.push_back((inputs.row(i) - inputs.row(j)).norm());
  if (dist.empty()) return 1.0;
  auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
  std::nth_element(dist.begin(), mid, dist.end());
  return *mid > 0 ? *mid : 1.0;
}

std::vector<std::size_t> farthest_point_nodes(const Matrix& inputs, std::size_t max_nodes) {
  const auto n = static_cast<std::size_t>(inputs.rows());
  const std::size_t m = std::min(n, max_nodes);
  std::vector<std::size_t> nodes;
  if (m == 0) return nodes;
  // Start from the point closest to the centroid.
  const RowVector centroid = inputs.colwise().mean();
  std::size_t first = 0;
  double best = kInf;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = (inputs.row(static_cast<Eigen::Index>(i)) - centroid).squaredNorm();
    if (d < best) {
      best = d;
      first = i;
    }
  }
  nodes.push_back(first);
  std::vector<double> nearest(n, kInf);
  std::vector<bool> taken(n, false);
  taken[first] = true;
  while (nodes.size() < m) {
    const auto last = static_cast<Eigen::Index>(nodes.back());
    std::size_t pick = n;
    double far = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      nearest[i] = std::min(nearest[i], (inputs.row(static_cast<Eigen::Index>(i)) - inputs.row(last)).squaredNorm());
      if (nearest[i] > far) {
        far = nearest[i];
        pick = i;
      }
    }
    taken[pick] = true;
    nodes.push_back(pick);
  }
  return nodes;
}

BqWeights::BqWeights(const Matrix& eval_inputs, std::span<const std::size_t> nodes, const KernelConfig& kernel)
    : nodes_(nodes.begin(), nodes.end()) {
  kernel.validate();
  if (nodes_.empty()) throw std::invalid_argument("BQ needs at least one node");
  const Eigen::Index n_eval = eval_inputs.rows();
  const auto m = static_cast<Eigen::Index>(nodes_.size());
  for (auto idx : nodes_)
    if (static_cast<Eigen::Index>(idx) >= n_eval) throw std::invalid_argument("BQ node outside evaluation inputs");

  Matrix gram(m, m);
  Vector kernel_mean(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const RowVector xa = eval_inputs.row(static_cast<Eigen::Index>(nodes_[static_cast<std::size_t>(a)]));
    for (Eigen::Index b = 0; b <= a; ++b) {
      gram(a, b) = rbf_kernel(xa, eval_inputs.row(static_cast<Eigen::Index>(nodes_[static_cast<std::size_t>(b)])), kernel);
      gram(b, a) = gram(a, b);
    }
    double total = 0.0;
    for (Eigen::Index j = 0; j < n_eval; ++j) total += rbf_kernel(xa, eval_inputs.row(j), kernel);
    kernel_mean[a] = total / static_cast<double>(n_eval);
  }
  double double_mean = 0.0;
  for (Eigen::Index i = 0; i < n_eval; ++i)
    for (Eigen::Index j = 0; j < n_eval; ++j) double_mean += rbf_kernel(eval_inputs.row(i), eval_inputs.row(j), kernel);
  double_mean /= static_cast<double>(n_eval) * static_cast<double>(n_eval);

  double jitter = kernel.jitter;
  while (true) {
    Matrix jittered = gram;
    jittered.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(jittered);
    if (llt.info() == Eigen::Success) {
      const Vector a = llt.solve(kernel_mean);
      const Vector b = llt.solve(Vector::Ones(m));
      const double sum_b = b.sum();
      if (a.allFinite() && b.allFinite() && sum_b > 0) {
        const double gap = 1.0 - a.sum();
        weights_ = a + (gap / sum_b) * b;
        variance_ = double_mean - kernel_mean.dot(a) + gap * gap / sum_b;
        if (variance_ < 0.0) variance_ = 0.0;
        return;
      }
    }
    jitter *= 10.0;
    if (jitter > 1e-2) throw std::runtime_error("BQ kernel matrix singular after jitter escalation");
  }
}

BqEstimate BqWeights::integrate(std::span<const double> sizes) const {
  BqEstimate out;
  out.n_nodes = nodes_.size();
  for (std::size_t a = 0; a < nodes_.size(); ++a) {
    if (nodes_[a] >= sizes.size()) throw std::invalid_argument("size column shorter than node index");
    out.mean += weights_[static_cast<Eigen::Index>(a)] * sizes[nodes_[a]];
  }
  out.variance = variance_;
  return out;
}

BqEstimate bq_expected_size(const Matrix& eval_inputs, std::span<const double> sizes,
                            std::span<const std::size_t> nodes, const KernelConfig& kernel) {
  if (sizes.size() != static_cast<std::size_t>(eval_inputs.rows()))
    throw std::invalid_argument("one size per evaluation input required");
  return BqWeights(eval_inputs, nodes, kernel).integrate(sizes);
}

double mc_expected_size(std::span<const double> sizes) {
  if (sizes.empty()) throw std::invalid_argument("empty size column");
  return std::accumulate(sizes.begin(), sizes.end(), 0.0) / static_cast<double>(sizes.size());
}

std::vector<double> candidate_grid(std::span<const double> cal_scores, CandidateStrategy strategy,
                                   std::size_t size) {
  if (cal_scores.empty()) throw std::invalid_argument("empty calibration scores");
  if (size < 2) throw std::invalid_argument("candidate grid size must be at least 2");
  std::vector<double> sorted(cal_scores.begin(), cal_scores.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  if (strategy == CandidateStrategy::score_quantiles) {
    const double last = static_cast<double>(sorted.size() - 1);
    for (std::size_t j = 0; j < size; ++j) {
      const double q = static_cast<double>(j) / static_cast<double>(size - 1);
      out.push_back(sorted[static_cast<std::size_t>(std::llround(q * last))]);
    }
    out.erase(std::unique(out.begin(), out.end()), out.end());
  } else {
    const double lo = sorted.front();
    const double hi = sorted.back();
    for (std::size_t j = 0; j < size; ++j)
      out.push_back(lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(size - 1));
    out.back() = hi;
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  out.push_back(kInf);
  return out;
}

}  // namespace bcp

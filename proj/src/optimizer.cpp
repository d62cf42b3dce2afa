#include "bcp/optimizer.hpp"

#include <cmath>

namespace bcp {

BcpSolution select_from_table(std::vector<CandidateRow> table) {
  if (table.empty()) throw std::invalid_argument("empty candidate grid");
  BcpSolution out;
  std::optional<std::size_t> best;
  for (std::size_t j = 0; j < table.size(); ++j) {
    if (!table[j].feasible) continue;
    if (!best || table[j].bq_mean < table[*best].bq_mean ||
        (table[j].bq_mean == table[*best].bq_mean && table[j].lambda < table[*best].lambda))
      best = j;
  }
  if (!best) {
    out.fallback_used = true;
    best = table.size() - 1;
    for (std::size_t j = 0; j < table.size(); ++j)
      if (table[j].lambda > table[*best].lambda) best = j;
  }
  out.star_index = *best;
  out.lambda_star = table[*best].lambda;
  out.bq_size_at_star = table[*best].bq_mean;
  out.feasibility_prob = table[*best].feasibility_prob;
  out.candidate_table = std::move(table);
  return out;
}

BcpSolution select_lambda(std::span<const double> lambdas, std::span<const BqEstimate> bq,
                          const std::vector<std::vector<double>>& losses_per_lambda, const RiskConfig& risk) {
  risk.validate();
  if (lambdas.empty()) throw std::invalid_argument("empty candidate grid");
  if (bq.size() != lambdas.size() || losses_per_lambda.size() != lambdas.size())
    throw std::invalid_argument("candidate inputs have different lengths");
  const std::size_t n = losses_per_lambda.front().size();
  const Matrix bank = sample_flat_dirichlet(risk.dirichlet_draws, n + 1, risk.seed);

  std::vector<CandidateRow> table(lambdas.size());
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    if (losses_per_lambda[j].size() != n) throw std::invalid_argument("loss vectors differ in length");
    const auto feas = crc_feasible(losses_per_lambda[j], risk, bank);
    table[j] = CandidateRow{lambdas[j], bq[j].mean, bq[j].variance, feas.feasible, feas.probability,
                            feas.exact_probability};
  }
  auto out = select_from_table(std::move(table));
  return out;
}

BcpSolution bcp_calibrate_scores(std::span<const double> cal_scores, const Matrix& eval_inputs,
                                 const Matrix& eval_scores, std::span<const double> label_grid,
                                 const RiskConfig& risk, const BcpOptions& options) {
  risk.validate();
  if (eval_inputs.rows() != eval_scores.rows())
    throw std::invalid_argument("evaluation inputs and score rows differ");
  const std::size_t n_candidates = options.n_candidates == 0 ? cal_scores.size() : options.n_candidates;
  const auto lambdas = candidate_grid(cal_scores, options.strategy, std::max<std::size_t>(n_candidates, 2));
  const auto curve = set_size_per_input(eval_scores, label_grid, lambdas, options.task);

  std::vector<BqEstimate> estimates(lambdas.size());
  if (options.use_mc) {
    for (std::size_t j = 0; j < lambdas.size(); ++j) {
      const Vector col = curve.per_input_sizes.col(static_cast<Eigen::Index>(j));
      estimates[j].mean = mc_expected_size({col.data(), static_cast<std::size_t>(col.size())});
      estimates[j].n_nodes = static_cast<std::size_t>(col.size());
    }
  } else {
    const auto nodes = farthest_point_nodes(eval_inputs, options.max_nodes);
    KernelConfig base = options.kernel.value_or(KernelConfig{median_pairwise_distance(eval_inputs), 1.0, 1e-8});
    for (std::size_t j = 0; j < lambdas.size(); ++j) {
      const Vector col = curve.per_input_sizes.col(static_cast<Eigen::Index>(j));
      KernelConfig kernel = base;
      if (!options.kernel) {
        double mean = 0.0;
        for (auto idx : nodes) mean += col[static_cast<Eigen::Index>(idx)];
        mean /= static_cast<double>(nodes.size());
        double var = 0.0;
        for (auto idx : nodes) var += std::pow(col[static_cast<Eigen::Index>(idx)] - mean, 2);
        var = nodes.size() > 1 ? var / static_cast<double>(nodes.size() - 1) : 0.0;
        kernel.signal_var = var > 0 ? var : 1.0;
      }
      estimates[j] = bq_expected_size(eval_inputs, {col.data(), static_cast<std::size_t>(col.size())}, nodes, kernel);
    }
  }

  std::vector<std::vector<double>> losses(lambdas.size());
  for (std::size_t j = 0; j < lambdas.size(); ++j) losses[j] = miscoverage_losses(cal_scores, lambdas[j]);

  auto out = select_lambda(lambdas, estimates, losses, risk);
  for (std::size_t j = 1; j < estimates.size(); ++j)
    if (estimates[j].mean < estimates[j - 1].mean - options.monotone_tolerance) out.non_monotone_sizes = true;
  return out;
}

BcpSolution bcp_calibrate(const PosteriorDraws& draws, const Matrix& cal_features, const Vector& cal_labels,
                          std::span<const double> label_grid, const RiskConfig& risk, const BcpOptions& options,
                          const Matrix* eval_pool) {
  const Vector cal_scores = compute_cal_scores(draws, cal_features, cal_labels, options.cal_score_kind);
  const Matrix& eval_inputs = eval_pool ? *eval_pool : cal_features;
  const auto eval_scores = compute_test_scores(draws, eval_inputs, label_grid, options.test_score_kind);
  return bcp_calibrate_scores({cal_scores.data(), static_cast<std::size_t>(cal_scores.size())}, eval_inputs,
                              eval_scores.test_scores, label_grid, risk, options);
}

}  // namespace bcp

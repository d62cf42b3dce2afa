#include "bcp/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "bcp/baselines.hpp"
#include "bcp/conformal.hpp"
#include "bcp/datasets.hpp"
#include "bcp/optimizer.hpp"
#include "bcp/quadrature.hpp"
#include "bcp/scores.hpp"

namespace bcp {

namespace {

constexpr int kInstances = 40;

Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

std::vector<double> positive_likes(std::size_t n, Rng& rng) {
  std::lognormal_distribution<double> dist(0.0, 2.0);
  std::vector<double> f(n);
  for (auto& v : f) v = dist(rng);
  return f;
}

CheckResult check(std::string name, const std::function<std::string(Rng&)>& body, std::uint64_t seed) {
  Rng rng(seed);
  CheckResult out{std::move(name), true, ""};
  try {
    for (int i = 0; i < kInstances && out.passed; ++i) {
      auto failure = body(rng);
      if (!failure.empty()) {
        out.passed = false;
        out.detail = "instance " + std::to_string(i) + ": " + failure;
      }
    }
  } catch (const std::exception& e) {
    out.passed = false;
    out.detail = std::string("threw: ") + e.what();
  }
  return out;
}

std::string aoi_cauchy_schwarz(Rng& rng) {
  const auto f = positive_likes(1 + rng() % 50, rng);
  const double aoi = aoi_predictive(f);
  const double mean = mean_predictive(f);
  if (aoi < mean * (1 - 1e-12)) return "AOI predictive below the plain mean";
  return {};
}

std::string aoi_scale_covariance(Rng& rng) {
  auto f = positive_likes(1 + rng() % 50, rng);
  const double before = aoi_predictive(f);
  const double c = std::exp(std::uniform_real_distribution<double>(-5, 5)(rng));
  for (auto& v : f) v *= c;
  if (std::abs(aoi_predictive(f) - c * before) > 1e-10 * c * before) return "p(c f) != c p(f)";
  // Log-space scores shift by -log c.
  std::vector<double> logs(f.size());
  std::transform(f.begin(), f.end(), logs.begin(), [](double v) { return std::log(v); });
  if (std::abs(-log_aoi_predictive(logs) - neglog_score(c * before)) > 1e-9) return "log-space AOI disagrees";
  return {};
}

std::string size_monotone(Rng& rng) {
  const Eigen::Index n = 5 + static_cast<Eigen::Index>(rng() % 10);
  const std::size_t k = 3 + rng() % 20;
  const Matrix scores = normal_matrix(n, static_cast<Eigen::Index>(k), rng).array().abs().matrix();
  std::vector<double> grid(k);
  for (std::size_t i = 0; i < k; ++i) grid[i] = static_cast<double>(i) * 0.1;
  std::vector<double> lambdas{-1.0, 0.0, 0.2, 0.5, 1.0, 2.0, kInf};
  for (auto task : {TaskKind::regression, TaskKind::classification}) {
    const auto curve = set_size_per_input(scores, grid, lambdas, task);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 1; j < curve.per_input_sizes.cols(); ++j)
        if (curve.per_input_sizes(i, j) < curve.per_input_sizes(i, j - 1)) return "size decreased in lambda";
  }
  return {};
}

struct ToyCalibration {
  std::vector<double> cal;
  Matrix inputs;
  Matrix eval_scores;
  std::vector<double> grid;
};

ToyCalibration toy_calibration(Rng& rng) {
  ToyCalibration t;
  const Eigen::Index n = 20 + static_cast<Eigen::Index>(rng() % 40);
  std::exponential_distribution<double> expo(1.0);
  t.cal.resize(static_cast<std::size_t>(n));
  for (auto& s : t.cal) s = expo(rng);
  t.inputs = normal_matrix(n, 2, rng);
  t.grid = {0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
  t.eval_scores.resize(n, static_cast<Eigen::Index>(t.grid.size()));
  for (Eigen::Index i = 0; i < n; ++i)
    for (std::size_t k = 0; k < t.grid.size(); ++k)
      t.eval_scores(i, static_cast<Eigen::Index>(k)) = std::abs(t.grid[k] - 1.0) * (1 + 0.5 * std::abs(t.inputs(i, 0))) + 0.1 * expo(rng);
  return t;
}

std::string lambda_monotone(Rng& rng) {
  const auto t = toy_calibration(rng);
  BcpOptions options;
  options.use_mc = rng() % 2 == 0;
  const std::uint64_t bank_seed = rng();
  auto solve = [&](double alpha, double beta) {
    RiskConfig risk{alpha, beta, 1.0, 500, bank_seed};
    return bcp_calibrate_scores(t.cal, t.inputs, t.eval_scores, t.grid, risk, options).lambda_star;
  };
  double prev = kInf;
  for (double alpha : {0.05, 0.1, 0.2, 0.3, 0.5}) {
    const double l = solve(alpha, 0.5);
    if (l > prev) return "lambda* increased with alpha";
    prev = l;
  }
  prev = kInf;
  for (double beta : {0.05, 0.2, 0.5, 0.8, 0.95}) {
    const double l = solve(0.2, beta);
    if (l > prev) return "lambda* increased with beta";
    prev = l;
  }
  return {};
}

std::string bq_constant_exact(Rng& rng) {
  const Eigen::Index n = 10 + static_cast<Eigen::Index>(rng() % 40);
  const Matrix x = normal_matrix(n, 3, rng);
  const double c = std::uniform_real_distribution<double>(-3, 3)(rng);
  std::vector<double> values(static_cast<std::size_t>(n), c);
  const auto nodes = farthest_point_nodes(x, 1 + rng() % static_cast<std::size_t>(n));
  const KernelConfig kernel{median_pairwise_distance(x), 1.0, 1e-8};
  const auto est = bq_expected_size(x, values, nodes, kernel);
  if (std::abs(est.mean - c) > 1e-9 * std::max(1.0, std::abs(c))) return "constant not integrated exactly";
  return {};
}

std::string bq_full_nodes(Rng& rng) {
  const Eigen::Index n = 5 + static_cast<Eigen::Index>(rng() % 40);
  const Matrix x = normal_matrix(n, 2, rng);
  std::vector<double> values(static_cast<std::size_t>(n));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& v : values) v = normal(rng);
  std::vector<std::size_t> nodes(static_cast<std::size_t>(n));
  std::iota(nodes.begin(), nodes.end(), std::size_t{0});
  const KernelConfig kernel{median_pairwise_distance(x), 1.0, 1e-8};
  const auto est = bq_expected_size(x, values, nodes, kernel);
  if (std::abs(est.mean - mc_expected_size(values)) > 1e-6) return "BQ with every node differs from the mean";
  return {};
}

std::string lasso_soft_threshold(Rng& rng) {
  // One centred, unit-variance column: the solution is S(x.y/n, penalty).
  const Eigen::Index n = 20 + static_cast<Eigen::Index>(rng() % 50);
  Matrix x = normal_matrix(n, 1, rng);
  x.array() -= x.mean();
  x /= std::sqrt(x.squaredNorm() / static_cast<double>(n));
  Vector y = 0.7 * x.col(0) + normal_matrix(n, 1, rng).col(0);
  const double penalty = std::uniform_real_distribution<double>(0.0, 1.2)(rng);
  const auto model = lasso_fit(x, y, penalty);
  const double z = x.col(0).dot(y) / static_cast<double>(n);
  const double expected = std::copysign(std::max(std::abs(z) - penalty, 0.0), z);
  if (std::abs(model.coefficients[0] - expected) > 1e-7) return "coefficient is not the soft-thresholded value";
  if (std::abs(model.intercept - y.mean()) > 1e-7) return "intercept is not the label mean";
  return {};
}

std::string lasso_descent(Rng& rng) {
  const Eigen::Index n = 30 + static_cast<Eigen::Index>(rng() % 40);
  const Matrix x = normal_matrix(n, 6, rng);
  const Vector y = x.col(0) - 0.5 * x.col(3) + normal_matrix(n, 1, rng).col(0);
  const auto model = lasso_fit(x, y, std::uniform_real_distribution<double>(0.001, 0.5)(rng));
  for (std::size_t s = 1; s < model.objective_trace.size(); ++s)
    if (model.objective_trace[s] > model.objective_trace[s - 1] + 1e-12) return "objective increased in a sweep";
  return {};
}

std::string standardization_leakage(Rng& rng) {
  Dataset d;
  const Eigen::Index n = 40;
  d.features = normal_matrix(n, 3, rng);
  d.labels = normal_matrix(n, 1, rng).col(0);
  d.feature_names = {"a", "b", "c"};
  const auto split = make_split(static_cast<std::size_t>(n), SplitRatios{}, rng());
  const auto before = fit_standardizer(d, split.train_idx);
  for (auto i : split.cal_idx) d.features.row(static_cast<Eigen::Index>(i)).array() += 1e3;
  for (auto i : split.test_idx) d.labels[static_cast<Eigen::Index>(i)] = -1e6;
  const auto after = fit_standardizer(d, split.train_idx);
  if (before.means != after.means || before.sds != after.sds) return "held-out rows changed the standardizer";
  return {};
}

}  // namespace

std::vector<CheckResult> run_invariant_suite(std::uint64_t seed) {
  std::vector<std::pair<std::string, std::function<std::string(Rng&)>>> checks{
      {"aoi_cauchy_schwarz", aoi_cauchy_schwarz},
      {"aoi_scale_covariance", aoi_scale_covariance},
      {"set_size_monotone_in_lambda", size_monotone},
      {"lambda_star_monotone_in_alpha_beta", lambda_monotone},
      {"bq_constant_exactness", bq_constant_exact},
      {"bq_equals_mc_at_full_nodes", bq_full_nodes},
      {"lasso_soft_threshold", lasso_soft_threshold},
      {"lasso_objective_descent", lasso_descent},
      {"standardization_leakage", standardization_leakage},
  };
  std::vector<CheckResult> out;
  for (std::size_t i = 0; i < checks.size(); ++i)
    out.push_back(check(checks[i].first, checks[i].second, derive_seed(seed, i)));
  return out;
}

}  // namespace bcp

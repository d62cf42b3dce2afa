#include "bcp/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "bcp/baselines.hpp"
#include "bcp/conformal.hpp"
#include "bcp/optimizer.hpp"

namespace bcp {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::split_cp: return "split_cp";
    case Method::bci: return "bci";
    case Method::cb: return "cb";
    case Method::bcp: return "bcp";
    case Method::msp: return "msp";
  }
  return "unknown";
}

Method method_from_string(std::string_view name) {
  if (name == "split_cp" || name == "split-cp") return Method::split_cp;
  if (name == "bci") return Method::bci;
  if (name == "cb") return Method::cb;
  if (name == "bcp") return Method::bcp;
  if (name == "msp") return Method::msp;
  throw std::invalid_argument("unknown method: " + std::string(name));
}

std::string_view to_string(Profile profile) { return profile == Profile::desk ? "desk" : "paper"; }

Profile profile_from_string(std::string_view name) {
  if (name == "desk") return Profile::desk;
  if (name == "paper") return Profile::paper;
  throw std::invalid_argument("unknown profile: " + std::string(name));
}

void ExperimentConfig::validate() const {
  if (n_splits == 0) throw std::invalid_argument("n_splits must be at least 1");
  if (methods.empty()) throw std::invalid_argument("methods must be non-empty");
  if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("alpha must lie in (0,1)");
  if (betas.empty()) throw std::invalid_argument("need at least one beta");
  for (double b : betas)
    if (!(b > 0 && b < 1)) throw std::invalid_argument("beta must lie in (0,1)");
  if (task == TaskKind::regression && prior_scales.empty())
    throw std::invalid_argument("need at least one prior scale");
  for (double c : prior_scales)
    if (!(c > 0)) throw std::invalid_argument("prior scale must be positive");
  if (grid_size < 2) throw std::invalid_argument("grid_size must be at least 2");
  mcmc.validate();
}

void ExperimentConfig::apply_profile(Profile p) {
  profile = p;
  if (p == Profile::paper) {
    n_splits = 50;
    mcmc.total_iters = 8000;
    mcmc.burn_in = 2000;
  } else {
    n_splits = 10;
    mcmc.total_iters = 2000;
    mcmc.burn_in = 500;
  }
}

const MethodSummary& MetricsSummary::find(Method method, double prior_scale, std::optional<double> beta) const {
  for (const auto& row : summary) {
    if (row.method != method || row.prior_scale != prior_scale) continue;
    if (method == Method::bcp && beta && (!row.beta || *row.beta != *beta)) continue;
    return row;
  }
  throw std::out_of_range("no summary row for " + std::string(to_string(method)));
}

SplitError::SplitError(std::size_t split_index, std::uint64_t seed, const std::string& what)
    : std::runtime_error("split " + std::to_string(split_index) + " (seed " + std::to_string(seed) +
                         ") failed: " + what),
      split_index_(split_index),
      seed_(seed) {}

std::uint64_t split_seed(const ExperimentConfig& config, std::size_t split_index) {
  return derive_seed(config.seed, split_index);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool wants(const ExperimentConfig& config, Method m) {
  return std::find(config.methods.begin(), config.methods.end(), m) != config.methods.end();
}

struct Prepared {
  Dataset train;
  Dataset cal;
  Dataset test;
};

Prepared prepare_split(const Dataset& data, const SplitSpec& split) {
  const auto standardizer = fit_standardizer(data, split.train_idx);
  const Dataset scaled = apply_standardizer(standardizer, data);
  return {scaled.subset(split.train_idx), scaled.subset(split.cal_idx), scaled.subset(split.test_idx)};
}

std::span<const double> as_span(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

std::vector<double> row_of(const Matrix& m, Eigen::Index i) {
  std::vector<double> out(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index k = 0; k < m.cols(); ++k) out[static_cast<std::size_t>(k)] = m(i, k);
  return out;
}

struct Tally {
  double covered = 0.0;
  double size = 0.0;
  std::size_t count = 0;

  void add(bool hit, double set_size) {
    covered += hit ? 1.0 : 0.0;
    size += set_size;
    ++count;
  }
};

SplitRecord make_record(std::size_t split_index, std::uint64_t seed, Method method, double scale,
                        const Tally& tally) {
  SplitRecord r;
  r.split_index = split_index;
  r.seed = seed;
  r.method = method;
  r.prior_scale = scale;
  r.n_test = tally.count;
  r.coverage = tally.covered / static_cast<double>(tally.count);
  r.mean_size = tally.size / static_cast<double>(tally.count);
  return r;
}

// BCP rows for every beta from one set of scores. The Dirichlet seed is shared
// across beta so thresholds are comparable under common random numbers.
void append_bcp_records(const ExperimentConfig& config, std::size_t split_index, std::uint64_t seed, double scale,
                        std::uint64_t dirichlet_seed, const PosteriorDraws& draws, const Prepared& part,
                        std::span<const double> grid, std::vector<SplitRecord>& out) {
  const TaskKind task = config.task;
  auto start = Clock::now();
  BcpOptions options;
  options.task = task;
  options.cal_score_kind = config.asymmetric_scores ? ScoreKind::mean_neglog : ScoreKind::aoi_neglog;
  options.test_score_kind = ScoreKind::aoi_neglog;
  options.use_mc = config.use_mc;
  options.max_nodes = config.bq_nodes;
  const Vector cal_scores = compute_cal_scores(draws, part.cal.features, part.cal.labels, options.cal_score_kind);
  const auto eval_scores = compute_test_scores(draws, part.cal.features, grid, options.test_score_kind);
  const double shared_calib = seconds_since(start);

  start = Clock::now();
  const auto test_scores = compute_test_scores(draws, part.test.features, grid, ScoreKind::aoi_neglog);
  const Vector true_scores = compute_cal_scores(draws, part.test.features, part.test.labels, ScoreKind::aoi_neglog);
  const double scoring_time = seconds_since(start);

  for (double beta : config.betas) {
    start = Clock::now();
    RiskConfig risk{config.alpha, beta, 1.0, config.dirichlet_draws, dirichlet_seed};
    const auto solution =
        bcp_calibrate_scores(as_span(cal_scores), part.cal.features, eval_scores.test_scores, grid, risk, options);
    const double calib = shared_calib + seconds_since(start);

    start = Clock::now();
    Tally tally;
    for (Eigen::Index i = 0; i < part.test.features.rows(); ++i) {
      const auto row = row_of(test_scores.test_scores, i);
      const auto set = build_set(row, grid, solution.lambda_star, task);
      tally.add(true_scores[i] <= solution.lambda_star, set.size);
    }
    auto rec = make_record(split_index, seed, Method::bcp, scale, tally);
    rec.beta = beta;
    rec.lambda = solution.lambda_star;
    rec.fallback = solution.fallback_used;
    rec.calib_time = calib;
    rec.pred_time = (scoring_time + seconds_since(start)) / static_cast<double>(tally.count);
    out.push_back(rec);
  }
}

void append_cb_record(const ExperimentConfig& config, std::size_t split_index, std::uint64_t seed, double scale,
                      const PosteriorDraws& draws, const Prepared& part, std::span<const double> grid,
                      std::vector<SplitRecord>& out) {
  auto start = Clock::now();
  const CbConformal cb(draws, part.cal.features, part.cal.labels);
  const double calib = seconds_since(start);
  start = Clock::now();
  Tally tally;
  std::vector<double> candidates(grid.begin(), grid.end());
  candidates.push_back(0.0);
  for (Eigen::Index i = 0; i < part.test.features.rows(); ++i) {
    const Vector x = part.test.features.row(i).transpose();
    candidates.back() = part.test.labels[i];
    const auto keep = cb.included(x, candidates, config.alpha);
    std::vector<double> row(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) row[k] = keep[k] ? 0.0 : 1.0;
    const auto set = build_set(row, grid, 0.5, config.task);
    tally.add(keep.back(), set.size);
  }
  auto rec = make_record(split_index, seed, Method::cb, scale, tally);
  rec.calib_time = calib;
  rec.pred_time = seconds_since(start) / static_cast<double>(tally.count);
  out.push_back(rec);
}

}  // namespace

std::vector<SplitRecord> run_regression_split(const ExperimentConfig& config, const Dataset& data,
                                              std::size_t split_index) {
  config.validate();
  const std::uint64_t seed = split_seed(config, split_index);
  try {
    const auto split = make_split(data.rows(), config.ratios, seed);
    const Prepared part = prepare_split(data, split);
    const auto grid = label_grid(as_span(part.train.labels), config.grid_size);
    std::vector<SplitRecord> out;

    std::optional<LassoModel> lasso;
    std::optional<Threshold> lasso_threshold;
    double lasso_calib = 0.0;
    if (wants(config, Method::split_cp)) {
      const auto start = Clock::now();
      lasso = lasso_fit(part.train.features, part.train.labels, config.lasso_penalty);
      lasso_threshold = residual_threshold(*lasso, part.cal.features, part.cal.labels, config.alpha);
      lasso_calib = seconds_since(start);
    }

    for (std::size_t ci = 0; ci < config.prior_scales.size(); ++ci) {
      const double c = config.prior_scales[ci];
      if (lasso) {
        const auto start = Clock::now();
        Tally tally;
        for (Eigen::Index i = 0; i < part.test.features.rows(); ++i) {
          const auto set = residual_interval(*lasso, part.test.features.row(i).transpose(), *lasso_threshold);
          tally.add(set.contains_value(part.test.labels[i]), set.size);
        }
        auto rec = make_record(split_index, seed, Method::split_cp, c, tally);
        rec.lambda = lasso_threshold->lambda;
        rec.fallback = !lasso_threshold->feasible;
        rec.calib_time = lasso_calib;
        rec.pred_time = seconds_since(start) / static_cast<double>(tally.count);
        out.push_back(rec);
      }

      const bool needs_posterior = wants(config, Method::bci) || wants(config, Method::cb) || wants(config, Method::bcp);
      if (!needs_posterior) continue;
      PriorConfigRegression prior;
      prior.c = c;
      McmcConfig mcmc = config.mcmc;
      mcmc.seed = derive_seed(seed, 1, ci);
      const auto draws = sample_blr(part.train, prior, mcmc);

      if (wants(config, Method::bci)) {
        const auto start = Clock::now();
        Tally tally;
        for (Eigen::Index i = 0; i < part.test.features.rows(); ++i) {
          const auto set = bci_regression_interval(draws, part.test.features.row(i).transpose(), config.alpha,
                                                   config.bci_samples_per_draw,
                                                   derive_seed(seed, 3, ci * 1000003 + static_cast<std::uint64_t>(i)),
                                                   config.hpd);
          tally.add(set.contains_value(part.test.labels[i]), set.size);
        }
        auto rec = make_record(split_index, seed, Method::bci, c, tally);
        rec.pred_time = seconds_since(start) / static_cast<double>(tally.count);
        out.push_back(rec);
      }
      if (wants(config, Method::cb)) append_cb_record(config, split_index, seed, c, draws, part, grid, out);
      if (wants(config, Method::bcp))
        append_bcp_records(config, split_index, seed, c, derive_seed(seed, 2, ci), draws, part, grid, out);
    }
    return out;
  } catch (const SplitError&) {
    throw;
  } catch (const std::exception& e) {
    throw SplitError(split_index, seed, e.what());
  }
}

std::vector<SplitRecord> run_classification_split(const ExperimentConfig& config, const Dataset& data,
                                                  std::size_t split_index) {
  config.validate();
  const std::uint64_t seed = split_seed(config, split_index);
  try {
    const auto split = make_split(data.rows(), config.ratios, seed);
    const Prepared part = prepare_split(data, split);
    const auto grid = binary_label_grid();
    const double scale = config.logistic_weight_sd;
    std::vector<SplitRecord> out;

    McmcConfig mcmc = config.mcmc;
    mcmc.seed = derive_seed(seed, 1, 0);
    const auto draws = sample_blogistic(part.train, PriorConfigLogistic{scale}, mcmc);

    if (wants(config, Method::split_cp)) {
      auto start = Clock::now();
      const Vector cal_scores = compute_cal_scores(draws, part.cal.features, part.cal.labels, ScoreKind::mean_neglog);
      const auto threshold = split_threshold(as_span(cal_scores), config.alpha);
      const double calib = seconds_since(start);
      start = Clock::now();
      const auto test_scores = compute_test_scores(draws, part.test.features, grid, ScoreKind::mean_neglog);
      Tally tally;
      for (Eigen::Index i = 0; i < part.test.features.rows(); ++i) {
        const auto set = build_set(row_of(test_scores.test_scores, i), grid, threshold.lambda, TaskKind::classification);
        tally.add(set.contains_value(part.test.labels[i]), set.size);
      }
      auto rec = make_record(split_index, seed, Method::split_cp, scale, tally);
      rec.lambda = threshold.lambda;
      rec.fallback = !threshold.feasible;
      rec.calib_time = calib;
      rec.pred_time = seconds_since(start) / static_cast<double>(tally.count);
      out.push_back(rec);
    }
    if (wants(config, Method::bci) || wants(config, Method::msp)) {
      const auto start = Clock::now();
      Tally bci;
      Tally msp;
      for (Eigen::Index i = 0; i < part.test.features.rows(); ++i) {
        const double p1 = predictive_prob_one(draws, part.test.features.row(i).transpose());
        const auto set = bci_classification_set(p1, config.alpha);
        bci.add(set.contains_value(part.test.labels[i]), set.size);
        const std::vector<double> means{1.0 - p1, p1};
        const auto ranked = msp_rank(means);
        msp.add(static_cast<double>(ranked.front().label) == part.test.labels[i], 1.0);
      }
      const double per_point = seconds_since(start) / static_cast<double>(bci.count);
      if (wants(config, Method::bci)) {
        auto rec = make_record(split_index, seed, Method::bci, scale, bci);
        rec.pred_time = per_point;
        out.push_back(rec);
      }
      if (wants(config, Method::msp)) {
        auto rec = make_record(split_index, seed, Method::msp, scale, msp);
        rec.pred_time = per_point;
        out.push_back(rec);
      }
    }
    if (wants(config, Method::cb)) append_cb_record(config, split_index, seed, scale, draws, part, grid, out);
    if (wants(config, Method::bcp))
      append_bcp_records(config, split_index, seed, scale, derive_seed(seed, 2, 0), draws, part, grid, out);
    return out;
  } catch (const SplitError&) {
    throw;
  } catch (const std::exception& e) {
    throw SplitError(split_index, seed, e.what());
  }
}

namespace {

template <class SplitFn>
MetricsSummary run_experiment(const ExperimentConfig& config, const Dataset& data, SplitFn run_split) {
  config.validate();
  std::vector<std::vector<SplitRecord>> per_split(config.n_splits);
  std::vector<std::exception_ptr> errors(config.n_splits);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t s = next++; s < config.n_splits; s = next++) {
      try {
        per_split[s] = run_split(config, data, s);
      } catch (...) {
        errors[s] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(config.threads, config.n_splits));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  MetricsSummary out;
  out.config = config;
  for (auto& records : per_split) out.per_split.insert(out.per_split.end(), records.begin(), records.end());
  out.summary = summarize(out.per_split);
  return out;
}

Dataset load_for(const ExperimentConfig& config) {
  if (config.data_path.empty()) throw std::invalid_argument("no data path given");
  return load_csv(config.data_path, config.task);
}

}  // namespace

MetricsSummary run_regression_experiment(const ExperimentConfig& config, const Dataset& data) {
  if (data.task != TaskKind::regression || config.task != TaskKind::regression)
    throw std::invalid_argument("regression experiment needs a regression dataset");
  return run_experiment(config, data, run_regression_split);
}

MetricsSummary run_regression_experiment(const ExperimentConfig& config) {
  return run_regression_experiment(config, load_for(config));
}

MetricsSummary run_classification_experiment(const ExperimentConfig& config, const Dataset& data) {
  if (data.task != TaskKind::classification || config.task != TaskKind::classification)
    throw std::invalid_argument("classification experiment needs a classification dataset");
  return run_experiment(config, data, run_classification_split);
}

MetricsSummary run_classification_experiment(const ExperimentConfig& config) {
  return run_classification_experiment(config, load_for(config));
}

std::vector<MethodSummary> summarize(const std::vector<SplitRecord>& records) {
  using Key = std::tuple<int, double, double>;
  std::map<Key, std::vector<const SplitRecord*>> groups;
  for (const auto& r : records)
    groups[{static_cast<int>(r.method), r.prior_scale, r.beta.value_or(-1.0)}].push_back(&r);

  std::vector<MethodSummary> out;
  for (auto& [key, rows] : groups) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const SplitRecord* a, const SplitRecord* b) { return a->split_index < b->split_index; });
    MethodSummary s;
    s.method = rows.front()->method;
    s.prior_scale = rows.front()->prior_scale;
    s.beta = rows.front()->beta;
    s.n_splits = rows.size();
    const double n = static_cast<double>(rows.size());
    for (const auto* r : rows) {
      s.coverage_mean += r->coverage;
      s.size_mean += r->mean_size;
      s.pred_time_mean += r->pred_time;
      s.calib_time_mean += r->calib_time;
      if (r->fallback) ++s.fallback_count;
    }
    s.coverage_mean /= n;
    s.size_mean /= n;
    s.pred_time_mean /= n;
    s.calib_time_mean /= n;
    if (rows.size() > 1) {
      for (const auto* r : rows) {
        s.coverage_sd += (r->coverage - s.coverage_mean) * (r->coverage - s.coverage_mean);
        s.size_sd += (r->mean_size - s.size_mean) * (r->mean_size - s.size_mean);
      }
      s.coverage_sd = std::sqrt(s.coverage_sd / (n - 1));
      s.size_sd = std::sqrt(s.size_sd / (n - 1));
    }
    out.push_back(s);
  }
  return out;
}

std::vector<BetaScanRow> beta_table(const MetricsSummary& summary, double prior_scale) {
  std::vector<BetaScanRow> out;
  for (const auto& s : summary.summary) {
    if (s.method != Method::bcp || s.prior_scale != prior_scale || !s.beta) continue;
    BetaScanRow row;
    row.beta = *s.beta;
    row.coverage_mean = s.coverage_mean;
    row.coverage_sd = s.coverage_sd;
    row.width_mean = s.size_mean;
    row.width_sd = s.size_sd;
    row.miscoverage = 1.0 - s.coverage_mean;
    row.gap = summary.config.alpha - row.miscoverage;
    row.n_splits = s.n_splits;
    out.push_back(row);
  }
  std::sort(out.begin(), out.end(), [](const BetaScanRow& a, const BetaScanRow& b) { return a.beta < b.beta; });
  return out;
}

std::vector<BetaScanRow> beta_scan(const ExperimentConfig& config, const Dataset& data) {
  ExperimentConfig scan = config;
  scan.methods = {Method::bcp};
  if (scan.task != TaskKind::regression) throw std::invalid_argument("beta scan needs a regression config");
  const auto summary = run_regression_experiment(scan, data);
  return beta_table(summary, scan.prior_scales.front());
}

double posterior_avg_risk(const PosteriorDraws& draws, double lambda, const Matrix& eval_inputs,
                          std::size_t samples_per_draw, std::uint64_t seed, ScoreKind kind) {
  if (eval_inputs.rows() == 0) throw std::invalid_argument("no evaluation inputs");
  if (samples_per_draw == 0) throw std::invalid_argument("samples_per_draw must be at least 1");
  Rng rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, eval_inputs.rows() - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const Matrix eta = linear_predictors(draws, eval_inputs);  // T x n
  std::vector<double> loglik(draws.size());
  std::size_t misses = 0;
  std::size_t total = 0;
  for (std::size_t t = 0; t < draws.size(); ++t) {
    for (std::size_t m = 0; m < samples_per_draw; ++m) {
      const Eigen::Index i = pick(rng);
      const double e = eta(static_cast<Eigen::Index>(t), i);
      double y = 0.0;
      if (draws.model == ModelKind::sparse_linear)
        y = e + draws.noise_sd()[static_cast<Eigen::Index>(t)] * normal(rng);
      else
        y = uniform(rng) < std::exp(log_sigmoid(e)) ? 1.0 : 0.0;
      loglik_from_predictors(draws, {eta.col(i).data(), draws.size()}, y, loglik);
      const double s = score_from_loglik(loglik, kind, y, eta.col(i).mean());
      if (s > lambda) ++misses;
      ++total;
    }
  }
  return static_cast<double>(misses) / static_cast<double>(total);
}

double round_significant(double value, int digits) {
  if (value == 0.0 || !std::isfinite(value)) return value;
  const int magnitude = static_cast<int>(std::floor(std::log10(std::abs(value))));
  const double scale = std::pow(10.0, digits - 1 - magnitude);
  return std::round(value * scale) / scale;
}

ReportFormat report_format_from_string(std::string_view name) {
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  throw std::invalid_argument("unknown report format: " + std::string(name));
}

}  // namespace bcp

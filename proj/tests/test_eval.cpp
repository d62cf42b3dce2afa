#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "bcp/eval.hpp"
#include "helpers.hpp"

using namespace bcp;

namespace {

ExperimentConfig small_regression_config() {
  ExperimentConfig cfg;
  cfg.task = TaskKind::regression;
  cfg.n_splits = 3;
  cfg.mcmc = McmcConfig{.total_iters = 600, .burn_in = 200};
  cfg.dirichlet_draws = 300;
  cfg.grid_size = 40;
  cfg.betas = {0.6, 0.9};
  cfg.prior_scales = {1.0, 0.02};
  cfg.seed = 17;
  return cfg;
}

Dataset synthetic(std::size_t n, std::uint64_t seed) {
  Vector theta(3);
  theta << 1.0, -0.5, 0.25;
  return synthetic_regression(n, theta, 0.7, seed);
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("method and profile names round trip") {
  for (auto m : {Method::split_cp, Method::bci, Method::cb, Method::bcp, Method::msp})
    CHECK(method_from_string(to_string(m)) == m);
  CHECK(method_from_string("split-cp") == Method::split_cp);
  CHECK_THROWS(method_from_string("nope"));
  CHECK(profile_from_string("paper") == Profile::paper);
  ExperimentConfig cfg;
  cfg.apply_profile(Profile::paper);
  CHECK(cfg.n_splits == 50);
  CHECK(cfg.mcmc.total_iters == 8000);
  CHECK(cfg.mcmc.burn_in == 2000);
}

TEST_CASE("config validation") {
  ExperimentConfig cfg;
  cfg.methods.clear();
  CHECK_THROWS(cfg.validate());
  cfg = ExperimentConfig{};
  cfg.n_splits = 0;
  CHECK_THROWS(cfg.validate());
  cfg = ExperimentConfig{};
  cfg.alpha = 1.0;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("a split rerun in isolation reproduces its records") {
  const auto cfg = small_regression_config();
  const auto data = synthetic(120, 3);
  const auto summary = run_regression_experiment(cfg, data);
  const auto again = run_regression_split(cfg, data, 1);
  std::vector<SplitRecord> from_run;
  for (const auto& r : summary.per_split)
    if (r.split_index == 1) from_run.push_back(r);
  REQUIRE(from_run.size() == again.size());
  for (std::size_t i = 0; i < again.size(); ++i) {
    CHECK(from_run[i].method == again[i].method);
    CHECK(from_run[i].seed == again[i].seed);
    CHECK(from_run[i].coverage == again[i].coverage);
    CHECK(from_run[i].mean_size == again[i].mean_size);
    CHECK(from_run[i].lambda == again[i].lambda);
  }
  CHECK(again.front().seed == split_seed(cfg, 1));
}

TEST_CASE("threaded and serial runs agree and means are recomputable") {
  auto cfg = small_regression_config();
  const auto data = synthetic(120, 4);
  const auto serial = run_regression_experiment(cfg, data);
  cfg.threads = 3;
  const auto threaded = run_regression_experiment(cfg, data);
  CHECK(render_report(serial, ReportFormat::csv).size() > 0);
  REQUIRE(serial.per_split.size() == threaded.per_split.size());
  for (std::size_t i = 0; i < serial.per_split.size(); ++i)
    CHECK(serial.per_split[i].coverage == threaded.per_split[i].coverage);

  for (const auto& row : serial.summary) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& r : serial.per_split) {
      if (r.method != row.method || r.prior_scale != row.prior_scale || r.beta != row.beta) continue;
      sum += r.coverage;
      ++count;
    }
    CHECK(count == row.n_splits);
    CHECK(row.coverage_mean == doctest::Approx(sum / count).epsilon(1e-14));
    CHECK(row.coverage_mean >= 0.0);
    CHECK(row.coverage_mean <= 1.0);
    CHECK(row.coverage_sd >= 0.0);
    CHECK(row.size_sd >= 0.0);
  }
  CHECK(serial.find(Method::bcp, 1.0, 0.9).n_splits == 3);
  CHECK_THROWS(serial.find(Method::msp, 1.0));
}

TEST_CASE("hand-built toy split has coverage on the two-point lattice") {
  ExperimentConfig cfg = small_regression_config();
  cfg.n_splits = 1;
  cfg.ratios = {0.5, 0.25, 0.25};
  cfg.prior_scales = {1.0};
  const auto data = synthetic(8, 5);
  const auto records = run_regression_split(cfg, data, 0);
  REQUIRE_FALSE(records.empty());
  for (const auto& r : records) {
    CHECK(r.n_test == 2);
    const bool lattice = r.coverage == 0.0 || r.coverage == 0.5 || r.coverage == 1.0;
    CHECK(lattice);
  }
}

TEST_CASE("degenerate risk budget in classification") {
  ExperimentConfig cfg;
  cfg.task = TaskKind::classification;
  cfg.data_path = BCP_DATA_DIR "/breast_cancer.csv";
  cfg.methods = {Method::split_cp, Method::cb, Method::bcp};
  cfg.n_splits = 1;
  cfg.alpha = 0.99;
  cfg.mcmc = McmcConfig{.total_iters = 400, .burn_in = 100};
  cfg.dirichlet_draws = 300;
  const auto summary = run_classification_experiment(cfg);
  for (const auto& row : summary.summary) {
    CHECK(row.coverage_mean < 0.1);
    CHECK(row.size_mean < 0.1);
  }
}

TEST_CASE("beta table") {
  const auto cfg = small_regression_config();
  const auto summary = run_regression_experiment(cfg, synthetic(120, 6));
  const auto rows = beta_table(summary, 1.0);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].beta == 0.6);
  CHECK(rows[1].beta == 0.9);
  for (const auto& r : rows) {
    CHECK(r.miscoverage == doctest::Approx(1.0 - r.coverage_mean));
    CHECK(r.gap == doctest::Approx(cfg.alpha - r.miscoverage));
  }
  // Under common random numbers a larger beta never lowers lambda*, so coverage cannot grow.
  CHECK(rows[1].coverage_mean <= rows[0].coverage_mean);
  CHECK(rows[1].width_mean <= rows[0].width_mean);
  const auto csv = render_beta_table(rows, ReportFormat::csv, cfg.alpha);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("posterior-averaged risk") {
  const auto draws = make_linear_draws(Matrix::Zero(1, 1), Vector::Zero(1), Vector::Ones(1));
  const Matrix inputs = Matrix::Zero(5, 1);
  CHECK(posterior_avg_risk(draws, std::numeric_limits<double>::infinity(), inputs, 1000, 1) == 0.0);
  CHECK(posterior_avg_risk(draws, -1e6, inputs, 1000, 1) == 1.0);

  boost::math::normal n01;
  const double z = boost::math::quantile(n01, 0.9);
  const double lambda = -std::log(boost::math::pdf(n01, z));
  const std::size_t m = 200000;
  const double risk = posterior_avg_risk(draws, lambda, inputs, m, 7);
  const double se = std::sqrt(0.2 * 0.8 / m);
  CHECK(std::abs(risk - 0.2) < 3 * se);
}

TEST_CASE("reports are deterministic and shaped") {
  const auto cfg = small_regression_config();
  auto summary = run_regression_experiment(cfg, synthetic(120, 8));
  const auto dir = std::filesystem::temp_directory_path() / "bcp_test_eval";
  std::filesystem::remove_all(dir);
  emit_report(summary, ReportFormat::json, dir / "a" / "r.json");
  emit_report(summary, ReportFormat::json, dir / "b" / "r.json");
  CHECK(read_file(dir / "a" / "r.json") == read_file(dir / "b" / "r.json"));

  const auto csv = render_report(summary, ReportFormat::csv);
  CHECK(csv.rfind("method,prior_scale,beta,coverage_mean", 0) == 0);
  const auto lines = std::count(csv.begin(), csv.end(), '\n');
  CHECK(static_cast<std::size_t>(lines) == summary.summary.size() + 1);
  // split_cp, bci, cb once per c; bcp once per (c, beta)
  CHECK(summary.summary.size() == 2 * 3 + 2 * 2);

  const auto json = render_report(summary, ReportFormat::json);
  for (const char* key : {"\"config\"", "\"per_split\"", "\"summary\"", "\"versions\"", "\"seeds\""})
    CHECK(json.find(key) != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("significant-digit rounding") {
  CHECK(round_significant(0.812345, 4) == 0.8123);
  CHECK(round_significant(1.91678, 3) == 1.92);
  CHECK(round_significant(0.0, 3) == 0.0);
  CHECK(report_format_from_string("csv") == ReportFormat::csv);
  CHECK_THROWS(report_format_from_string("xml"));
}

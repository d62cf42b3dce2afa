#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <limits>

#include "bcp/serialization.hpp"
#include "helpers.hpp"

using namespace bcp;

namespace {

std::filesystem::path scratch(const char* name) {
  const auto dir = std::filesystem::temp_directory_path() / "bcp_test_serialization";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("split and standardizer round trip") {
  const auto split = make_split(20, SplitRatios{}, 9);
  const auto back = split_from_json(json::parse(to_json(split).dump()));
  CHECK(back.train_idx == split.train_idx);
  CHECK(back.cal_idx == split.cal_idx);
  CHECK(back.test_idx == split.test_idx);
  CHECK(back.seed == split.seed);

  Standardizer s;
  s.means = Vector::LinSpaced(3, -1.0, 1.0);
  s.sds = Vector::Constant(3, 0.1234567890123);
  s.includes_label = true;
  const auto t = standardizer_from_json(json::parse(to_json(s).dump()));
  CHECK(t.means == s.means);
  CHECK(t.sds == s.sds);
  CHECK(t.includes_label);
}

TEST_CASE("config round trip and overlay") {
  ExperimentConfig cfg;
  cfg.data_path = "x.csv";
  cfg.task = TaskKind::classification;
  cfg.methods = {Method::bci, Method::msp};
  cfg.betas = {0.6, 0.9};
  cfg.prior_scales = {1.0, 0.02};
  cfg.seed = 1234567890123ULL;
  cfg.hpd = true;
  cfg.mcmc.total_iters = 3000;
  const auto back = config_from_json(json::parse(to_json(cfg).dump()));
  CHECK(back.data_path == cfg.data_path);
  CHECK(back.task == cfg.task);
  CHECK(back.methods == cfg.methods);
  CHECK(back.betas == cfg.betas);
  CHECK(back.prior_scales == cfg.prior_scales);
  CHECK(back.seed == cfg.seed);
  CHECK(back.hpd);
  CHECK(back.mcmc.total_iters == 3000);
  CHECK(to_json(back) == to_json(cfg));

  const auto overlaid = config_from_json(json{{"alpha", 0.1}}, cfg);
  CHECK(overlaid.alpha == 0.1);
  CHECK(overlaid.methods == cfg.methods);
  CHECK_THROWS(config_from_json(json{{"alhpa", 0.1}}));

  const auto paper = config_from_json(json{{"profile", "paper"}, {"splits", 5}});
  CHECK(paper.n_splits == 5);
  CHECK(paper.mcmc.total_iters == 8000);
}

TEST_CASE("config files") {
  const auto path = scratch("cfg.json");
  std::ofstream(path) << R"({"alpha": 0.3, "betas": [0.7]})";
  const auto cfg = load_config(path);
  CHECK(cfg.alpha == 0.3);
  CHECK(cfg.betas == std::vector<double>{0.7});
  std::ofstream(path) << "{ not json";
  CHECK_THROWS(load_config(path));
  CHECK_THROWS(load_config(scratch("missing.json")));
}

TEST_CASE("infinite thresholds are written as strings") {
  Threshold t;
  t.lambda = std::numeric_limits<double>::infinity();
  t.feasible = false;
  const auto j = to_json(t);
  CHECK(j.at("lambda") == "inf");
  CHECK(j.at("feasible") == false);
  CHECK(j.dump().find("null") == std::string::npos);
}

TEST_CASE("draws round trip bit-exactly") {
  Rng rng(3);
  const Matrix w = bcp::testing::random_normal(5, 2, rng);
  const Vector b = bcp::testing::random_normal(5, 1, rng).col(0);
  const Vector sd = b.array().abs() + 0.1;
  const auto draws = make_linear_draws(w, b, sd);
  const auto path = scratch("draws.csv");
  save_draws(draws, path);
  const auto back = load_draws(path);
  CHECK(back.draws == draws.draws);
  CHECK(back.param_names == draws.param_names);
  CHECK(back.model == draws.model);
  CHECK(back.n_features == draws.n_features);
}

TEST_CASE("scores round trip bit-exactly") {
  Rng rng(4);
  ScoreMatrix s;
  s.cal_scores = bcp::testing::random_normal(6, 1, rng).col(0);
  s.test_scores = bcp::testing::random_normal(3, 4, rng);
  s.candidate_grid = {-1.0, 0.0, 1.0 / 3.0, 2.0};
  s.score_kind = ScoreKind::mean_neglog;
  const auto path = scratch("scores.csv");
  save_scores(s, path);
  const auto back = load_scores(path);
  CHECK(back.cal_scores == s.cal_scores);
  CHECK(back.test_scores == s.test_scores);
  CHECK(back.candidate_grid == s.candidate_grid);
  CHECK(back.score_kind == s.score_kind);
}

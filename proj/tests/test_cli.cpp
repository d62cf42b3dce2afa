#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

using namespace bcp;
using namespace bcp::cli;

namespace {

const std::string kDiabetes = BCP_DATA_DIR "/diabetes.csv";

std::filesystem::path scratch() {
  const auto dir = std::filesystem::temp_directory_path() / "bcp_test_cli";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string without_timings(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::string line, kept;
  while (std::getline(in, line))
    if (line.find("_time") == std::string::npos) kept += line + '\n';
  return kept;
}

std::vector<std::string> quick(std::vector<std::string> args) {
  for (const char* a : {"--splits", "1", "--iters", "300", "--burnin", "100", "--grid-size", "30"})
    args.emplace_back(a);
  return args;
}

}  // namespace

TEST_CASE("regress flags parse into a config") {
  const auto r = parse_args({"regress", "--data", "diabetes.csv", "--alpha", "0.2", "--c", "0.02", "--profile", "desk"});
  REQUIRE(r.config);
  CHECK(r.exit_code == 0);
  const auto& cfg = *r.config;
  CHECK(cfg.subcommand == Subcommand::regress);
  CHECK(cfg.experiment.data_path == "diabetes.csv");
  CHECK(cfg.experiment.alpha == 0.2);
  CHECK(cfg.experiment.prior_scales == std::vector<double>{0.02});
  CHECK(cfg.experiment.profile == Profile::desk);
  CHECK(cfg.experiment.n_splits == 10);
  CHECK(cfg.experiment.task == TaskKind::regression);
}

TEST_CASE("usage errors exit with 2") {
  auto r = parse_args(std::vector<std::string>{});
  CHECK_FALSE(r.config);
  CHECK(r.exit_code == 2);
  CHECK(r.message.find("regress") != std::string::npos);
  r = parse_args({"regress", "--bogus"});
  CHECK(r.exit_code == 2);
  r = parse_args({"regress", "classify"});
  CHECK(r.exit_code == 2);
  r = parse_args({"regress", "--config", "/nonexistent/cfg.json"});
  CHECK(r.exit_code == 2);
  r = parse_args({"--help"});
  CHECK_FALSE(r.config);
  CHECK(r.exit_code == 0);
}

TEST_CASE("beta list parsing") {
  auto r = parse_args({"beta-scan", "--betas", "0.6,0.65,0.7,0.8,0.9"});
  REQUIRE(r.config);
  CHECK(r.config->experiment.betas == std::vector<double>{0.6, 0.65, 0.7, 0.8, 0.9});
  r = parse_args({"regress", "--beta", "0.7", "--c", "1.0,0.02", "--methods", "bcp,bci"});
  REQUIRE(r.config);
  CHECK(r.config->experiment.betas == std::vector<double>{0.7});
  CHECK(r.config->experiment.prior_scales == std::vector<double>{1.0, 0.02});
  CHECK(r.config->experiment.methods == std::vector<Method>{Method::bcp, Method::bci});
}

TEST_CASE("flags override config file values") {
  const auto path = scratch() / "cfg.json";
  std::ofstream(path) << R"({"alpha": 0.3, "splits": 7, "seed": 5})";
  const auto r = parse_args({"regress", "--config", path.string(), "--alpha", "0.1"});
  REQUIRE(r.config);
  CHECK(r.config->experiment.alpha == 0.1);
  CHECK(r.config->experiment.n_splits == 7);
  CHECK(r.config->experiment.seed == 5);
  const auto paper = parse_args({"regress", "--config", path.string(), "--profile", "paper"});
  REQUIRE(paper.config);
  // --profile is a flag too, so its split count beats the file's.
  CHECK(paper.config->experiment.n_splits == 50);
  CHECK(paper.config->experiment.mcmc.total_iters == 8000);
  CHECK(paper.config->experiment.seed == 5);
}

TEST_CASE("selftest exits 0") {
  const auto r = parse_args({"selftest"});
  REQUIRE(r.config);
  std::ostringstream out, err;
  CHECK(run(*r.config, out, err) == 0);
  CHECK(out.str().find("FAIL") == std::string::npos);
}

TEST_CASE("missing data file is a runtime failure naming the path") {
  const auto r = parse_args({"regress", "--data", "/nonexistent/diabetes.csv", "--out", (scratch() / "x.json").string()});
  REQUIRE(r.config);
  std::ostringstream out, err;
  CHECK(run(*r.config, out, err) == 1);
  CHECK(err.str().find("/nonexistent/diabetes.csv") != std::string::npos);
}

TEST_CASE("running without a dataset is a usage error") {
  const auto r = parse_args({"regress", "--alpha", "0.1"});
  REQUIRE(r.config);
  std::ostringstream out, err;
  CHECK(run(*r.config, out, err) == 2);
  CHECK(err.str().find("--data") != std::string::npos);
}

TEST_CASE("compare writes one report with every requested method") {
  const auto path = scratch() / "compare.csv";
  const auto r = parse_args(quick({"compare", "--data", kDiabetes, "--methods", "split_cp,bci,cb,bcp", "--format",
                                   "csv", "--out", path.string()}));
  REQUIRE(r.config);
  std::ostringstream out, err;
  REQUIRE(run(*r.config, out, err) == 0);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  for (const char* m : {"\nsplit_cp,", "\nbci,", "\ncb,", "\nbcp,"}) CHECK(ss.str().find(m) != std::string::npos);
}

TEST_CASE("identical invocations give identical reports apart from timings") {
  const auto a = scratch() / "a.json";
  const auto b = scratch() / "b.json";
  std::ostringstream out, err;
  for (const auto& p : {a, b}) {
    const auto r = parse_args(quick({"regress", "--data", kDiabetes, "--seed", "11", "--out", p.string()}));
    REQUIRE(r.config);
    REQUIRE(run(*r.config, out, err) == 0);
  }
  CHECK(without_timings(a) == without_timings(b));
  CHECK(without_timings(a).size() > 100);
}

TEST_CASE("BCP_OUT picks the output directory") {
  const auto dir = scratch() / "env";
  std::filesystem::remove_all(dir);
  ::setenv("BCP_OUT", dir.string().c_str(), 1);
  const auto r = parse_args(quick({"regress", "--data", kDiabetes, "--methods", "split_cp", "--format", "csv"}));
  ::unsetenv("BCP_OUT");
  REQUIRE(r.config);
  std::ostringstream out, err;
  REQUIRE(run(*r.config, out, err) == 0);
  CHECK(std::filesystem::exists(dir / "regress.csv"));
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "bcp/datasets.hpp"

using namespace bcp;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST_CASE("vendored data sets have the published shapes") {
  const auto diabetes = load_csv(BCP_DATA_DIR "/diabetes.csv", TaskKind::regression);
  CHECK(diabetes.rows() == 442);
  CHECK(diabetes.cols() == 10);
  const auto cancer = load_csv(BCP_DATA_DIR "/breast_cancer.csv", TaskKind::classification);
  CHECK(cancer.rows() == 569);
  CHECK(cancer.cols() == 30);
  for (Eigen::Index i = 0; i < cancer.labels.size(); ++i)
    CHECK((cancer.labels[i] == 0.0 || cancer.labels[i] == 1.0));
}

TEST_CASE("load_csv rejects malformed input") {
  const auto bad = write_temp("bcp_bad.csv", "a,b,y\n1,2,3\n4,x,6\n7,8,9\n");
  try {
    load_csv(bad, TaskKind::regression);
    FAIL("expected an error");
  } catch (const std::exception& e) {
    const std::string what = e.what();
    CHECK(what.find("bcp_bad.csv") != std::string::npos);
    CHECK(what.find("line 3") != std::string::npos);
  }
  CHECK_THROWS(load_csv("/nonexistent/file.csv", TaskKind::regression));
  const auto labels = write_temp("bcp_labels.csv", "a,y\n1,0\n2,1\n3,2\n");
  CHECK_THROWS(load_csv(labels, TaskKind::classification));
  CHECK_NOTHROW(load_csv(labels, TaskKind::regression));
}

TEST_CASE("make_split sizes follow floor rounding") {
  auto s = make_split(442, SplitRatios{}, 0);
  CHECK(s.train_idx.size() == 232);
  CHECK(s.cal_idx.size() == 77);
  CHECK(s.test_idx.size() == 133);
  s = make_split(10, SplitRatios{0.5, 0.2, 0.3}, 7);
  CHECK(s.train_idx.size() == 5);
  CHECK(s.cal_idx.size() == 2);
  CHECK(s.test_idx.size() == 3);
  const auto again = make_split(10, SplitRatios{0.5, 0.2, 0.3}, 7);
  CHECK(again.train_idx == s.train_idx);
  CHECK(again.cal_idx == s.cal_idx);
  CHECK(again.test_idx == s.test_idx);
  CHECK_THROWS(make_split(2, SplitRatios{}, 0));
  CHECK_THROWS(make_split(100, SplitRatios{0.5, 0.5, 0.5}, 0));
}

TEST_CASE("make_split partitions the index set (property sweep)") {
  Rng rng(99);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 10 + rng() % 500;
    std::uniform_real_distribution<double> u(0.1, 1.0);
    double a = u(rng), b = u(rng), c = u(rng);
    const double sum = a + b + c;
    const SplitRatios r{a / sum, b / sum, 1.0 - a / sum - b / sum};
    SplitSpec s;
    try {
      s = make_split(n, r, rng());
    } catch (const std::invalid_argument&) {
      continue;  // too small for a non-empty part
    }
    std::vector<std::size_t> all;
    for (const auto* part : {&s.train_idx, &s.cal_idx, &s.test_idx}) {
      REQUIRE_FALSE(part->empty());
      all.insert(all.end(), part->begin(), part->end());
    }
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expected(n);
    std::iota(expected.begin(), expected.end(), std::size_t{0});
    REQUIRE(all == expected);
  }
}

TEST_CASE("standardization uses training rows and population sd") {
  Dataset d;
  d.features.resize(4, 1);
  d.features << 1, 3, 2, 100;
  d.labels.resize(4);
  d.labels << 0, 2, 1, 7;
  d.feature_names = {"x"};
  const std::vector<std::size_t> train{0, 1};
  const auto st = fit_standardizer(d, train);
  CHECK(st.includes_label);
  const auto z = apply_standardizer(st, d);
  // Divide-by-n sd of {1, 3} is 1, so the two points map to -1 and +1.
  CHECK(z.features(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(z.features(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(z.features(2, 0)) < 1e-12);  // row equal to the training mean
  CHECK(std::abs(z.labels[2]) < 1e-12);
}

TEST_CASE("standardized training columns have mean 0 and sd 1") {
  const auto data = load_csv(BCP_DATA_DIR "/diabetes.csv", TaskKind::regression);
  const auto split = make_split(data.rows(), SplitRatios{}, 3);
  const auto z = apply_standardizer(fit_standardizer(data, split.train_idx), data).subset(split.train_idx);
  for (Eigen::Index j = 0; j < z.features.cols(); ++j) {
    const double mean = z.features.col(j).mean();
    const double sd = std::sqrt((z.features.col(j).array() - mean).square().mean());
    CHECK(std::abs(mean) < 1e-10);
    CHECK(std::abs(sd - 1.0) < 1e-10);
  }
  CHECK(std::abs(z.labels.mean()) < 1e-10);
}

TEST_CASE("constant training column is rejected by name") {
  Dataset d;
  d.features.resize(3, 2);
  d.features << 5, 1, 5, 2, 5, 3;
  d.labels = Vector::LinSpaced(3, 0, 1);
  d.feature_names = {"flat", "ok"};
  const std::vector<std::size_t> train{0, 1, 2};
  try {
    fit_standardizer(d, train);
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("flat") != std::string::npos);
  }
}

TEST_CASE("calibration statistics differ from the stored standardizer") {
  const auto data = load_csv(BCP_DATA_DIR "/diabetes.csv", TaskKind::regression);
  const auto split = make_split(data.rows(), SplitRatios{}, 11);
  const auto from_train = fit_standardizer(data, split.train_idx);
  const auto from_cal = fit_standardizer(data, split.cal_idx);
  CHECK((from_train.means - from_cal.means).cwiseAbs().maxCoeff() > 0);
}

TEST_CASE("label_grid endpoints and spacing") {
  const std::vector<double> labels{3.0, 0.0, 10.0, 5.0};
  const auto g = label_grid(labels, 100);
  REQUIRE(g.size() == 100);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 10.0);
  double worst = 0;
  for (std::size_t i = 1; i < g.size(); ++i) worst = std::max(worst, std::abs(g[i] - g[i - 1] - 10.0 / 99));
  CHECK(worst < 1e-12);
  const std::vector<double> sym{-1.0, 1.0};
  const auto three = label_grid(sym, 3);
  CHECK(three == std::vector<double>{-1.0, 0.0, 1.0});
  CHECK_THROWS(label_grid(sym, 1));
  const std::vector<double> flat{2.0, 2.0};
  CHECK_THROWS(label_grid(flat, 10));
}

TEST_CASE("synthetic regression") {
  Vector theta(3);
  theta << 0.5, -1.0, 2.0;
  const auto quiet = synthetic_regression(200, theta, 1e-8, 1);
  CHECK((quiet.labels - quiet.features * theta).cwiseAbs().maxCoeff() < 1e-6);

  Vector two(2);
  two << 1.0, 0.0;
  const auto big = synthetic_regression(10000, two, 1.0, 2);
  const Vector ols = big.features.colPivHouseholderQr().solve(big.labels);
  CHECK(std::abs(ols[0] - 1.0) < 0.05);
  CHECK(std::abs(ols[1]) < 0.05);

  const auto again = synthetic_regression(10000, two, 1.0, 2);
  CHECK(again.features == big.features);
  CHECK(again.labels == big.labels);
  CHECK_THROWS(synthetic_regression(10, two, 0.0, 1));
}

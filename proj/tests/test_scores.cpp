#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "bcp/scores.hpp"
#include "helpers.hpp"

using namespace bcp;

TEST_CASE("aoi weights") {
  const std::vector<double> flat{2, 2, 2, 2};
  const auto w = aoi_weights(flat).weights;
  for (Eigen::Index t = 0; t < 4; ++t) CHECK(w[t] == 0.25);
  const std::vector<double> pair{1, 3};
  const auto w2 = aoi_weights(pair).weights;
  CHECK(w2[0] == 0.25);
  CHECK(w2[1] == 0.75);
  const std::vector<double> zero{0, 0};
  CHECK_THROWS(aoi_weights(zero));
  CHECK_THROWS(aoi_predictive(zero));
}

TEST_CASE("aoi and mean predictive reference values") {
  const std::vector<double> pair{1, 3};
  CHECK(aoi_predictive(pair) == doctest::Approx(2.5).epsilon(1e-15));
  const std::vector<double> constant(7, 0.37);
  CHECK(aoi_predictive(constant) == doctest::Approx(0.37).epsilon(1e-15));
  CHECK(mean_predictive(constant) == doctest::Approx(0.37).epsilon(1e-15));
  const std::vector<double> p{0.2, 0.8};
  CHECK(aoi_predictive(p) == doctest::Approx(0.68).epsilon(1e-15));
  CHECK(mean_predictive(p) == doctest::Approx(0.5).epsilon(1e-15));
  const std::vector<double> empty;
  CHECK_THROWS(mean_predictive(empty));
}

TEST_CASE("neglog score") {
  CHECK(neglog_score(1.0) == 0.0);
  CHECK(neglog_score(std::exp(-1.0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(neglog_score(1e-300) == doctest::Approx(690.7755278982137).epsilon(1e-13));
  CHECK(neglog_score(0.0) == doctest::Approx(690.7755278982137).epsilon(1e-13));
}

TEST_CASE("aoi properties on random likelihood vectors") {
  Rng rng(21);
  std::lognormal_distribution<double> dist(0.0, 1.5);
  std::uniform_real_distribution<double> scale(-8, 8);
  for (int rep = 0; rep < 500; ++rep) {
    std::vector<double> f(1 + rng() % 40);
    for (auto& v : f) v = dist(rng);
    REQUIRE(aoi_predictive(f) >= mean_predictive(f) * (1 - 1e-14));
    const double c = std::exp(scale(rng));
    std::vector<double> cf(f);
    for (auto& v : cf) v *= c;
    const auto w = aoi_weights(f).weights;
    const auto wc = aoi_weights(cf).weights;
    REQUIRE((w - wc).cwiseAbs().maxCoeff() < 1e-14);
    REQUIRE(std::abs(w.sum() - 1.0) < 1e-12);
    REQUIRE(aoi_predictive(cf) == doctest::Approx(c * aoi_predictive(f)).epsilon(1e-12));

    std::vector<double> logs(f.size());
    for (std::size_t t = 0; t < f.size(); ++t) logs[t] = std::log(f[t]);
    REQUIRE(log_aoi_predictive(logs) == doctest::Approx(std::log(aoi_predictive(f))).epsilon(1e-12));
    REQUIRE(log_mean_predictive(logs) == doctest::Approx(std::log(mean_predictive(f))).epsilon(1e-12));
    REQUIRE((aoi_weights_from_log(logs).weights - w).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("log-space scores survive extreme likelihoods") {
  const std::vector<double> logs{-2000.0, -2001.0, -5000.0};
  const double s = score_from_loglik(logs, ScoreKind::aoi_neglog);
  CHECK(std::isfinite(s));
  CHECK(s <= -kLogDensityFloor);
  const std::vector<double> shifted{-1.0, -2.0, -4.0};
  // Shifting every log-likelihood by a constant shifts the score by the same amount (capped at the floor).
  const std::vector<double> big{-11.0, -12.0, -14.0};
  CHECK(score_from_loglik(big, ScoreKind::aoi_neglog) - score_from_loglik(shifted, ScoreKind::aoi_neglog) ==
        doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("calibration scores against hand arithmetic") {
  // Two draws: N(0, 1) and N(1, 2^2) at y = 0.5 with intercept-only models.
  Matrix w = Matrix::Zero(2, 1);
  Vector b(2);
  b << 0.0, 1.0;
  Vector tau(2);
  tau << 1.0, 2.0;
  const auto draws = make_linear_draws(w, b, tau);
  Matrix x = Matrix::Zero(3, 1);
  Vector y(3);
  y << 0.5, 0.5, -1.0;
  auto normal_pdf = [](double v, double m, double s) {
    return std::exp(-0.5 * (v - m) * (v - m) / (s * s)) / (s * std::sqrt(2 * std::numbers::pi));
  };
  const double f1 = normal_pdf(0.5, 0, 1), f2 = normal_pdf(0.5, 1, 2);
  const Vector aoi = compute_cal_scores(draws, x, y, ScoreKind::aoi_neglog);
  CHECK(aoi[0] == doctest::Approx(-std::log((f1 * f1 + f2 * f2) / (f1 + f2))).epsilon(1e-12));
  CHECK(aoi[0] == aoi[1]);
  const Vector mean = compute_cal_scores(draws, x, y, ScoreKind::mean_neglog);
  CHECK(mean[0] == doctest::Approx(-std::log(0.5 * (f1 + f2))).epsilon(1e-12));
  const Vector resid = compute_cal_scores(draws, x, y, ScoreKind::residual);
  CHECK(resid[2] == doctest::Approx(1.5));
}

TEST_CASE("single draw: aoi score equals mean score") {
  Rng rng(2);
  const Matrix w = bcp::testing::random_normal(1, 3, rng);
  Vector b(1), tau(1);
  b << 0.2;
  tau << 0.8;
  const auto draws = make_linear_draws(w, b, tau);
  const Matrix x = bcp::testing::random_normal(20, 3, rng);
  const Vector y = bcp::testing::random_normal(20, 1, rng).col(0);
  CHECK(compute_cal_scores(draws, x, y, ScoreKind::aoi_neglog) ==
        compute_cal_scores(draws, x, y, ScoreKind::mean_neglog));
}

TEST_CASE("test score matrix shape and mode") {
  // Draws share the mean 0.3 but differ in spread: the predictive has a single mode at 0.3.
  const Matrix w = Matrix::Zero(4, 1);
  const Vector b = Vector::Constant(4, 0.3);
  Vector tau(4);
  tau << 0.5, 1.0, 1.5, 3.0;
  const auto draws = make_linear_draws(w, b, tau);
  std::vector<double> grid(100);
  for (int k = 0; k < 100; ++k) grid[static_cast<std::size_t>(k)] = -3.0 + 6.0 * k / 99.0;
  const Matrix x = Matrix::Zero(2, 1);
  const auto scores = compute_test_scores(draws, x, grid, ScoreKind::aoi_neglog);
  CHECK(scores.test_scores.rows() == 2);
  CHECK(scores.test_scores.cols() == 100);
  Eigen::Index argmin = 0;
  scores.test_scores.row(0).minCoeff(&argmin);
  std::size_t nearest = 0;
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (std::abs(grid[k] - 0.3) < std::abs(grid[nearest] - 0.3)) nearest = k;
  CHECK(static_cast<std::size_t>(argmin) == nearest);

  const auto logit = make_logistic_draws(Matrix::Zero(3, 1), Vector::Zero(3));
  const auto cls = compute_test_scores(logit, x, binary_label_grid(), ScoreKind::aoi_neglog);
  CHECK(cls.test_scores.cols() == 2);
  CHECK(cls.test_scores(0, 0) == doctest::Approx(std::log(2.0)));
  CHECK_THROWS(compute_test_scores(logit, x, binary_label_grid(), ScoreKind::residual));
}

TEST_CASE("scores are finite across the grid even far from the data") {
  Rng rng(8);
  const Matrix w = bcp::testing::random_normal(50, 2, rng);
  const Vector b = bcp::testing::random_normal(50, 1, rng).col(0);
  const Vector tau = Vector::Constant(50, 0.01);
  const auto draws = make_linear_draws(w, b, tau);
  const std::vector<double> grid{-1e4, 0.0, 1e4};
  const auto s = compute_test_scores(draws, bcp::testing::random_normal(5, 2, rng), grid, ScoreKind::aoi_neglog);
  CHECK(s.test_scores.allFinite());
  CHECK(s.test_scores.maxCoeff() <= -kLogDensityFloor);
}

TEST_CASE("score kind strings round-trip") {
  for (auto k : {ScoreKind::aoi_neglog, ScoreKind::mean_neglog, ScoreKind::residual})
    CHECK(score_kind_from_string(to_string(k)) == k);
  CHECK_THROWS(score_kind_from_string("nope"));
}

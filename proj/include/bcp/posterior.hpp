#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bcp/common.hpp"
#include "bcp/datasets.hpp"

namespace bcp {

enum class ModelKind { sparse_linear, logistic };

std::string_view to_string(ModelKind kind);

enum class WeightPrior {
  /// Laplace(0, b) weights, b ~ Gamma(shape, rate), tau ~ HalfNormal(c).
  laplace_hierarchical,
  /// Normal(0, fixed_weight_sd^2) weights with tau held at fixed_noise_sd.
  /// Conjugate in (weights, intercept); used to check the sampler.
  gaussian_fixed_noise,
};

struct PriorConfigRegression {
  double c = 1.0;  // half-normal scale of the noise sd tau
  double b_shape = 1.0;
  double b_rate = 1.0;
  WeightPrior weight_prior = WeightPrior::laplace_hierarchical;
  double fixed_weight_sd = 1.0;
  double fixed_noise_sd = 1.0;

  void validate() const;
};

struct PriorConfigLogistic {
  double weight_sd = 1.0;  // applies to the intercept as well

  void validate() const;
};

struct McmcConfig {
  std::size_t total_iters = 8000;
  std::size_t burn_in = 2000;
  std::size_t thin = 1;
  double initial_step = 0.1;
  std::size_t adapt_window = 50;
  double target_acceptance = 0.44;
  std::uint64_t seed = 0;
  /// Keep the per-iteration step sizes in PosteriorDraws::step_trace.
  bool record_steps = false;

  void validate() const;
  std::size_t kept() const { return (total_iters - burn_in + thin - 1) / thin; }
};

/// Kept MCMC draws, one row per draw.
///
/// Column layout:
///   sparse_linear: w_1..w_d, intercept, b, tau   (b and tau on natural scale)
///   logistic:      w_1..w_d, intercept
struct PosteriorDraws {
  Matrix draws;
  std::vector<std::string> param_names;
  ModelKind model = ModelKind::sparse_linear;
  std::size_t n_features = 0;
  double acceptance_rate = 0.0;
  McmcConfig config;
  Vector step_sizes;  // proposal scales in use after burn-in
  Matrix step_trace;  // total_iters x p, only when config.record_steps

  std::size_t size() const { return static_cast<std::size_t>(draws.rows()); }
  auto weights() const { return draws.leftCols(static_cast<Eigen::Index>(n_features)); }
  auto intercepts() const { return draws.col(static_cast<Eigen::Index>(n_features)); }
  /// Noise sd per draw; sparse_linear only.
  auto noise_sd() const { return draws.col(static_cast<Eigen::Index>(n_features) + 2); }

  void validate() const;
};

PosteriorDraws make_linear_draws(const Matrix& weights, const Vector& intercepts,
                                 const Vector& noise_sd);
PosteriorDraws make_logistic_draws(const Matrix& weights, const Vector& intercepts);

/// Sparse Bayesian linear regression via component-wise adaptive random-walk
/// Metropolis. `features` may have zero rows (prior-only sampling).
PosteriorDraws sample_blr(const Matrix& features, const Vector& labels,
                          const PriorConfigRegression& prior, const McmcConfig& mcmc);
PosteriorDraws sample_blr(const Dataset& train, const PriorConfigRegression& prior,
                          const McmcConfig& mcmc);

/// Bayesian logistic regression, same sampler.
PosteriorDraws sample_blogistic(const Matrix& features, const Vector& labels,
                                const PriorConfigLogistic& prior, const McmcConfig& mcmc);
PosteriorDraws sample_blogistic(const Dataset& train, const PriorConfigLogistic& prior,
                                const McmcConfig& mcmc);

/// log f_theta(y | x) for every kept draw, floored at kLogDensityFloor.
Vector loglik_per_draw(const PosteriorDraws& draws, std::span<const double> x, double y);
Vector loglik_per_draw(const PosteriorDraws& draws, const Vector& x, double y);

/// Linear predictors, shape T x n: column i holds w_t . x_i + intercept_t.
Matrix linear_predictors(const PosteriorDraws& draws, const Matrix& features);

/// Log-likelihood of label `y` from a column of linear predictors.
void loglik_from_predictors(const PosteriorDraws& draws, std::span<const double> eta, double y,
                            std::span<double> out);

/// y ~ N(eta_t, tau_t^2), `m_per_draw` samples per draw (draw-major order).
Vector predictive_samples(const PosteriorDraws& draws, const Vector& x, std::size_t m_per_draw,
                          std::uint64_t seed);

/// Posterior predictive P(y = 1 | x) averaged over draws; logistic only.
double predictive_prob_one(const PosteriorDraws& draws, const Vector& x);

double log_sigmoid(double eta);

}  // namespace bcp

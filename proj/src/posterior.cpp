#include "bcp/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bcp {

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::sparse_linear ? "sparse_linear" : "logistic";
}

void PriorConfigRegression::validate() const {
  if (!(c > 0)) throw std::invalid_argument("prior scale c must be positive");
  if (!(b_shape > 0 && b_rate > 0)) throw std::invalid_argument("Gamma hyperprior must be positive");
  if (weight_prior == WeightPrior::gaussian_fixed_noise && !(fixed_weight_sd > 0 && fixed_noise_sd > 0))
    throw std::invalid_argument("fixed prior scales must be positive");
}

void PriorConfigLogistic::validate() const {
  if (!(weight_sd > 0)) throw std::invalid_argument("weight_sd must be positive");
}

void McmcConfig::validate() const {
  if (burn_in >= total_iters) throw std::invalid_argument("burn_in must be smaller than total_iters");
  if (!(initial_step > 0)) throw std::invalid_argument("initial_step must be positive");
  if (thin == 0) throw std::invalid_argument("thin must be at least 1");
  if (adapt_window == 0) throw std::invalid_argument("adapt_window must be at least 1");
  if (!(target_acceptance > 0 && target_acceptance < 1))
    throw std::invalid_argument("target_acceptance must lie in (0,1)");
}

void PosteriorDraws::validate() const {
  const std::size_t expected = n_features + (model == ModelKind::sparse_linear ? 3 : 1);
  if (static_cast<std::size_t>(draws.cols()) != expected)
    throw std::invalid_argument("draw matrix has wrong column count");
  if (draws.rows() == 0) throw std::invalid_argument("no posterior draws");
  if (draws.hasNaN()) throw std::invalid_argument("NaN in posterior draws");
  if (model == ModelKind::sparse_linear && (noise_sd().array() <= 0.0).any())
    throw std::invalid_argument("noise sd draws must be positive");
}

namespace {

std::vector<std::string> linear_names(std::size_t d) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < d; ++j) names.push_back("w" + std::to_string(j + 1));
  names.emplace_back("intercept");
  names.emplace_back("b");
  names.emplace_back("tau");
  return names;
}

std::vector<std::string> logistic_names(std::size_t d) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < d; ++j) names.push_back("w" + std::to_string(j + 1));
  names.emplace_back("intercept");
  return names;
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// Sparse linear model in unconstrained coordinates (w, intercept, log b, log tau).
class LinearTarget {
 public:
  LinearTarget(const Matrix& x, const Vector& y, const PriorConfigRegression& prior)
      : x_(x), y_(y), prior_(prior), d_(static_cast<std::size_t>(x.cols())),
        n_(static_cast<double>(x.rows())) {
    fixed_ = prior.weight_prior == WeightPrior::gaussian_fixed_noise;
    values_ = Vector::Zero(static_cast<Eigen::Index>(d_ + (fixed_ ? 1 : 3)));
    if (fixed_) {
      log_b_ = std::log(prior.fixed_weight_sd);
      log_tau_ = std::log(prior.fixed_noise_sd);
    }
    col_sq_ = x_.colwise().squaredNorm().transpose();
    residual_ = y_;
    ssr_ = residual_.squaredNorm();
    sum_abs_ = 0.0;
    sum_sq_ = 0.0;
  }

  std::size_t dim() const { return static_cast<std::size_t>(values_.size()); }
  double value(std::size_t j) const { return values_[static_cast<Eigen::Index>(j)]; }

  double log_posterior() const {
    const double tau = std::exp(log_tau_);
    double lp = -n_ * log_tau_ - ssr_ / (2 * tau * tau);
    lp += weight_log_prior(log_b_, sum_abs_, sum_sq_);
    if (!fixed_) lp += hyper_log_prior(log_b_) + tau_log_prior(log_tau_);
    return lp;
  }

  double log_ratio(std::size_t j, double proposal) {
    proposal_ = proposal;
    const double tau2 = std::exp(2 * log_tau_);
    if (j <= d_) {
      const double delta = proposal - value(j);
      const double xr = j < d_ ? x_.col(static_cast<Eigen::Index>(j)).dot(residual_) : residual_.sum();
      const double xx = j < d_ ? col_sq_[static_cast<Eigen::Index>(j)] : n_;
      const double new_ssr = ssr_ - 2 * delta * xr + delta * delta * xx;
      double diff = -(new_ssr - ssr_) / (2 * tau2);
      if (j < d_) {
        const double old = value(j);
        diff += weight_log_prior(log_b_, sum_abs_ - std::abs(old) + std::abs(proposal),
                                 sum_sq_ - old * old + proposal * proposal) -
                weight_log_prior(log_b_, sum_abs_, sum_sq_);
      }
      return diff;
    }
    if (j == d_ + 1) {
      return weight_log_prior(proposal, sum_abs_, sum_sq_) + hyper_log_prior(proposal) -
             weight_log_prior(log_b_, sum_abs_, sum_sq_) - hyper_log_prior(log_b_);
    }
    const double old_tau2 = tau2;
    const double new_tau2 = std::exp(2 * proposal);
    return -n_ * (proposal - log_tau_) - ssr_ / (2 * new_tau2) + ssr_ / (2 * old_tau2) +
           tau_log_prior(proposal) - tau_log_prior(log_tau_);
  }

  void commit(std::size_t j) {
    const double old = value(j);
    values_[static_cast<Eigen::Index>(j)] = proposal_;
    if (j < d_) {
      residual_ -= (proposal_ - old) * x_.col(static_cast<Eigen::Index>(j));
      ssr_ = residual_.squaredNorm();
      sum_abs_ += std::abs(proposal_) - std::abs(old);
      sum_sq_ += proposal_ * proposal_ - old * old;
    } else if (j == d_) {
      residual_.array() -= proposal_ - old;
      ssr_ = residual_.squaredNorm();
    } else if (j == d_ + 1) {
      log_b_ = proposal_;
    } else {
      log_tau_ = proposal_;
    }
  }

  void write(Eigen::Ref<RowVector, 0, Eigen::InnerStride<>> row) const {
    for (std::size_t j = 0; j <= d_; ++j) row[static_cast<Eigen::Index>(j)] = value(j);
    row[static_cast<Eigen::Index>(d_ + 1)] = std::exp(log_b_);
    row[static_cast<Eigen::Index>(d_ + 2)] = std::exp(log_tau_);
  }

  std::size_t output_dim() const { return d_ + 3; }

 private:
  double weight_log_prior(double log_b, double sum_abs, double sum_sq) const {
    const double d = static_cast<double>(d_);
    if (fixed_) {
      const double s = prior_.fixed_weight_sd;
      return -sum_sq / (2 * s * s);
    }
    return -d * (std::numbers::ln2 + log_b) - sum_abs * std::exp(-log_b);
  }
  // Gamma(shape, rate) on b plus the log-scale Jacobian.
  double hyper_log_prior(double log_b) const {
    return prior_.b_shape * log_b - prior_.b_rate * std::exp(log_b);
  }
  // HalfNormal(c) on tau plus the log-scale Jacobian.
  double tau_log_prior(double log_tau) const {
    const double tau = std::exp(log_tau);
    return -tau * tau / (2 * prior_.c * prior_.c) + log_tau;
  }

  const Matrix& x_;
  const Vector& y_;
  PriorConfigRegression prior_;
  std::size_t d_;
  double n_;
  bool fixed_ = false;
  Vector values_;
  double log_b_ = 0.0;
  double log_tau_ = 0.0;
  Vector col_sq_;
  Vector residual_;
  double ssr_ = 0.0;
  double sum_abs_ = 0.0;
  double sum_sq_ = 0.0;
  double proposal_ = 0.0;
};

class LogisticTarget {
 public:
  LogisticTarget(const Matrix& x, const Vector& y, const PriorConfigLogistic& prior)
      : x_(x), y_(y), prior_(prior), d_(static_cast<std::size_t>(x.cols())) {
    values_ = Vector::Zero(static_cast<Eigen::Index>(d_ + 1));
    eta_ = Vector::Zero(x.rows());
    proposed_eta_ = eta_;
    loglik_ = loglik(eta_);
  }

  std::size_t dim() const { return d_ + 1; }
  std::size_t output_dim() const { return d_ + 1; }
  double value(std::size_t j) const { return values_[static_cast<Eigen::Index>(j)]; }

  double log_posterior() const {
    return loglik_ - values_.squaredNorm() / (2 * prior_.weight_sd * prior_.weight_sd);
  }

  double log_ratio(std::size_t j, double proposal) {
    proposal_ = proposal;
    const double delta = proposal - value(j);
    if (j < d_)
      proposed_eta_ = eta_ + delta * x_.col(static_cast<Eigen::Index>(j));
    else
      proposed_eta_ = eta_.array() + delta;
    proposed_loglik_ = loglik(proposed_eta_);
    const double s2 = prior_.weight_sd * prior_.weight_sd;
    return proposed_loglik_ - loglik_ - (proposal * proposal - value(j) * value(j)) / (2 * s2);
  }

  void commit(std::size_t j) {
    values_[static_cast<Eigen::Index>(j)] = proposal_;
    eta_.swap(proposed_eta_);
    loglik_ = proposed_loglik_;
  }

  void write(Eigen::Ref<RowVector, 0, Eigen::InnerStride<>> row) const { row = values_.transpose(); }

 private:
  double loglik(const Vector& eta) const {
    double total = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) total += y_[i] * eta[i] - softplus(eta[i]);
    return total;
  }

  const Matrix& x_;
  const Vector& y_;
  PriorConfigLogistic prior_;
  std::size_t d_;
  Vector values_;
  Vector eta_;
  Vector proposed_eta_;
  double loglik_ = 0.0;
  double proposed_loglik_ = 0.0;
  double proposal_ = 0.0;
};

struct ChainResult {
  Matrix draws;
  double acceptance_rate = 0.0;
  Vector steps;
  Matrix step_trace;
};

constexpr double kMinLogStep = -13.815510557964274;  // log(1e-6)
constexpr double kMaxLogStep = 6.907755278982137;    // log(1e3)

// Component-wise random-walk Metropolis. Step sizes adapt toward the target
// acceptance rate in batches during burn-in and stay fixed afterwards.
template <class Target>
ChainResult run_chain(Target& target, const McmcConfig& config) {
  if (!std::isfinite(target.log_posterior()))
    throw std::runtime_error("non-finite log posterior at initialization");

  const std::size_t p = target.dim();
  Rng rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  std::vector<double> log_step(p, std::log(config.initial_step));
  std::vector<std::size_t> batch_accepts(p, 0);
  std::size_t batch = 0;
  std::size_t post_accepts = 0;
  std::size_t post_proposals = 0;

  ChainResult out;
  out.draws.resize(static_cast<Eigen::Index>(config.kept()), static_cast<Eigen::Index>(target.output_dim()));
  if (config.record_steps)
    out.step_trace.resize(static_cast<Eigen::Index>(config.total_iters), static_cast<Eigen::Index>(p));

  std::vector<double> step(p);
  for (std::size_t j = 0; j < p; ++j) step[j] = std::exp(log_step[j]);

  Eigen::Index kept = 0;
  for (std::size_t iter = 0; iter < config.total_iters; ++iter) {
    const bool sampling = iter >= config.burn_in;
    for (std::size_t j = 0; j < p; ++j) {
      const double proposal = target.value(j) + step[j] * normal(rng);
      const double ratio = target.log_ratio(j, proposal);
      const bool accept = std::isfinite(ratio) && std::log(uniform(rng)) < ratio;
      if (accept) {
        target.commit(j);
        ++batch_accepts[j];
      }
      if (sampling) {
        ++post_proposals;
        if (accept) ++post_accepts;
      }
    }
    if (config.record_steps)
      for (std::size_t j = 0; j < p; ++j)
        out.step_trace(static_cast<Eigen::Index>(iter), static_cast<Eigen::Index>(j)) = step[j];

    if (!sampling && (iter + 1) % config.adapt_window == 0) {
      ++batch;
      const double delta = std::min(1.0, 1.0 / std::sqrt(static_cast<double>(batch)));
      for (std::size_t j = 0; j < p; ++j) {
        const double rate = static_cast<double>(batch_accepts[j]) / static_cast<double>(config.adapt_window);
        log_step[j] += rate > config.target_acceptance ? delta : -delta;
        log_step[j] = std::clamp(log_step[j], kMinLogStep, kMaxLogStep);
        step[j] = std::exp(log_step[j]);
        batch_accepts[j] = 0;
      }
    }
    if (sampling && (iter - config.burn_in) % config.thin == 0) {
      target.write(out.draws.row(kept));
      ++kept;
    }
  }
  out.acceptance_rate =
      post_proposals == 0 ? 0.0 : static_cast<double>(post_accepts) / static_cast<double>(post_proposals);
  out.steps = Eigen::Map<const Vector>(step.data(), static_cast<Eigen::Index>(p));
  return out;
}

}  // namespace

PosteriorDraws make_linear_draws(const Matrix& weights, const Vector& intercepts, const Vector& noise_sd) {
  if (weights.rows() != intercepts.size() || weights.rows() != noise_sd.size())
    throw std::invalid_argument("draw component lengths differ");
  PosteriorDraws out;
  out.model = ModelKind::sparse_linear;
  out.n_features = static_cast<std::size_t>(weights.cols());
  out.draws.resize(weights.rows(), weights.cols() + 3);
  out.draws.leftCols(weights.cols()) = weights;
  out.draws.col(weights.cols()) = intercepts;
  out.draws.col(weights.cols() + 1).setOnes();
  out.draws.col(weights.cols() + 2) = noise_sd;
  out.param_names = linear_names(out.n_features);
  out.acceptance_rate = 1.0;
  out.validate();
  return out;
}

PosteriorDraws make_logistic_draws(const Matrix& weights, const Vector& intercepts) {
  if (weights.rows() != intercepts.size()) throw std::invalid_argument("draw component lengths differ");
  PosteriorDraws out;
  out.model = ModelKind::logistic;
  out.n_features = static_cast<std::size_t>(weights.cols());
  out.draws.resize(weights.rows(), weights.cols() + 1);
  out.draws.leftCols(weights.cols()) = weights;
  out.draws.col(weights.cols()) = intercepts;
  out.param_names = logistic_names(out.n_features);
  out.acceptance_rate = 1.0;
  out.validate();
  return out;
}

PosteriorDraws sample_blr(const Matrix& features, const Vector& labels, const PriorConfigRegression& prior,
                          const McmcConfig& mcmc) {
  prior.validate();
  mcmc.validate();
  if (features.rows() != labels.size()) throw std::invalid_argument("feature rows and label count differ");
  LinearTarget target(features, labels, prior);
  auto chain = run_chain(target, mcmc);

  PosteriorDraws out;
  out.model = ModelKind::sparse_linear;
  out.n_features = static_cast<std::size_t>(features.cols());
  out.draws = std::move(chain.draws);
  out.param_names = linear_names(out.n_features);
  out.acceptance_rate = chain.acceptance_rate;
  out.config = mcmc;
  out.step_sizes = std::move(chain.steps);
  out.step_trace = std::move(chain.step_trace);
  out.validate();
  return out;
}

PosteriorDraws sample_blr(const Dataset& train, const PriorConfigRegression& prior, const McmcConfig& mcmc) {
  return sample_blr(train.features, train.labels, prior, mcmc);
}

PosteriorDraws sample_blogistic(const Matrix& features, const Vector& labels, const PriorConfigLogistic& prior,
                                const McmcConfig& mcmc) {
  prior.validate();
  mcmc.validate();
  if (features.rows() != labels.size()) throw std::invalid_argument("feature rows and label count differ");
  for (Eigen::Index i = 0; i < labels.size(); ++i)
    if (labels[i] != 0.0 && labels[i] != 1.0) throw std::invalid_argument("logistic labels must be 0 or 1");
  LogisticTarget target(features, labels, prior);
  auto chain = run_chain(target, mcmc);

  PosteriorDraws out;
  out.model = ModelKind::logistic;
  out.n_features = static_cast<std::size_t>(features.cols());
  out.draws = std::move(chain.draws);
  out.param_names = logistic_names(out.n_features);
  out.acceptance_rate = chain.acceptance_rate;
  out.config = mcmc;
  out.step_sizes = std::move(chain.steps);
  out.step_trace = std::move(chain.step_trace);
  out.validate();
  return out;
}

PosteriorDraws sample_blogistic(const Dataset& train, const PriorConfigLogistic& prior, const McmcConfig& mcmc) {
  return sample_blogistic(train.features, train.labels, prior, mcmc);
}

double log_sigmoid(double eta) { return -softplus(-eta); }

Matrix linear_predictors(const PosteriorDraws& draws, const Matrix& features) {
  if (static_cast<std::size_t>(features.cols()) != draws.n_features)
    throw std::invalid_argument("feature dimension does not match the model");
  Matrix eta = draws.weights() * features.transpose();
  eta.colwise() += draws.intercepts();
  return eta;
}

void loglik_from_predictors(const PosteriorDraws& draws, std::span<const double> eta, double y,
                            std::span<double> out) {
  const std::size_t t_count = draws.size();
  if (eta.size() != t_count || out.size() != t_count) throw std::invalid_argument("draw count mismatch");
  if (draws.model == ModelKind::sparse_linear) {
    constexpr double half_log_2pi = 0.91893853320467274;
    const auto tau = draws.noise_sd();
    for (std::size_t t = 0; t < t_count; ++t) {
      const double sd = tau[static_cast<Eigen::Index>(t)];
      const double z = (y - eta[t]) / sd;
      out[t] = std::max(-half_log_2pi - std::log(sd) - 0.5 * z * z, kLogDensityFloor);
    }
  } else {
    const bool one = y == 1.0;
    if (!one && y != 0.0) throw std::invalid_argument("logistic label must be 0 or 1");
    for (std::size_t t = 0; t < t_count; ++t)
      out[t] = std::max(one ? log_sigmoid(eta[t]) : log_sigmoid(-eta[t]), kLogDensityFloor);
  }
}

Vector loglik_per_draw(const PosteriorDraws& draws, std::span<const double> x, double y) {
  if (x.size() != draws.n_features) throw std::invalid_argument("feature dimension does not match the model");
  Eigen::Map<const Vector> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  Vector eta = draws.weights() * xv + draws.intercepts();
  Vector out(eta.size());
  loglik_from_predictors(draws, {eta.data(), static_cast<std::size_t>(eta.size())}, y,
                         {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

Vector loglik_per_draw(const PosteriorDraws& draws, const Vector& x, double y) {
  return loglik_per_draw(draws, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())), y);
}

Vector predictive_samples(const PosteriorDraws& draws, const Vector& x, std::size_t m_per_draw,
                          std::uint64_t seed) {
  if (draws.model != ModelKind::sparse_linear)
    throw std::invalid_argument("predictive_samples requires a regression model");
  if (static_cast<std::size_t>(x.size()) != draws.n_features)
    throw std::invalid_argument("feature dimension does not match the model");
  if (m_per_draw == 0) throw std::invalid_argument("m_per_draw must be at least 1");
  Vector eta = draws.weights() * x + draws.intercepts();
  const auto tau = draws.noise_sd();
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector out(eta.size() * static_cast<Eigen::Index>(m_per_draw));
  Eigen::Index k = 0;
  for (Eigen::Index t = 0; t < eta.size(); ++t)
    for (std::size_t m = 0; m < m_per_draw; ++m) out[k++] = eta[t] + tau[t] * normal(rng);
  return out;
}

double predictive_prob_one(const PosteriorDraws& draws, const Vector& x) {
  if (draws.model != ModelKind::logistic) throw std::invalid_argument("predictive_prob_one requires a logistic model");
  if (static_cast<std::size_t>(x.size()) != draws.n_features)
    throw std::invalid_argument("feature dimension does not match the model");
  Vector eta = draws.weights() * x + draws.intercepts();
  double total = 0.0;
  for (Eigen::Index t = 0; t < eta.size(); ++t) total += std::exp(log_sigmoid(eta[t]));
  return total / static_cast<double>(eta.size());
}

}  // namespace bcp

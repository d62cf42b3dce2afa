#include "bcp/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace bcp {

namespace {
double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

double empirical_quantile(const std::vector<double>& sorted, double q) {
  // Linear interpolation between order statistics (type 7).
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}
}  // namespace

double lasso_objective(const LassoModel& model, const Matrix& features, const Vector& labels) {
  const Vector r = labels - features * model.coefficients - Vector::Constant(labels.size(), model.intercept);
  return r.squaredNorm() / (2.0 * static_cast<double>(labels.size())) + model.penalty * model.coefficients.lpNorm<1>();
}

LassoModel lasso_fit(const Matrix& features, const Vector& labels, double penalty, std::size_t max_iters,
                     double tol) {
  if (!(penalty >= 0)) throw std::invalid_argument("lasso penalty must be non-negative");
  if (features.rows() != labels.size() || labels.size() == 0)
    throw std::invalid_argument("feature rows and label count differ");
  const double n = static_cast<double>(labels.size());
  const Eigen::Index d = features.cols();

  LassoModel model;
  model.penalty = penalty;
  model.coefficients = Vector::Zero(d);
  model.intercept = labels.mean();
  const Vector col_sq = features.colwise().squaredNorm().transpose() / n;
  Vector residual = labels.array() - model.intercept;

  for (std::size_t sweep = 0; sweep < max_iters; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (col_sq[j] == 0.0) continue;
      const double old = model.coefficients[j];
      const double rho = features.col(j).dot(residual) / n + col_sq[j] * old;
      const double updated = soft_threshold(rho, penalty) / col_sq[j];
      if (updated != old) {
        residual -= (updated - old) * features.col(j);
        model.coefficients[j] = updated;
        max_change = std::max(max_change, std::abs(updated - old));
      }
    }
    const double shift = residual.mean();
    if (shift != 0.0) {
      model.intercept += shift;
      residual.array() -= shift;
      max_change = std::max(max_change, std::abs(shift));
    }
    model.sweeps = sweep + 1;
    model.objective_trace.push_back(residual.squaredNorm() / (2.0 * n) + penalty * model.coefficients.lpNorm<1>());
    if (max_change < tol) {
      model.converged = true;
      break;
    }
  }
  return model;
}

Threshold residual_threshold(const LassoModel& model, const Matrix& cal_features, const Vector& cal_labels,
                             double alpha) {
  if (cal_features.rows() != cal_labels.size()) throw std::invalid_argument("feature rows and label count differ");
  const Vector fitted = cal_features * model.coefficients;
  std::vector<double> scores(static_cast<std::size_t>(cal_labels.size()));
  for (Eigen::Index i = 0; i < cal_labels.size(); ++i)
    scores[static_cast<std::size_t>(i)] = std::abs(cal_labels[i] - fitted[i] - model.intercept);
  return split_threshold(scores, alpha);
}

PredictionSet residual_interval(const LassoModel& model, const Vector& x, const Threshold& threshold) {
  PredictionSet out;
  out.kind = PredictionSet::Kind::interval;
  const double center = model.predict(x);
  out.lower = center - threshold.lambda;
  out.upper = center + threshold.lambda;
  out.size = out.upper - out.lower;
  return out;
}

PredictionSet split_cp_residual(const LassoModel& model, const Matrix& cal_features, const Vector& cal_labels,
                                const Vector& x, double alpha) {
  return residual_interval(model, x, residual_threshold(model, cal_features, cal_labels, alpha));
}

std::pair<double, double> shortest_interval(std::span<const double> sorted_samples, double alpha) {
  const std::size_t n = sorted_samples.size();
  if (n == 0) throw std::invalid_argument("no samples");
  const auto cover = std::min<std::size_t>(
      n, std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((1.0 - alpha) * static_cast<double>(n)))));
  std::size_t best = 0;
  double width = kInf;
  for (std::size_t i = 0; i + cover <= n; ++i) {
    const double w = sorted_samples[i + cover - 1] - sorted_samples[i];
    if (w < width) {
      width = w;
      best = i;
    }
  }
  return {sorted_samples[best], sorted_samples[best + cover - 1]};
}

PredictionSet bci_regression_interval(const PosteriorDraws& draws, const Vector& x, double alpha,
                                      std::size_t m_per_draw, std::uint64_t seed, bool hpd) {
  if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("alpha must lie in (0,1)");
  const Vector samples = predictive_samples(draws, x, m_per_draw, seed);
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  PredictionSet out;
  out.kind = PredictionSet::Kind::interval;
  if (hpd) {
    std::tie(out.lower, out.upper) = shortest_interval(sorted, alpha);
  } else {
    out.lower = empirical_quantile(sorted, alpha / 2);
    out.upper = empirical_quantile(sorted, 1 - alpha / 2);
  }
  out.size = out.upper - out.lower;
  return out;
}

PredictionSet bci_classification_set(double p1, double alpha) {
  if (!(p1 >= 0.0 && p1 <= 1.0)) throw std::invalid_argument("p1 must lie in [0,1]");
  PredictionSet out;
  out.kind = PredictionSet::Kind::label_subset;
  const std::size_t first = p1 >= 0.5 ? 1 : 0;
  const double first_mass = first == 1 ? p1 : 1.0 - p1;
  out.members.push_back(first);
  if (first_mass < 1.0 - alpha) out.members.push_back(1 - first);
  std::sort(out.members.begin(), out.members.end());
  out.size = static_cast<double>(out.members.size());
  return out;
}

std::vector<RankedLabel> msp_rank(std::span<const double> class_means) {
  std::vector<RankedLabel> out;
  for (std::size_t k = 0; k < class_means.size(); ++k) {
    if (!std::isfinite(class_means[k])) throw std::invalid_argument("non-finite class probability");
    out.push_back({k, class_means[k]});
  }
  std::stable_sort(out.begin(), out.end(), [](const RankedLabel& a, const RankedLabel& b) { return a.score > b.score; });
  return out;
}

}  // namespace bcp

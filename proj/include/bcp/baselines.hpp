#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "bcp/common.hpp"
#include "bcp/conformal.hpp"
#include "bcp/posterior.hpp"

namespace bcp {

struct LassoModel {
  Vector coefficients;
  double intercept = 0.0;
  double penalty = 0.0;
  bool converged = false;
  std::size_t sweeps = 0;
  std::vector<double> objective_trace;  // objective after each sweep

  double predict(const Vector& x) const { return intercept + coefficients.dot(x); }
};

/// Cyclic coordinate descent on (1/2n)||y - X w - w0||^2 + penalty ||w||_1.
/// Stops when the largest coefficient change in a sweep is below `tol`.
LassoModel lasso_fit(const Matrix& features, const Vector& labels, double penalty, std::size_t max_iters = 10000,
                     double tol = 1e-8);

double lasso_objective(const LassoModel& model, const Matrix& features, const Vector& labels);

/// Split-CP threshold on absolute residuals |y - yhat(x)|.
Threshold residual_threshold(const LassoModel& model, const Matrix& cal_features, const Vector& cal_labels,
                             double alpha);
PredictionSet residual_interval(const LassoModel& model, const Vector& x, const Threshold& threshold);
PredictionSet split_cp_residual(const LassoModel& model, const Matrix& cal_features, const Vector& cal_labels,
                                const Vector& x, double alpha);

/// Equal-tailed (alpha/2, 1-alpha/2) interval of posterior predictive samples,
/// or the shortest window holding 1-alpha of them when `hpd` is set.
PredictionSet bci_regression_interval(const PosteriorDraws& draws, const Vector& x, double alpha,
                                      std::size_t m_per_draw, std::uint64_t seed, bool hpd = false);

/// Shortest window covering ceil((1-alpha) n) of the sorted samples.
std::pair<double, double> shortest_interval(std::span<const double> sorted_samples, double alpha);

/// Labels in order of decreasing probability until the mass reaches 1-alpha.
/// At p1 = 0.5 label 1 goes first.
PredictionSet bci_classification_set(double p1, double alpha);

struct RankedLabel {
  std::size_t label = 0;
  double score = 0.0;
};

/// Labels sorted by predictive mean, descending; ties keep label order.
std::vector<RankedLabel> msp_rank(std::span<const double> class_means);

}  // namespace bcp

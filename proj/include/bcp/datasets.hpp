#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bcp/common.hpp"

namespace bcp {

/// Tabular data set: one row per sample, label held separately.
struct Dataset {
  Matrix features;  // n x d
  Vector labels;    // n
  std::vector<std::string> feature_names;
  std::string label_name = "label";
  TaskKind task = TaskKind::regression;

  std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(features.cols()); }

  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;

  Dataset subset(std::span<const std::size_t> idx) const;
};

struct SplitRatios {
  double train = 0.525;
  double cal = 0.175;
  double test = 0.30;
};

struct SplitSpec {
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> cal_idx;
  std::vector<std::size_t> test_idx;
  std::uint64_t seed = 0;
};

/// Per-column affine transform fitted on training rows. When `includes_label`
/// is set the last entry of means/sds applies to the label.
struct Standardizer {
  Vector means;
  Vector sds;
  bool includes_label = false;
};

/// Reads a comma-separated file with a header row; the last column is the label.
Dataset load_csv(const std::filesystem::path& path, TaskKind task);

/// Shuffles 0..n-1 once with `seed`, then cuts floor(train*n), floor(cal*n) and
/// the remainder.
SplitSpec make_split(std::size_t n, SplitRatios ratios, std::uint64_t seed);

/// Population (divide-by-n) moments of the training rows. Regression labels
/// are standardized too.
Standardizer fit_standardizer(const Dataset& data, std::span<const std::size_t> train_idx);
Dataset apply_standardizer(const Standardizer& standardizer, const Dataset& data);

/// `grid_size` evenly spaced points from min to max of the training labels.
std::vector<double> label_grid(std::span<const double> train_labels, std::size_t grid_size);

/// Y = X theta + eps with standard-normal X and eps ~ N(0, noise_sd^2).
Dataset synthetic_regression(std::size_t n, const Vector& true_theta, double noise_sd,
                             std::uint64_t seed);

}  // namespace bcp

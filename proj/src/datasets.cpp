#include "bcp/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace bcp {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

double parse_cell(std::string_view cell, std::size_t line_no, std::size_t col) {
  double value = 0.0;
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
    std::ostringstream msg;
    msg << "non-numeric cell '" << cell << "' at line " << line_no << ", column " << col + 1;
    throw std::invalid_argument(msg.str());
  }
  return value;
}

}  // namespace

void Dataset::validate() const {
  if (features.rows() != labels.size())
    throw std::invalid_argument("feature rows and label count differ");
  if (rows() < 3) throw std::invalid_argument("dataset needs at least 3 rows");
  if (!feature_names.empty() && feature_names.size() != cols())
    throw std::invalid_argument("feature_names length does not match column count");
  if (!features.allFinite()) throw std::invalid_argument("non-finite feature entry");
  if (!labels.allFinite()) throw std::invalid_argument("non-finite label");
  if (task == TaskKind::classification) {
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
      if (labels[i] != 0.0 && labels[i] != 1.0)
        throw std::invalid_argument("classification label outside {0,1} at row " +
                                    std::to_string(i));
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> idx) const {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(idx.size()), features.cols());
  out.labels.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= rows()) throw std::out_of_range("subset index out of range");
    out.features.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(idx[r]));
    out.labels[static_cast<Eigen::Index>(r)] = labels[static_cast<Eigen::Index>(idx[r])];
  }
  out.feature_names = feature_names;
  out.label_name = label_name;
  out.task = task;
  return out;
}

namespace {

Dataset parse_csv(std::istream& in, TaskKind task) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty data file");
  auto header = split_fields(line);
  if (header.size() < 2) throw std::invalid_argument("need at least one feature and a label column");
  const std::size_t d = header.size() - 1;

  std::vector<double> cells;
  std::size_t n = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw std::invalid_argument("line " + std::to_string(line_no) + " has " +
                                  std::to_string(fields.size()) + " fields, expected " +
                                  std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) cells.push_back(parse_cell(fields[c], line_no, c));
    ++n;
  }

  Dataset data;
  data.task = task;
  data.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  data.labels.resize(static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c)
      data.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cells[r * (d + 1) + c];
    data.labels[static_cast<Eigen::Index>(r)] = cells[r * (d + 1) + d];
  }
  for (std::size_t c = 0; c < d; ++c) data.feature_names.emplace_back(header[c]);
  data.label_name = std::string(header[d]);
  data.validate();
  return data;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, TaskKind task) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open data file: " + path.string());
  try {
    return parse_csv(in, task);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

SplitSpec make_split(std::size_t n, SplitRatios ratios, std::uint64_t seed) {
  if (!(ratios.train > 0 && ratios.cal > 0 && ratios.test > 0))
    throw std::invalid_argument("split ratios must be positive");
  if (std::abs(ratios.train + ratios.cal + ratios.test - 1.0) > 1e-9)
    throw std::invalid_argument("split ratios must sum to 1");

  const auto n_train = static_cast<std::size_t>(std::floor(ratios.train * static_cast<double>(n)));
  const auto n_cal = static_cast<std::size_t>(std::floor(ratios.cal * static_cast<double>(n)));
  if (n_train == 0 || n_cal == 0 || n_train + n_cal >= n)
    throw std::invalid_argument("n=" + std::to_string(n) + " too small for a three-way split");

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  SplitSpec out;
  out.seed = seed;
  out.train_idx.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.cal_idx.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                     perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_cal));
  out.test_idx.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_cal), perm.end());
  return out;
}

Standardizer fit_standardizer(const Dataset& data, std::span<const std::size_t> train_idx) {
  if (train_idx.size() < 2) throw std::invalid_argument("standardizer needs at least 2 training rows");
  const bool with_label = data.task == TaskKind::regression;
  const Eigen::Index d = data.features.cols();
  const Eigen::Index width = d + (with_label ? 1 : 0);

  Vector sum = Vector::Zero(width);
  Vector sum_sq = Vector::Zero(width);
  for (auto r : train_idx) {
    const auto row = static_cast<Eigen::Index>(r);
    for (Eigen::Index c = 0; c < width; ++c) {
      const double v = c < d ? data.features(row, c) : data.labels[row];
      sum[c] += v;
    }
  }
  const double n = static_cast<double>(train_idx.size());
  Standardizer out;
  out.includes_label = with_label;
  out.means = sum / n;
  for (auto r : train_idx) {
    const auto row = static_cast<Eigen::Index>(r);
    for (Eigen::Index c = 0; c < width; ++c) {
      const double v = (c < d ? data.features(row, c) : data.labels[row]) - out.means[c];
      sum_sq[c] += v * v;
    }
  }
  out.sds = (sum_sq / n).cwiseSqrt();
  for (Eigen::Index c = 0; c < width; ++c) {
    if (!(out.sds[c] > 0.0)) {
      std::string name = c < d ? (static_cast<std::size_t>(c) < data.feature_names.size()
                                      ? data.feature_names[static_cast<std::size_t>(c)]
                                      : "column " + std::to_string(c))
                               : data.label_name;
      throw std::invalid_argument("constant training column: " + name);
    }
  }
  return out;
}

Dataset apply_standardizer(const Standardizer& standardizer, const Dataset& data) {
  const Eigen::Index d = data.features.cols();
  if (standardizer.means.size() != d + (standardizer.includes_label ? 1 : 0))
    throw std::invalid_argument("standardizer width does not match dataset");
  Dataset out = data;
  for (Eigen::Index c = 0; c < d; ++c)
    out.features.col(c) = (data.features.col(c).array() - standardizer.means[c]) / standardizer.sds[c];
  if (standardizer.includes_label)
    out.labels = (data.labels.array() - standardizer.means[d]) / standardizer.sds[d];
  return out;
}

std::vector<double> label_grid(std::span<const double> train_labels, std::size_t grid_size) {
  if (grid_size < 2) throw std::invalid_argument("label grid needs at least 2 points");
  if (train_labels.empty()) throw std::invalid_argument("no training labels");
  auto [lo_it, hi_it] = std::minmax_element(train_labels.begin(), train_labels.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) throw std::invalid_argument("degenerate label range");
  std::vector<double> grid(grid_size);
  const double step = (hi - lo) / static_cast<double>(grid_size - 1);
  for (std::size_t k = 0; k < grid_size; ++k) grid[k] = lo + step * static_cast<double>(k);
  grid.back() = hi;
  return grid;
}

Dataset synthetic_regression(std::size_t n, const Vector& true_theta, double noise_sd,
                             std::uint64_t seed) {
  if (!(noise_sd > 0.0)) throw std::invalid_argument("noise_sd must be positive");
  if (true_theta.size() == 0) throw std::invalid_argument("true_theta must be non-empty");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset out;
  out.task = TaskKind::regression;
  out.features.resize(static_cast<Eigen::Index>(n), true_theta.size());
  out.labels.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    for (Eigen::Index j = 0; j < true_theta.size(); ++j) out.features(i, j) = normal(rng);
    out.labels[i] = out.features.row(i).dot(true_theta) + noise_sd * normal(rng);
  }
  for (Eigen::Index j = 0; j < true_theta.size(); ++j) out.feature_names.push_back("x" + std::to_string(j));
  out.label_name = "y";
  return out;
}

}  // namespace bcp

#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace bcp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

enum class TaskKind { regression, classification };

std::string_view to_string(TaskKind kind);
TaskKind task_kind_from_string(std::string_view name);

/// Smallest likelihood value used before taking logs.
inline constexpr double kDensityFloor = 1e-300;
/// log(kDensityFloor)
inline constexpr double kLogDensityFloor = -690.77552789821368;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

using Rng = std::mt19937_64;

/// Deterministic stream derivation (splitmix64 finalizer over master ^ stream).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_a, std::uint64_t stream_b);

}  // namespace bcp

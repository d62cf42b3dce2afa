#include "bcp/common.hpp"

namespace bcp {

std::string_view to_string(TaskKind kind) {
  return kind == TaskKind::regression ? "regression" : "classification";
}

TaskKind task_kind_from_string(std::string_view name) {
  if (name == "regression" || name == "regress") return TaskKind::regression;
  if (name == "classification" || name == "classify") return TaskKind::classification;
  throw std::invalid_argument("unknown task kind: " + std::string(name));
}

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}
}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ (stream * 0xD1B54A32D192ED03ULL + 1));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_a, std::uint64_t stream_b) {
  return derive_seed(derive_seed(master, stream_a), stream_b);
}

}  // namespace bcp

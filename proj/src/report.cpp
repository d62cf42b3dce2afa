#include <cstdio>
#include <fstream>
#include <sstream>

#include "bcp/eval.hpp"
#include "bcp/serialization.hpp"
#include "bcp/version.hpp"

namespace bcp {

namespace {

constexpr int kCoverageDigits = 4;
constexpr int kSizeDigits = 3;

std::string fmt(double value, int digits) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, value);
  return buf;
}

json rounded(double value, int digits) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return round_significant(value, digits);
}

std::string setting_key(Method m, double scale, std::optional<double> beta) {
  std::string key = std::string(to_string(m)) + " scale=" + fmt(scale, 6);
  if (beta) key += " beta=" + fmt(*beta, 6);
  return key;
}

json record_json(const SplitRecord& r) {
  return {{"split", r.split_index},
          {"seed", r.seed},
          {"method", std::string(to_string(r.method))},
          {"prior_scale", r.prior_scale},
          {"beta", r.beta ? json(*r.beta) : json(nullptr)},
          {"coverage", rounded(r.coverage, kCoverageDigits)},
          {"size", rounded(r.mean_size, kSizeDigits)},
          {"lambda", rounded(r.lambda, 6)},
          {"fallback", r.fallback},
          {"n_test", r.n_test},
          {"pred_time", rounded(r.pred_time, kSizeDigits)},
          {"calib_time", rounded(r.calib_time, kSizeDigits)}};
}

json summary_json(const MethodSummary& s) {
  return {{"method", std::string(to_string(s.method))},
          {"prior_scale", s.prior_scale},
          {"beta", s.beta ? json(*s.beta) : json(nullptr)},
          {"coverage_mean", rounded(s.coverage_mean, kCoverageDigits)},
          {"coverage_sd", rounded(s.coverage_sd, kCoverageDigits)},
          {"size_mean", rounded(s.size_mean, kSizeDigits)},
          {"size_sd", rounded(s.size_sd, kSizeDigits)},
          {"pred_time_mean", rounded(s.pred_time_mean, kSizeDigits)},
          {"calib_time_mean", rounded(s.calib_time_mean, kSizeDigits)},
          {"fallback_count", s.fallback_count},
          {"n_splits", s.n_splits}};
}

}  // namespace

std::string render_report(const MetricsSummary& summary, ReportFormat format) {
  if (format == ReportFormat::json) {
    json per_split = json::array();
    for (const auto& r : summary.per_split) per_split.push_back(record_json(r));
    json rows = json::object();
    for (const auto& s : summary.summary) rows[setting_key(s.method, s.prior_scale, s.beta)] = summary_json(s);
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < summary.config.n_splits; ++i) seeds.push_back(split_seed(summary.config, i));
    json report = {{"config", to_json(summary.config)},
                   {"per_split", per_split},
                   {"summary", rows},
                   {"versions", version_info()},
                   {"seeds", {{"master", summary.config.seed}, {"splits", seeds}}}};
    return report.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "method,prior_scale,beta,coverage_mean,coverage_sd,size_mean,size_sd,pred_time,calib_time,fallbacks,"
         "n_splits\n";
  for (const auto& s : summary.summary) {
    out << to_string(s.method) << ',' << fmt(s.prior_scale, 6) << ',' << (s.beta ? fmt(*s.beta, 6) : "") << ','
        << fmt(s.coverage_mean, kCoverageDigits) << ',' << fmt(s.coverage_sd, kCoverageDigits) << ','
        << fmt(s.size_mean, kSizeDigits) << ',' << fmt(s.size_sd, kSizeDigits) << ','
        << fmt(s.pred_time_mean, kSizeDigits) << ',' << fmt(s.calib_time_mean, kSizeDigits) << ','
        << s.fallback_count << ',' << s.n_splits << '\n';
  }
  return out.str();
}

void emit_report(const MetricsSummary& summary, ReportFormat format, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report " + path.string());
  out << render_report(summary, format);
  if (!out) throw std::runtime_error("failed writing report " + path.string());
}

std::string render_beta_table(const std::vector<BetaScanRow>& rows, ReportFormat format, double alpha) {
  if (format == ReportFormat::json) {
    json table = json::array();
    for (const auto& r : rows) {
      table.push_back({{"beta", r.beta},
                       {"coverage_mean", rounded(r.coverage_mean, kCoverageDigits)},
                       {"coverage_sd", rounded(r.coverage_sd, kCoverageDigits)},
                       {"width_mean", rounded(r.width_mean, kSizeDigits)},
                       {"width_sd", rounded(r.width_sd, kSizeDigits)},
                       {"miscoverage", rounded(r.miscoverage, kCoverageDigits)},
                       {"gap", rounded(r.gap, kCoverageDigits)},
                       {"n_splits", r.n_splits}});
    }
    return json{{"alpha", alpha}, {"rows", table}, {"versions", version_info()}}.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "beta,coverage_mean,coverage_sd,width_mean,width_sd,miscoverage,gap,n_splits\n";
  for (const auto& r : rows) {
    out << fmt(r.beta, 6) << ',' << fmt(r.coverage_mean, kCoverageDigits) << ','
        << fmt(r.coverage_sd, kCoverageDigits) << ',' << fmt(r.width_mean, kSizeDigits) << ','
        << fmt(r.width_sd, kSizeDigits) << ',' << fmt(r.miscoverage, kCoverageDigits) << ','
        << fmt(r.gap, kCoverageDigits) << ',' << r.n_splits << '\n';
  }
  return out.str();
}

}  // namespace bcp

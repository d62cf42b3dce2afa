#include "bcp/serialization.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace bcp {

namespace {

std::vector<double> to_vec(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector from_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// JSON has no infinity; +inf thresholds travel as the string "inf".
json number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double read_number(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw std::invalid_argument("expected a number, got \"" + s + "\"");
  }
  return j.get<double>();
}

std::filesystem::path sidecar(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  return p.replace_extension(".json");
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  return out;
}

}  // namespace

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

namespace {

Matrix read_numeric_csv(const std::filesystem::path& path, std::vector<std::string>* header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  std::vector<std::string> names;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) names.push_back(cell);
  }
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t cols = 0;
    while (std::getline(ss, cell, ',')) {
      values.push_back(cell == "inf" ? kInf : std::stod(cell));
      ++cols;
    }
    if (cols != names.size())
      throw std::runtime_error(path.string() + ": row " + std::to_string(rows + 2) + " has wrong width");
    ++rows;
  }
  if (header) *header = names;
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(names.size()));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < names.size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = values[r * names.size() + c];
  return m;
}

}  // namespace

json to_json(const SplitSpec& split) {
  return {{"seed", split.seed}, {"train_idx", split.train_idx}, {"cal_idx", split.cal_idx},
          {"test_idx", split.test_idx}};
}

SplitSpec split_from_json(const json& j) {
  SplitSpec s;
  s.seed = j.at("seed").get<std::uint64_t>();
  s.train_idx = j.at("train_idx").get<std::vector<std::size_t>>();
  s.cal_idx = j.at("cal_idx").get<std::vector<std::size_t>>();
  s.test_idx = j.at("test_idx").get<std::vector<std::size_t>>();
  return s;
}

json to_json(const Standardizer& standardizer) {
  return {{"means", to_vec(standardizer.means)},
          {"sds", to_vec(standardizer.sds)},
          {"includes_label", standardizer.includes_label}};
}

Standardizer standardizer_from_json(const json& j) {
  Standardizer s;
  s.means = from_vec(j.at("means").get<std::vector<double>>());
  s.sds = from_vec(j.at("sds").get<std::vector<double>>());
  s.includes_label = j.at("includes_label").get<bool>();
  if (s.means.size() != s.sds.size()) throw std::invalid_argument("standardizer means/sds differ in length");
  return s;
}

json to_json(const McmcConfig& mcmc) {
  return {{"total_iters", mcmc.total_iters}, {"burn_in", mcmc.burn_in},
          {"thin", mcmc.thin},               {"initial_step", mcmc.initial_step},
          {"adapt_window", mcmc.adapt_window}, {"target_acceptance", mcmc.target_acceptance},
          {"seed", mcmc.seed}};
}

json to_json(const Threshold& threshold) {
  return {{"lambda", number(threshold.lambda)},
          {"method", std::string(to_string(threshold.method))},
          {"feasible", threshold.feasible}};
}

json to_json(const Feasibility& f) {
  json j = {{"feasible", f.feasible}, {"probability", f.probability}, {"draws", f.draws}, {"seed", f.seed}};
  j["exact_probability"] = f.exact_probability ? json(*f.exact_probability) : json(nullptr);
  return j;
}

json to_json(const BcpSolution& solution) {
  json table = json::array();
  for (const auto& row : solution.candidate_table) {
    table.push_back({{"lambda", number(row.lambda)},
                     {"bq_mean", row.bq_mean},
                     {"bq_variance", row.bq_variance},
                     {"feasible", row.feasible},
                     {"feasibility_prob", row.feasibility_prob},
                     {"exact_prob", row.exact_prob ? json(*row.exact_prob) : json(nullptr)}});
  }
  return {{"lambda_star", number(solution.lambda_star)},
          {"bq_size_at_star", solution.bq_size_at_star},
          {"feasibility_prob", solution.feasibility_prob},
          {"star_index", solution.star_index},
          {"fallback_used", solution.fallback_used},
          {"non_monotone_sizes", solution.non_monotone_sizes},
          {"candidate_table", table}};
}

json to_json(const ExperimentConfig& c) {
  std::vector<std::string> methods;
  for (auto m : c.methods) methods.emplace_back(to_string(m));
  return {{"data", c.data_path},
          {"task", std::string(to_string(c.task))},
          {"methods", methods},
          {"profile", std::string(to_string(c.profile))},
          {"splits", c.n_splits},
          {"ratios", {c.ratios.train, c.ratios.cal, c.ratios.test}},
          {"alpha", c.alpha},
          {"betas", c.betas},
          {"c", c.prior_scales},
          {"logistic_weight_sd", c.logistic_weight_sd},
          {"iters", c.mcmc.total_iters},
          {"burnin", c.mcmc.burn_in},
          {"grid_size", c.grid_size},
          {"seed", c.seed},
          {"lasso_penalty", c.lasso_penalty},
          {"dirichlet_draws", c.dirichlet_draws},
          {"bci_samples_per_draw", c.bci_samples_per_draw},
          {"bq_nodes", c.bq_nodes},
          {"hpd", c.hpd},
          {"asymmetric_scores", c.asymmetric_scores},
          {"mc", c.use_mc}};
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig c) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  // A profile sets defaults first so explicit keys in the same file win.
  if (j.contains("profile")) c.apply_profile(profile_from_string(j.at("profile").get<std::string>()));
  for (const auto& [key, value] : j.items()) {
    if (key == "profile") continue;
    if (key == "data") c.data_path = value.get<std::string>();
    else if (key == "task") c.task = task_kind_from_string(value.get<std::string>());
    else if (key == "methods") {
      c.methods.clear();
      for (const auto& m : value) c.methods.push_back(method_from_string(m.get<std::string>()));
    } else if (key == "splits") c.n_splits = value.get<std::size_t>();
    else if (key == "ratios") {
      const auto r = value.get<std::vector<double>>();
      if (r.size() != 3) throw std::invalid_argument("ratios needs three entries");
      c.ratios = {r[0], r[1], r[2]};
    } else if (key == "alpha") c.alpha = value.get<double>();
    else if (key == "beta") c.betas = {value.get<double>()};
    else if (key == "betas") c.betas = value.get<std::vector<double>>();
    else if (key == "c") c.prior_scales = value.is_array() ? value.get<std::vector<double>>()
                                                           : std::vector<double>{value.get<double>()};
    else if (key == "logistic_weight_sd") c.logistic_weight_sd = value.get<double>();
    else if (key == "iters") c.mcmc.total_iters = value.get<std::size_t>();
    else if (key == "burnin") c.mcmc.burn_in = value.get<std::size_t>();
    else if (key == "grid_size") c.grid_size = value.get<std::size_t>();
    else if (key == "seed") c.seed = value.get<std::uint64_t>();
    else if (key == "lasso_penalty") c.lasso_penalty = value.get<double>();
    else if (key == "dirichlet_draws") c.dirichlet_draws = value.get<std::size_t>();
    else if (key == "bci_samples_per_draw") c.bci_samples_per_draw = value.get<std::size_t>();
    else if (key == "bq_nodes") c.bq_nodes = value.get<std::size_t>();
    else if (key == "hpd") c.hpd = value.get<bool>();
    else if (key == "asymmetric_scores") c.asymmetric_scores = value.get<bool>();
    else if (key == "mc") c.use_mc = value.get<bool>();
    else if (key == "threads") c.threads = value.get<std::size_t>();
    else throw std::invalid_argument("unknown config key: " + key);
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  try {
    return config_from_json(read_json_file(path));
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void save_draws(const PosteriorDraws& draws, const std::filesystem::path& csv_path) {
  auto out = open_out(csv_path);
  for (std::size_t k = 0; k < draws.param_names.size(); ++k) out << (k ? "," : "") << draws.param_names[k];
  out << '\n';
  for (Eigen::Index r = 0; r < draws.draws.rows(); ++r) {
    for (Eigen::Index k = 0; k < draws.draws.cols(); ++k) out << (k ? "," : "") << draws.draws(r, k);
    out << '\n';
  }
  json meta = {{"model", std::string(to_string(draws.model))},
               {"n_features", draws.n_features},
               {"param_names", draws.param_names},
               {"acceptance_rate", draws.acceptance_rate},
               {"step_sizes", to_vec(draws.step_sizes)},
               {"config", to_json(draws.config)}};
  open_out(sidecar(csv_path)) << meta.dump(2) << '\n';
}

PosteriorDraws load_draws(const std::filesystem::path& csv_path) {
  const json meta = read_json_file(sidecar(csv_path));
  PosteriorDraws d;
  std::vector<std::string> header;
  d.draws = read_numeric_csv(csv_path, &header);
  d.param_names = meta.at("param_names").get<std::vector<std::string>>();
  if (header != d.param_names) throw std::runtime_error(csv_path.string() + ": header does not match sidecar");
  const auto model = meta.at("model").get<std::string>();
  d.model = model == to_string(ModelKind::logistic) ? ModelKind::logistic : ModelKind::sparse_linear;
  d.n_features = meta.at("n_features").get<std::size_t>();
  d.acceptance_rate = meta.at("acceptance_rate").get<double>();
  d.step_sizes = from_vec(meta.at("step_sizes").get<std::vector<double>>());
  const auto& cfg = meta.at("config");
  d.config.total_iters = cfg.at("total_iters").get<std::size_t>();
  d.config.burn_in = cfg.at("burn_in").get<std::size_t>();
  d.config.thin = cfg.at("thin").get<std::size_t>();
  d.config.initial_step = cfg.at("initial_step").get<double>();
  d.config.adapt_window = cfg.at("adapt_window").get<std::size_t>();
  d.config.target_acceptance = cfg.at("target_acceptance").get<double>();
  d.config.seed = cfg.at("seed").get<std::uint64_t>();
  d.validate();
  return d;
}

void save_scores(const ScoreMatrix& scores, const std::filesystem::path& csv_path) {
  auto out = open_out(csv_path);
  for (std::size_t k = 0; k < scores.candidate_grid.size(); ++k) out << (k ? "," : "") << "y" << k;
  out << '\n';
  for (Eigen::Index r = 0; r < scores.test_scores.rows(); ++r) {
    for (Eigen::Index k = 0; k < scores.test_scores.cols(); ++k) out << (k ? "," : "") << scores.test_scores(r, k);
    out << '\n';
  }
  json meta = {{"score_kind", std::string(to_string(scores.score_kind))},
               {"grid", scores.candidate_grid},
               {"cal_scores", to_vec(scores.cal_scores)}};
  open_out(sidecar(csv_path)) << meta.dump(2) << '\n';
}

ScoreMatrix load_scores(const std::filesystem::path& csv_path) {
  const json meta = read_json_file(sidecar(csv_path));
  ScoreMatrix s;
  s.test_scores = read_numeric_csv(csv_path, nullptr);
  s.score_kind = score_kind_from_string(meta.at("score_kind").get<std::string>());
  s.candidate_grid = meta.at("grid").get<std::vector<double>>();
  s.cal_scores = from_vec(meta.at("cal_scores").get<std::vector<double>>());
  if (static_cast<std::size_t>(s.test_scores.cols()) != s.candidate_grid.size() && s.test_scores.rows() > 0)
    throw std::runtime_error(csv_path.string() + ": width does not match grid");
  return s;
}

}  // namespace bcp

#include "cli.hpp"

#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bcp/invariants.hpp"
#include "bcp/serialization.hpp"

namespace bcp::cli {

namespace {

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CLI::ValidationError(flag, "not a number: '" + item + "'");
    }
  }
  if (out.empty()) throw CLI::ValidationError(flag, "empty list");
  return out;
}

struct Flags {
  std::string config;
  std::string data;
  std::string task;
  double alpha = 0;
  std::string betas;
  std::string c;
  std::size_t splits = 0;
  std::size_t iters = 0;
  std::size_t burnin = 0;
  std::size_t grid_size = 0;
  std::string methods;
  std::uint64_t seed = 0;
  std::string profile;
  std::string out;
  std::string format = "json";
  std::size_t threads = 0;
  bool hpd = false;
  bool asymmetric = false;
  bool mc = false;
};

void add_flags(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config, "JSON config file; flags override its values")->check(CLI::ExistingFile);
  app.add_option("--data", f.data, "CSV data set (last column is the label)");
  app.add_option("--task", f.task, "regression or classification");
  app.add_option("--alpha", f.alpha, "target miscoverage")->check(CLI::Range(0.0, 1.0));
  app.add_option("--beta,--betas", f.betas, "confidence parameter(s), comma separated");
  app.add_option("--c", f.c, "prior scale(s) of the noise sd, comma separated");
  app.add_option("--splits", f.splits, "number of random splits");
  app.add_option("--iters", f.iters, "MCMC iterations");
  app.add_option("--burnin", f.burnin, "MCMC burn-in iterations");
  app.add_option("--grid-size", f.grid_size, "candidate label grid size");
  app.add_option("--methods", f.methods, "comma separated: split_cp,bci,cb,bcp,msp");
  app.add_option("--seed", f.seed, "master seed");
  app.add_option("--profile", f.profile, "desk or paper")->check(CLI::IsMember({"desk", "paper"}));
  app.add_option("--out", f.out, "report path (default $BCP_OUT/<subcommand>.<format>)");
  app.add_option("--format", f.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--threads", f.threads, "worker threads over splits");
  app.add_flag("--hpd", f.hpd, "shortest BCI intervals instead of equal tails");
  app.add_flag("--asymmetric-scores", f.asymmetric, "mean predictive calibration scores");
  app.add_flag("--mc", f.mc, "empirical mean instead of Bayesian quadrature");
}

bool given(const CLI::App& app, const char* name) { return app.count(name) > 0; }

CliConfig build_config(const CLI::App& sub, const Flags& f, Subcommand kind) {
  CliConfig cfg;
  cfg.subcommand = kind;
  ExperimentConfig& e = cfg.experiment;
  if (kind == Subcommand::classify) {
    e.task = TaskKind::classification;
    e.methods = {Method::split_cp, Method::bci, Method::cb, Method::bcp, Method::msp};
  }
  if (kind == Subcommand::beta_scan) {
    e.methods = {Method::bcp};
    e.betas = {0.6, 0.65, 0.7, 0.8, 0.9};
  }
  if (given(sub, "--profile")) e.apply_profile(profile_from_string(f.profile));
  if (given(sub, "--config")) {
    cfg.config_file = f.config;
    e = config_from_json(read_json_file(f.config), e);
    if (given(sub, "--profile")) e.apply_profile(profile_from_string(f.profile));
  }
  if (given(sub, "--data")) e.data_path = f.data;
  if (given(sub, "--task")) e.task = task_kind_from_string(f.task);
  if (given(sub, "--alpha")) e.alpha = f.alpha;
  if (given(sub, "--beta")) e.betas = parse_list(f.betas, "--beta");
  if (given(sub, "--c")) e.prior_scales = parse_list(f.c, "--c");
  if (given(sub, "--splits")) e.n_splits = f.splits;
  if (given(sub, "--iters")) e.mcmc.total_iters = f.iters;
  if (given(sub, "--burnin")) e.mcmc.burn_in = f.burnin;
  if (given(sub, "--grid-size")) e.grid_size = f.grid_size;
  if (given(sub, "--seed")) e.seed = f.seed;
  if (given(sub, "--threads")) e.threads = f.threads;
  if (given(sub, "--hpd")) e.hpd = true;
  if (given(sub, "--asymmetric-scores")) e.asymmetric_scores = true;
  if (given(sub, "--mc")) e.use_mc = true;
  if (given(sub, "--methods")) {
    e.methods.clear();
    std::stringstream ss(f.methods);
    std::string item;
    while (std::getline(ss, item, ',')) e.methods.push_back(method_from_string(item));
  }
  cfg.format = report_format_from_string(f.format);

  if (kind == Subcommand::regress && e.task != TaskKind::regression)
    throw std::invalid_argument("regress needs --task regression");
  if (kind == Subcommand::classify && e.task != TaskKind::classification)
    throw std::invalid_argument("classify needs --task classification");
  if (kind == Subcommand::beta_scan && e.task != TaskKind::regression)
    throw std::invalid_argument("beta-scan needs a regression task");
  if (kind != Subcommand::selftest) e.validate();

  std::string name = sub.get_name();
  if (given(sub, "--out")) {
    cfg.out = f.out;
  } else {
    const char* dir = std::getenv("BCP_OUT");
    cfg.out = std::filesystem::path(dir && *dir ? dir : ".") / (name + (f.format == "csv" ? ".csv" : ".json"));
  }
  return cfg;
}

}  // namespace

ParseResult parse_args(const std::vector<std::string>& args) {
  CLI::App app{"Bayesian conformal prediction experiments", "bcp"};
  app.require_subcommand(0, 1);
  Flags flags;
  const std::vector<std::pair<std::string, Subcommand>> kinds{{"regress", Subcommand::regress},
                                                              {"classify", Subcommand::classify},
                                                              {"beta-scan", Subcommand::beta_scan},
                                                              {"compare", Subcommand::compare},
                                                              {"selftest", Subcommand::selftest}};
  const std::vector<std::string> help{"regression table: coverage and width per method",
                                      "classification table: coverage and set size per method",
                                      "BCP coverage and width over a list of beta values",
                                      "one report covering every requested method",
                                      "run the invariant checks"};
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    auto* sub = app.add_subcommand(kinds[i].first, help[i]);
    add_flags(*sub, flags);
    subs.push_back(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  ParseResult result;
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    result.message = app.help();
    return result;
  } catch (const CLI::ParseError& e) {
    result.exit_code = 2;
    result.message = std::string(e.what()) + "\n" + app.help();
    return result;
  }
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    if (subs[i]->get_help_ptr() && subs[i]->get_help_ptr()->count() > 0) {
      result.message = subs[i]->help();
      return result;
    }
    try {
      result.config = build_config(*subs[i], flags, kinds[i].second);
    } catch (const std::exception& e) {
      result.exit_code = 2;
      result.message = std::string("error: ") + e.what() + "\n";
    }
    return result;
  }
  result.exit_code = 2;
  result.message = "error: a subcommand is required\n" + app.help();
  return result;
}

ParseResult parse_args(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return parse_args(args);
}

int run(const CliConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.subcommand == Subcommand::selftest) {
      int failures = 0;
      for (const auto& check : run_invariant_suite()) {
        out << (check.passed ? "PASS " : "FAIL ") << check.name;
        if (!check.passed) out << "  " << check.detail;
        out << '\n';
        failures += check.passed ? 0 : 1;
      }
      return failures == 0 ? 0 : 1;
    }
    if (config.experiment.data_path.empty()) {
      err << "error: --data is required\n";
      return 2;
    }

    const ExperimentConfig& e = config.experiment;
    const Dataset data = load_csv(e.data_path, e.task);
    out << "running " << e.n_splits << " splits on " << e.data_path << '\n';

    std::string text;
    if (config.subcommand == Subcommand::beta_scan) {
      const auto rows = beta_scan(e, data);
      text = render_beta_table(rows, config.format, e.alpha);
    } else {
      const auto summary = e.task == TaskKind::regression ? run_regression_experiment(e, data)
                                                          : run_classification_experiment(e, data);
      for (const auto& s : summary.summary) {
        out << to_string(s.method) << " scale=" << s.prior_scale;
        if (s.beta) out << " beta=" << *s.beta;
        out << " coverage=" << s.coverage_mean << " size=" << s.size_mean << '\n';
      }
      text = render_report(summary, config.format);
    }
    if (config.out.has_parent_path()) std::filesystem::create_directories(config.out.parent_path());
    std::ofstream file(config.out, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write report " + config.out.string());
    file << text;
    out << "wrote " << config.out.string() << '\n';
    return 0;
  } catch (const SplitError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace bcp::cli

#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bcp/conformal.hpp"
#include "bcp/eval.hpp"
#include "bcp/invariants.hpp"
#include "bcp/optimizer.hpp"
#include "bcp/posterior.hpp"
#include "bcp/scores.hpp"
#include "bcp/serialization.hpp"
#include "bcp/version.hpp"

namespace py = pybind11;
using namespace bcp;

namespace {

std::vector<double> to_vec(const Vector& v) { return {v.data(), v.data() + v.size()}; }

McmcConfig mcmc_config(std::size_t iters, std::size_t burnin, std::uint64_t seed) {
  McmcConfig m{.total_iters = iters, .burn_in = burnin};
  m.seed = seed;
  return m;
}

}  // namespace

PYBIND11_MODULE(_bcp, m) {
  m.doc() = "Bayesian conformal prediction core";
  m.attr("__version__") = std::string(kVersion);

  py::class_<PosteriorDraws>(m, "PosteriorDraws")
      .def_readonly("draws", &PosteriorDraws::draws)
      .def_readonly("param_names", &PosteriorDraws::param_names)
      .def_readonly("n_features", &PosteriorDraws::n_features)
      .def_readonly("acceptance_rate", &PosteriorDraws::acceptance_rate)
      .def("__len__", &PosteriorDraws::size);

  m.def("make_linear_draws", &make_linear_draws, py::arg("weights"), py::arg("intercepts"), py::arg("noise_sd"));
  m.def("make_logistic_draws", &make_logistic_draws, py::arg("weights"), py::arg("intercepts"));

  m.def(
      "sample_blr",
      [](const Matrix& x, const Vector& y, double c, std::size_t iters, std::size_t burnin, std::uint64_t seed) {
        PriorConfigRegression prior;
        prior.c = c;
        py::gil_scoped_release release;
        return sample_blr(x, y, prior, mcmc_config(iters, burnin, seed));
      },
      py::arg("x"), py::arg("y"), py::arg("c") = 1.0, py::arg("iters") = 2000, py::arg("burnin") = 500,
      py::arg("seed") = 0);
  m.def(
      "sample_blogistic",
      [](const Matrix& x, const Vector& y, double weight_sd, std::size_t iters, std::size_t burnin,
         std::uint64_t seed) {
        PriorConfigLogistic prior;
        prior.weight_sd = weight_sd;
        py::gil_scoped_release release;
        return sample_blogistic(x, y, prior, mcmc_config(iters, burnin, seed));
      },
      py::arg("x"), py::arg("y"), py::arg("weight_sd") = 1.0, py::arg("iters") = 2000, py::arg("burnin") = 500,
      py::arg("seed") = 0);

  m.def("aoi_predictive", [](const std::vector<double>& likes) { return aoi_predictive(likes); }, py::arg("likes"));
  m.def(
      "cal_scores",
      [](const PosteriorDraws& d, const Matrix& x, const Vector& y, const std::string& kind) {
        return compute_cal_scores(d, x, y, score_kind_from_string(kind));
      },
      py::arg("draws"), py::arg("x"), py::arg("y"), py::arg("kind") = "aoi_neglog");
  m.def(
      "test_scores",
      [](const PosteriorDraws& d, const Matrix& x, const std::vector<double>& grid, const std::string& kind) {
        return compute_test_scores(d, x, grid, score_kind_from_string(kind)).test_scores;
      },
      py::arg("draws"), py::arg("x"), py::arg("grid"), py::arg("kind") = "aoi_neglog");

  m.def(
      "split_threshold",
      [](const std::vector<double>& scores, double alpha) { return split_threshold(scores, alpha).lambda; },
      py::arg("scores"), py::arg("alpha"));
  m.def(
      "lplus_draws",
      [](const std::vector<double>& losses, double bound, std::size_t draws, std::uint64_t seed) {
        return lplus_draws(losses, bound, draws, seed);
      },
      py::arg("losses"), py::arg("loss_bound"), py::arg("draws"), py::arg("seed") = 0);
  m.def("lplus_binary_cdf", &lplus_binary_cdf, py::arg("ones"), py::arg("n"), py::arg("alpha_over_b"));

  m.def(
      "calibrate_json",
      [](const std::vector<double>& cal, const Matrix& eval_scores, const std::vector<double>& grid, double alpha,
         double beta, std::size_t dirichlet_draws, std::uint64_t seed, bool classification) {
        RiskConfig risk{.alpha = alpha, .beta = beta, .loss_bound = 1.0, .dirichlet_draws = dirichlet_draws,
                        .seed = seed};
        BcpOptions opt;
        opt.task = classification ? TaskKind::classification : TaskKind::regression;
        const Matrix inputs = Matrix::Zero(eval_scores.rows(), 1);
        return to_json(bcp_calibrate_scores(cal, inputs, eval_scores, grid, risk, opt)).dump();
      },
      py::arg("cal_scores"), py::arg("eval_scores"), py::arg("grid"), py::arg("alpha") = 0.2,
      py::arg("beta") = 0.6, py::arg("dirichlet_draws") = 2000, py::arg("seed") = 0,
      py::arg("classification") = false);

  m.def(
      "run_experiment_json",
      [](const std::string& config_json, const std::string& format) {
        const auto cfg = config_from_json(json::parse(config_json));
        MetricsSummary s;
        {
          py::gil_scoped_release release;
          s = cfg.task == TaskKind::regression ? run_regression_experiment(cfg) : run_classification_experiment(cfg);
        }
        return render_report(s, report_format_from_string(format));
      },
      py::arg("config_json"), py::arg("format") = "json");

  m.def("invariant_suite", [](std::uint64_t seed) {
    std::vector<std::pair<std::string, bool>> out;
    for (const auto& r : run_invariant_suite(seed)) out.emplace_back(r.name, r.passed);
    return out;
  }, py::arg("seed") = 20240601);
}

"""Bayesian conformal prediction: posterior-predictive scores, L+ risk control and BQ-optimised thresholds."""

import json as _json

from ._bcp import (
    PosteriorDraws,
    __version__,
    aoi_predictive,
    cal_scores,
    invariant_suite,
    lplus_binary_cdf,
    lplus_draws,
    make_linear_draws,
    make_logistic_draws,
    sample_blogistic,
    sample_blr,
    split_threshold,
    test_scores,
)
from . import _bcp


def calibrate(cal_scores, eval_scores, grid, alpha=0.2, beta=0.6, dirichlet_draws=2000, seed=0,
              classification=False):
    """Select lambda* from precomputed scores; returns the solution as a dict."""
    raw = _bcp.calibrate_json(list(cal_scores), eval_scores, list(grid), alpha, beta, dirichlet_draws, seed,
                              classification)
    return _json.loads(raw)


def run_experiment(config):
    """Run a multi-split experiment from a config dict; returns the JSON report as a dict."""
    return _json.loads(_bcp.run_experiment_json(_json.dumps(config), "json"))


__all__ = [
    "PosteriorDraws", "__version__", "aoi_predictive", "cal_scores", "calibrate", "invariant_suite",
    "lplus_binary_cdf", "lplus_draws", "make_linear_draws", "make_logistic_draws", "run_experiment",
    "sample_blogistic", "sample_blr", "split_threshold", "test_scores",
]

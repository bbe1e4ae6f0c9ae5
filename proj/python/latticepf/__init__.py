"""Korobov-lattice and Monte Carlo particle filtering."""

import json as _json

from ._core import (
    body_forward_kinematics,
    gaussian_step,
    generator_for,
    inv_normal_cdf,
    kalman_filter,
    korobov_points,
    normal_cdf,
    project,
    run_bench_json,
    run_filter,
    toy_loss_probability,
)

__all__ = [
    "body_forward_kinematics",
    "gaussian_step",
    "generator_for",
    "inv_normal_cdf",
    "kalman_filter",
    "korobov_points",
    "normal_cdf",
    "project",
    "run_bench",
    "run_bench_json",
    "run_filter",
    "toy_loss_probability",
]


def run_bench(model, n, trials, steps, **kwargs):
    """Multi-trial RMSE benchmark; returns the report as a dict."""
    return _json.loads(run_bench_json(model, n, trials, steps, **kwargs))

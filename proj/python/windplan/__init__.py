"""Wind-aware drone trajectory planning: wind solve, cost map, A*, Bezier refinement, replay."""

import json as _json

from ._core import (
    Scenario,
    WindField,
    WindplanError,
    discrete_frechet,
    displacement,
    equilibrium,
    evaluate_curve,
    fly,
    jerk_stats,
    load_scenario,
    p95,
    parse_scenario,
    percentile,
    plan,
    read_field_csv,
    relative_reduction,
    reynolds_tau,
    simulate_wind,
    still_air,
    wind_penalty,
)
from . import _core


def compare(scenario, field, trials=1, seed=0):
    """Plan Base and WESPR, replay both and return the comparison report as a dict."""
    return _json.loads(_core.compare_json(scenario, field, trials, seed))


def run_simulate_wind(scenario, out_dir, threads=1):
    return _json.loads(_core.run_simulate_wind(scenario, str(out_dir), threads=threads))


def run_plan(scenario, out_dir, mode="wespr", threads=1):
    return _json.loads(_core.run_plan(scenario, str(out_dir), mode=mode, threads=threads))


def run_compare(scenario, out_dir, threads=1, trials=1, seed=0):
    return _json.loads(_core.run_compare(scenario, str(out_dir), threads=threads, trials=trials, seed=seed))


__all__ = [name for name in dir() if not name.startswith("_")]

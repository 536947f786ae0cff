"""Seeded Monte-Carlo harness over run_mission.

Trial i runs with seed base_seed + i. A failing trial does not stop the
batch: it is reported with success=False and its error message. Results are
returned in trial order whatever order workers finish in.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd

from config.settings import METHOD_LABELS
from tagtrack.cli.scenario_config import ScenarioConfig
from tagtrack.errors import TagTrackError
from tagtrack.scenario.mission import MissionResult, run_mission, set_quiet

RESULT_COLUMNS = [
    "trial", "seed", "method", "terrain", "reward_kind",
    "tag_id", "loc_time_s", "error_m", "det_m4", "localized",
]
MISSION_COLUMNS = [
    "trial", "seed", "method", "terrain", "total_time_s", "return_time_s",
    "aoa_fraction", "fallbacks", "void_violations", "r_clamps", "timed_out",
    "success", "error",
]


@dataclass
class TrialOutcome:
    trial: int
    seed: int
    success: bool
    result: MissionResult | None = None
    error: str = ""


def _run_trial(config: ScenarioConfig, trial: int, seed: int, trace: bool, quiet: bool) -> TrialOutcome:
    if quiet:
        set_quiet(True)
    try:
        result = run_mission(config, seed, trace=trace)
    except (TagTrackError, ValueError, OSError) as exc:
        return TrialOutcome(trial, seed, success=False, error=f"{type(exc).__name__}: {exc}")
    return TrialOutcome(trial, seed, success=True, result=result)


def run_trials(
    config: ScenarioConfig,
    n_trials: int,
    base_seed: int = 0,
    jobs: int = 1,
    trace: bool = False,
) -> list[TrialOutcome]:
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")
    seeds = [base_seed + i for i in range(n_trials)]
    if jobs <= 1:
        return [_run_trial(config, i, s, trace, quiet=False) for i, s in enumerate(seeds)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_run_trial, config, i, s, trace, True) for i, s in enumerate(seeds)]
        outcomes = [f.result() for f in futures]
    return sorted(outcomes, key=lambda o: o.trial)


def results_frame(outcomes: list[TrialOutcome]) -> pd.DataFrame:
    """One row per (trial, tag) in canonical order."""
    rows = []
    for o in outcomes:
        if not o.success:
            continue
        r = o.result
        for tag in r.tags:
            rows.append(
                {
                    "trial": o.trial,
                    "seed": o.seed,
                    "method": r.method,
                    "terrain": r.terrain,
                    "reward_kind": r.reward_kind,
                    "tag_id": tag.tag_id,
                    "loc_time_s": tag.loc_time_s,
                    "error_m": tag.error_m,
                    "det_m4": tag.det_m4,
                    "localized": tag.localized,
                }
            )
    frame = pd.DataFrame(rows, columns=RESULT_COLUMNS)
    return frame.sort_values(["trial", "tag_id"], kind="stable").reset_index(drop=True)


def missions_frame(outcomes: list[TrialOutcome], method: str, terrain: str) -> pd.DataFrame:
    rows = []
    for o in outcomes:
        r = o.result
        diag = r.diagnostics if r else {}
        rows.append(
            {
                "trial": o.trial,
                "seed": o.seed,
                "method": method,
                "terrain": terrain,
                "total_time_s": r.total_time_s if r else math.nan,
                "return_time_s": r.return_time_s if r else math.nan,
                "aoa_fraction": r.aoa_fraction if r else math.nan,
                "fallbacks": diag.get("fallbacks", 0),
                "void_violations": diag.get("void_violations", 0),
                "r_clamps": diag.get("r_clamps", 0),
                "timed_out": r.timed_out if r else False,
                "success": o.success,
                "error": o.error,
            }
        )
    return pd.DataFrame(rows, columns=MISSION_COLUMNS)


def summarize(outcomes: list[TrialOutcome]) -> dict:
    """Per-method aggregate: time statistics, mean error, mean AoA usage."""
    done = [o.result for o in outcomes if o.success]
    if not done:
        return {"trials": 0, "failed": len(outcomes)}
    times = np.array([r.total_time_s for r in done], dtype=float)
    errors = np.array([r.mean_error_m for r in done], dtype=float)
    method = done[0].method
    return {
        "method": method,
        "label": METHOD_LABELS.get(method, method),
        "terrain": done[0].terrain,
        "trials": len(done),
        "failed": len(outcomes) - len(done),
        "mean_time_s": float(times.mean()),
        "median_time_s": float(np.median(times)),
        "std_time_s": float(times.std()),
        "mean_error_m": float(np.nanmean(errors)) if np.any(np.isfinite(errors)) else math.nan,
        "mean_aoa_fraction": float(np.mean([r.aoa_fraction for r in done])),
        "timed_out": int(sum(r.timed_out for r in done)),
    }


def run_monte_carlo(
    config: ScenarioConfig,
    n_trials: int,
    base_seed: int = 0,
    jobs: int = 1,
) -> pd.DataFrame:
    """Summary table (one row) for `n_trials` seeded missions of one config."""
    outcomes = run_trials(config, n_trials, base_seed, jobs)
    return pd.DataFrame([summarize(outcomes)])

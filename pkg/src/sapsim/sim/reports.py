"""CSV reports: tick logs, per-trial metrics, controller aggregates and idle times."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from pathlib import Path

import numpy as np
import pandas as pd

from sapsim.config import Controller
from sapsim.sim.exceptions import SimulationError
from sapsim.sim.models import TrialMetrics

logger = logging.getLogger(__name__)

TICK_LOG_FILE = "tick_log.csv"
METRICS_FILE = "metrics.csv"
AGGREGATE_FILE = "aggregate.csv"
IDLE_FILE = "idle.csv"


def write_tick_log(log: pd.DataFrame, path: str | Path) -> Path:
    """Write a trial's tick log."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    log.to_csv(path, index=False)
    logger.debug("wrote %d tick rows to %s", len(log), path)
    return path


def read_tick_log(path: str | Path) -> pd.DataFrame:
    """Read a tick log written by :func:`write_tick_log`."""
    return pd.read_csv(path)


def metrics_frame(rows: Sequence[TrialMetrics]) -> pd.DataFrame:
    """One row per trial, in the order given."""
    columns = list(TrialMetrics.__dataclass_fields__)
    return pd.DataFrame([m.to_row() for m in rows], columns=columns)


def write_metrics(rows: Sequence[TrialMetrics], path: str | Path) -> Path:
    """Write per-trial metrics rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    metrics_frame(rows).to_csv(path, index=False)
    return path


def read_metrics(path: str | Path) -> list[TrialMetrics]:
    """Read rows written by :func:`write_metrics`.

    Raises:
        SimulationError: If a column is missing.
    """
    frame = pd.read_csv(path, dtype={"trajectory_hash": str, "fault": str, "trajectory": str})
    try:
        return [TrialMetrics.from_row(row) for row in frame.to_dict("records")]
    except KeyError as e:
        raise SimulationError(f"{path}: missing metrics column {e}") from e


def aggregate(rows: Sequence[TrialMetrics], d_safe: float) -> pd.DataFrame:
    """Per-controller summary over the trials that completed.

    Columns: trial and fault counts, mean and extreme peak acceleration, mean and
    extreme minimum distance, violating trials, margin violation
    ``min(0, lambda_min - d_safe)`` in cm (mean and worst) and, on the filtered
    controller's row, the relative reduction of the mean peak acceleration against
    the unfiltered one in percent.
    """
    frame = metrics_frame(rows)
    records = []
    for controller, group in frame.groupby("controller", sort=True):
        done = group[group["fault"].fillna("") == ""]
        margin_cm = 100.0 * np.minimum(0.0, done["min_lambda"] - d_safe)
        records.append(
            {
                "controller": controller,
                "trials": len(group),
                "faults": len(group) - len(done),
                "mean_max_acc": done["max_acc"].mean(),
                "extreme_max_acc": done["max_acc"].max(),
                "mean_min_lambda": done["min_lambda"].mean(),
                "extreme_min_lambda": done["min_lambda"].min(),
                "violating_trials": int((done["violation_count"] > 0).sum()),
                "violation_count": int(done["violation_count"].sum()),
                "mean_margin_violation_cm": margin_cm.mean(),
                "worst_margin_violation_cm": margin_cm.min(),
                "fallbacks": int(done["fallback_count"].sum()),
            }
        )
    summary = pd.DataFrame.from_records(records)
    summary["acc_reduction_pct"] = np.nan
    names = set(summary["controller"]) if records else set()
    if {Controller.NMPC_ONLY, Controller.NMPC_ECBF} <= names:
        acc = summary.set_index("controller")["mean_max_acc"]
        baseline = acc[Controller.NMPC_ONLY]
        if baseline > 0.0:
            reduction = 100.0 * (baseline - acc[Controller.NMPC_ECBF]) / baseline
            filtered = summary["controller"] == Controller.NMPC_ECBF
            summary.loc[filtered, "acc_reduction_pct"] = reduction
    return summary


def idle_report(with_prediction: TrialMetrics, without_prediction: TrialMetrics) -> pd.DataFrame:
    """Idle times of both modes with their rates (idle / total) in percent.

    The ``saving_pct`` column on the with-prediction row is the total-time saving
    against turn-taking without prediction.
    """
    rows = []
    modes = (("with_prediction", with_prediction), ("without_prediction", without_prediction))
    for mode, m in modes:
        rows.append(
            {
                "mode": mode,
                "h_idl": m.h_idl,
                "r_idl": m.r_idl,
                "total_time": m.total_time,
                "h_idl_rate_pct": 100.0 * m.h_idl / m.total_time if m.total_time else 0.0,
                "r_idl_rate_pct": 100.0 * m.r_idl / m.total_time if m.total_time else 0.0,
                "saving_pct": np.nan,
            }
        )
    if without_prediction.total_time > 0.0:
        saving = without_prediction.total_time - with_prediction.total_time
        rows[0]["saving_pct"] = 100.0 * saving / without_prediction.total_time
    return pd.DataFrame.from_records(rows)


def write_frame(frame: pd.DataFrame, path: str | Path) -> Path:
    """Write a summary table."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
    return path


def format_table(frame: pd.DataFrame) -> str:
    """Fixed-width rendering for the terminal."""
    return frame.to_string(index=False, float_format=lambda v: f"{v:.4f}")

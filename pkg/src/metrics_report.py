"""
Regression metrics and the prediction report files.

OUTPUT:
-------
predictions.csv   ff_name,fold,target_ffr,predicted_ffr (sorted by ff_name)
plot_data.csv     index,ff_name,target_ffr,predicted_ffr (report fold only)
metrics.csv       fold,rows,mae,r2
timing.csv        stage,seconds followed by the campaign vs. prediction rows

Every file except timing.csv is byte-identical across runs with the same inputs.
"""

import csv
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from src.dnn import Prediction
from src.helpers.constants import METRICS_FILE, PLOT_DATA_FILE, PREDICTIONS_FILE, TIMING_FILE
from src.helpers.enums import Fold
from src.helpers.errors import DimensionError, MetricsError, ReportError

logger = logging.getLogger(__name__)

# stages whose wallclock is compared against the injection campaign
PREDICTION_STAGES = ("embed", "train", "predict")


def _pair(targets, preds) -> Tuple[np.ndarray, np.ndarray]:
    t = np.asarray(targets, dtype=np.float64).reshape(-1)
    p = np.asarray(preds, dtype=np.float64).reshape(-1)
    if t.shape != p.shape:
        raise DimensionError(f"{len(t)} targets against {len(p)} predictions")
    return t, p


def mae(targets, preds) -> float:
    t, p = _pair(targets, preds)
    if len(t) == 0:
        raise MetricsError("mean absolute error of an empty set")
    return float(np.mean(np.abs(t - p)))


def r_squared(targets, preds) -> float:
    """1 - SS_res / SS_tot; negative when the fit is worse than the mean."""
    t, p = _pair(targets, preds)
    if len(t) < 2:
        raise MetricsError("R^2 needs at least two points")
    ss_tot = float(np.sum((t - t.mean()) ** 2))
    if ss_tot == 0.0:
        raise MetricsError("R^2 is undefined for targets without variance")
    return 1.0 - float(np.sum((t - p) ** 2)) / ss_tot


@dataclass(frozen=True)
class PredictionReport:
    rows: Tuple[Prediction, ...]
    fold: Fold
    mae: float
    r2: Optional[float]  # None when the fold has no target variance
    wallclock: Dict[str, float] = field(default_factory=dict)

    def fold_rows(self) -> List[Prediction]:
        return sorted((row for row in self.rows if row.fold is self.fold), key=lambda row: row.name)


def build_report(
    predictions: Sequence[Prediction], fold: Fold = Fold.test, wallclock: Optional[Mapping[str, float]] = None
) -> PredictionReport:
    chosen = [row for row in predictions if row.fold is fold]
    targets = [row.target for row in chosen]
    preds = [row.predicted for row in chosen]
    error = mae(targets, preds)
    try:
        r2 = r_squared(targets, preds)
    except MetricsError as err:
        logger.warning(f"R^2 not reported on the {fold.value} fold: {err}")
        r2 = None
    logger.info(f"{fold.value} fold: {len(chosen)} flip-flops, MAE {error:.6f}, R^2 {r2}")
    return PredictionReport(tuple(predictions), fold, error, r2, dict(wallclock or {}))


def _write_rows(path: str, header: List[str], rows: List[list]):
    try:
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as err:
        raise ReportError(err.strerror or "write failed", path) from err
    logger.info(f"Results written to {path}")


def timing_rows(wallclock: Mapping[str, float]) -> List[list]:
    rows = [[stage, repr(seconds)] for stage, seconds in wallclock.items()]
    if "campaign" in wallclock and any(stage in wallclock for stage in PREDICTION_STAGES):
        campaign = wallclock["campaign"]
        prediction = sum(wallclock.get(stage, 0.0) for stage in PREDICTION_STAGES)
        rows.append(["fault_injection_campaign", repr(campaign)])
        rows.append(["embed_train_predict", repr(prediction)])
        rows.append(["speedup", repr(campaign / prediction) if prediction > 0 else ""])
    return rows


def emit_report(report: PredictionReport, out_dir: str) -> List[str]:
    """Write the report files into out_dir and return their paths."""
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as err:
        raise ReportError(err.strerror or "cannot create directory", out_dir) from err

    written = []
    path = os.path.join(out_dir, PREDICTIONS_FILE)
    ordered = sorted(report.rows, key=lambda row: row.name)
    _write_rows(
        path,
        ["ff_name", "fold", "target_ffr", "predicted_ffr"],
        [[row.name, row.fold.value, repr(row.target), repr(row.predicted)] for row in ordered],
    )
    written.append(path)

    path = os.path.join(out_dir, PLOT_DATA_FILE)
    _write_rows(
        path,
        ["index", "ff_name", "target_ffr", "predicted_ffr"],
        [[i, row.name, repr(row.target), repr(row.predicted)] for i, row in enumerate(report.fold_rows())],
    )
    written.append(path)

    path = os.path.join(out_dir, METRICS_FILE)
    r2 = "" if report.r2 is None else repr(report.r2)
    _write_rows(path, ["fold", "rows", "mae", "r2"], [[report.fold.value, len(report.fold_rows()), repr(report.mae), r2]])
    written.append(path)

    if report.wallclock:
        path = os.path.join(out_dir, TIMING_FILE)
        _write_rows(path, ["stage", "seconds"], timing_rows(report.wallclock))
        written.append(path)
    return written

"""Forecast accuracy metrics and plot-ready data emission.

Metrics pool over every sample and every look-ahead hour jointly. Tolerance
accuracy counts individual predicted points by default; a per-sample variant
(all look-ahead hours within tolerance) is computed alongside in reports.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import WindowedDataset
from .errors import (
    DegenerateActual,
    EmptySplit,
    LengthMismatch,
    UnknownKind,
    ZeroActual,
)
from .features import FeatureSelector
from .ingest import AlignedSeries
from .models import TrainedModel, predict_batch

TOLERANCE_THRESHOLDS = (1.0, 2.0, 3.0, 4.0, 5.0)


def _check_pair(pred, actual):
    pred = np.asarray(pred, dtype=np.float64).reshape(-1)
    actual = np.asarray(actual, dtype=np.float64).reshape(-1)
    if pred.shape != actual.shape:
        raise LengthMismatch(f"pred has {pred.size} points, actual has {actual.size}")
    return pred, actual


def mape(pred, actual) -> float:
    """Mean absolute percentage error, in percent.

    Args:
        pred: predicted megawatt values.
        actual: observed megawatt values, all > 0.

    Returns:
        100 * mean(|pred - actual| / actual) over every point.
    """
    pred, actual = _check_pair(pred, actual)
    if actual.size == 0:
        raise LengthMismatch("empty input")
    if np.any(actual <= 0):
        raise ZeroActual("percentage error undefined for actual <= 0")
    return float(100.0 * np.mean(np.abs(pred - actual) / actual))


def r_squared(pred, actual) -> float:
    """Coefficient of determination: 1 - SS_res / SS_tot.

    Args:
        pred: predicted values.
        actual: observed values; at least 2 points, not all identical.
    """
    pred, actual = _check_pair(pred, actual)
    if actual.size < 2 or np.all(actual == actual[0]):
        raise DegenerateActual("R^2 undefined: actual values are constant or < 2")
    ss_res = float(np.sum((actual - pred) ** 2))
    ss_tot = float(np.sum((actual - actual.mean()) ** 2))
    return 1.0 - ss_res / ss_tot


def absolute_percentage_errors(pred, actual) -> np.ndarray:
    pred, actual = _check_pair(pred, actual)
    if np.any(actual <= 0):
        raise ZeroActual("percentage error undefined for actual <= 0")
    return 100.0 * np.abs(pred - actual) / actual


def tolerance_accuracy(pred, actual,
                       thresholds=TOLERANCE_THRESHOLDS) -> dict[float, float]:
    """Fraction of points whose absolute percentage error is <= each threshold.

    Returns:
        {threshold_pct: fraction in [0, 1]}, non-decreasing in the threshold.
    """
    errors = absolute_percentage_errors(pred, actual)
    if errors.size == 0:
        raise LengthMismatch("empty input")
    return {float(t): float(np.mean(errors <= t)) for t in thresholds}


@dataclass
class EvaluationReport:
    """Pooled accuracy metrics for one model on one split."""

    model_kind: str
    selector: FeatureSelector
    split: str
    n_samples: int
    n_points: int
    mape_pct: float
    r2: float | None
    degenerate_actual: bool
    tolerance: dict[float, float]
    tolerance_per_sample: dict[float, float]
    ape_pct: np.ndarray
    predicted: np.ndarray
    actual: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "model_kind": self.model_kind,
            "selector": self.selector.to_dict(),
            "split": self.split,
            "n_samples": self.n_samples,
            "n_points": self.n_points,
            "mape_pct": self.mape_pct,
            "r2": self.r2,
            "degenerate_actual": self.degenerate_actual,
            "tolerance": {repr(k): v for k, v in self.tolerance.items()},
            "tolerance_per_sample": {repr(k): v for k, v in self.tolerance_per_sample.items()},
            "ape_pct": [float(v) for v in self.ape_pct],
            "predicted": [float(v) for v in self.predicted],
            "actual": [float(v) for v in self.actual],
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "EvaluationReport":
        return cls(
            model_kind=doc["model_kind"],
            selector=FeatureSelector.from_dict(doc["selector"]),
            split=doc["split"],
            n_samples=int(doc["n_samples"]),
            n_points=int(doc["n_points"]),
            mape_pct=float(doc["mape_pct"]),
            r2=None if doc["r2"] is None else float(doc["r2"]),
            degenerate_actual=bool(doc["degenerate_actual"]),
            tolerance={float(k): float(v) for k, v in doc["tolerance"].items()},
            tolerance_per_sample={float(k): float(v)
                                  for k, v in doc["tolerance_per_sample"].items()},
            ape_pct=np.array(doc["ape_pct"], dtype=np.float64),
            predicted=np.array(doc["predicted"], dtype=np.float64),
            actual=np.array(doc["actual"], dtype=np.float64),
        )

    def save_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), sort_keys=True, indent=1))

    @classmethod
    def load_json(cls, path) -> "EvaluationReport":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def evaluate(model: TrainedModel, dataset: WindowedDataset, split: str) -> EvaluationReport:
    """Predict every sample in a split, denormalize, and pool all metrics."""
    inputs, targets = dataset.split_arrays(split)
    if len(inputs) == 0:
        raise EmptySplit(f"{split} split is empty")
    preds = predict_batch(model, inputs)  # (n, t2) MW
    flat_pred = preds.reshape(-1)
    flat_actual = targets.reshape(-1)
    ape = absolute_percentage_errors(flat_pred, flat_actual)
    degenerate = flat_actual.size < 2 or bool(np.all(flat_actual == flat_actual[0]))
    r2 = None if degenerate else r_squared(flat_pred, flat_actual)
    per_point = {float(t): float(np.mean(ape <= t)) for t in TOLERANCE_THRESHOLDS}
    sample_ape = ape.reshape(targets.shape)
    per_sample = {float(t): float(np.mean(np.all(sample_ape <= t, axis=1)))
                  for t in TOLERANCE_THRESHOLDS}
    return EvaluationReport(
        model_kind=model.spec.kind,
        selector=model.selector,
        split=split,
        n_samples=len(inputs),
        n_points=flat_actual.size,
        mape_pct=mape(flat_pred, flat_actual),
        r2=r2,
        degenerate_actual=degenerate,
        tolerance=per_point,
        tolerance_per_sample=per_sample,
        ape_pct=ape,
        predicted=flat_pred,
        actual=flat_actual,
    )


PLOT_KINDS = ("scatter_load_vs_weather", "pred_vs_actual", "error_histogram")


def emit_plot_data(obj, kind: str, path, selector: FeatureSelector | None = None,
                   bins: int = 50) -> None:
    """Write plot-ready CSV data.

    Kinds:
        pred_vs_actual      (EvaluationReport) one row per predicted point.
        error_histogram     (EvaluationReport) bin edges + counts of the
                            absolute percentage errors.
        scatter_load_vs_weather (AlignedSeries) load against each selected
                            weather channel, one row per aligned hour.
    """
    path = Path(path)
    if kind == "pred_vs_actual":
        report: EvaluationReport = obj
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["predicted_mw", "actual_mw"])
            for p, a in zip(report.predicted, report.actual):
                writer.writerow([repr(float(p)), repr(float(a))])
    elif kind == "error_histogram":
        report = obj
        counts, edges = np.histogram(report.ape_pct, bins=bins)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["bin_left_pct", "bin_right_pct", "count"])
            for i, count in enumerate(counts):
                writer.writerow([repr(float(edges[i])), repr(float(edges[i + 1])), int(count)])
    elif kind == "scatter_load_vs_weather":
        series: AlignedSeries = obj
        if selector is None:
            selector = FeatureSelector(include_load=False,
                                       weather_features=("temp", "swrad", "lwrad", "wind"))
        names = [f"z{z}_{w}" for w in selector.weather_features for z in selector.zones]
        from .features import _ZONE_COL  # canonical weather column mapping
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["load_mw"] + names)
            for i in range(len(series)):
                row = [repr(float(series.load_mw[i]))]
                for w in selector.weather_features:
                    col = _ZONE_COL[w]
                    row.extend(repr(float(series.weather[i, z, col])) for z in selector.zones)
                writer.writerow(row)
    else:
        raise UnknownKind(f"unknown plot kind {kind!r}; expected one of {PLOT_KINDS}")

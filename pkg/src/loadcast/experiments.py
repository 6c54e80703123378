"""Experiment harness: named feature/model grids, a resumable runner, and
deterministic table rendering.

Built-in grids:
    table1  four model kinds (svr, fcnn, lstm, lrcn) on all features
    table2  eleven feature combinations on the default LSTM
    table3  the same combinations on a double-width LSTM
    table4  the same combinations on the FCNN
    table5  leave-one-weather-feature-out ablation (each removed from all 8
            zones) plus a time-only row and an all-features FCNN row

Every grid row shares the same window origins, so results are comparable.
Failures are recorded per row; the run continues.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import DEFAULT_FRACTIONS, WindowConfig, build_windows, chronological_split
from .errors import DatasetTooSmall, InvalidConfig, LoadcastError, MissingRows
from .evaluation import TOLERANCE_THRESHOLDS, EvaluationReport, evaluate
from .features import (
    TIME_FEATURES,
    WEATHER_FEATURES,
    FeatureSelector,
    all_features,
    assemble,
)
from .ingest import AlignedSeries
from .models import ModelSpec, save as save_model, train

DEFAULT_SEEDS = (0, 1, 2)
TABLE_STYLES = ("table1", "table2", "table5")


@dataclass(frozen=True)
class GridRow:
    name: str
    selector: FeatureSelector
    spec: ModelSpec


@dataclass(frozen=True)
class ExperimentGrid:
    name: str
    rows: tuple[GridRow, ...]
    window: WindowConfig = WindowConfig()
    fractions: tuple[float, float, float] = DEFAULT_FRACTIONS
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    style: str = "table2"

    def __post_init__(self):
        names = [r.name for r in self.rows]
        if len(set(names)) != len(names):
            raise InvalidConfig(f"duplicate grid row names in {self.name!r}")
        if self.style not in TABLE_STYLES:
            raise InvalidConfig(f"style must be one of {TABLE_STYLES}")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "style": self.style,
            "window": {"t1": self.window.t1, "t2": self.window.t2},
            "split": list(self.fractions),
            "split_mode": "chronological",
            "seeds": list(self.seeds),
            "rows": [
                {"name": r.name, "features": r.selector.to_dict(), "model": r.spec.to_dict()}
                for r in self.rows
            ],
        }


def grid_from_config(doc: dict) -> ExperimentGrid:
    """Build a grid from a parsed JSON document; unknown keys are rejected."""
    known = {"name", "style", "window", "split", "split_mode", "seeds", "rows"}
    unknown = set(doc) - known
    if unknown:
        raise InvalidConfig(f"unknown grid keys: {sorted(unknown)}")
    if "rows" not in doc or not doc["rows"]:
        raise InvalidConfig("grid config needs a non-empty 'rows' list")
    rows = []
    for entry in doc["rows"]:
        extra = set(entry) - {"name", "features", "model"}
        if extra:
            raise InvalidConfig(f"unknown row keys: {sorted(extra)}")
        try:
            selector = FeatureSelector.from_dict(entry.get("features", {}))
        except ValueError as exc:
            raise InvalidConfig(str(exc)) from None
        spec = ModelSpec.from_dict(entry["model"])
        rows.append(GridRow(entry["name"], selector, spec))
    try:
        window = WindowConfig(**doc.get("window", {}))
    except (TypeError, ValueError) as exc:
        raise InvalidConfig(f"window: {exc}") from None
    fractions = tuple(doc.get("split", DEFAULT_FRACTIONS))
    if len(fractions) != 3 or any(f <= 0 for f in fractions) \
            or abs(sum(fractions) - 1.0) > 1e-9:
        raise InvalidConfig(f"split must be 3 positive fractions summing to 1, got {fractions}")
    seeds = tuple(doc.get("seeds", DEFAULT_SEEDS))
    return ExperimentGrid(doc.get("name", "custom"), tuple(rows), window,
                          fractions, seeds, doc.get("style", "table2"))


def _feature_rows() -> list[tuple[str, FeatureSelector]]:
    """The eleven feature combinations used by the sensitivity grids."""
    combos = [
        ("loads_only", (), ()),
        ("load_temp", (), ("temp",)),
        ("load_swrad", (), ("swrad",)),
        ("load_lwrad", (), ("lwrad",)),
        ("load_wind", (), ("wind",)),
        ("load_hour_temp", ("hour",), ("temp",)),
        ("load_hour_month_temp", ("hour", "month"), ("temp",)),
        ("load_hour_month_temp_swrad", ("hour", "month"), ("temp", "swrad")),
        ("load_hour_month_temp_swrad_wind", ("hour", "month"), ("temp", "swrad", "wind")),
        ("load_hour_month_temp_swrad_lwrad_wind", ("hour", "month"),
         ("temp", "swrad", "lwrad", "wind")),
        ("load_hour_dow_month_all_weather", TIME_FEATURES, WEATHER_FEATURES),
    ]
    return [(name, FeatureSelector(time_features=t, weather_features=w))
            for name, t, w in combos]


def builtin_grids() -> dict[str, ExperimentGrid]:
    full = all_features()
    lstm = ModelSpec(kind="lstm")
    fcnn = ModelSpec(kind="fcnn")
    feature_rows = _feature_rows()

    table1 = ExperimentGrid(
        "table1",
        tuple(GridRow(kind, full, ModelSpec(kind=kind))
              for kind in ("svr", "fcnn", "lstm", "lrcn")),
        style="table1",
    )
    table2 = ExperimentGrid(
        "table2", tuple(GridRow(n, s, lstm) for n, s in feature_rows))
    table3 = ExperimentGrid(
        "table3",
        tuple(GridRow(n, s, dataclasses.replace(lstm, width_multiplier=2))
              for n, s in feature_rows))
    table4 = ExperimentGrid(
        "table4", tuple(GridRow(n, s, fcnn) for n, s in feature_rows))

    ablation_rows = [GridRow("all", full, lstm)]
    for removed in WEATHER_FEATURES:
        kept = tuple(w for w in WEATHER_FEATURES if w != removed)
        ablation_rows.append(GridRow(
            f"{removed}_removed",
            FeatureSelector(time_features=TIME_FEATURES, weather_features=kept),
            lstm))
    ablation_rows.append(GridRow(
        "time_only", FeatureSelector(time_features=TIME_FEATURES), lstm))
    ablation_rows.append(GridRow("fcnn", full, fcnn))
    table5 = ExperimentGrid("table5", tuple(ablation_rows), style="table5")

    return {"table1": table1, "table2": table2, "table3": table3,
            "table4": table4, "table5": table5}


@dataclass
class RowSeedResult:
    row: str
    seed: int
    mape_pct: float | None = None
    r2: float | None = None
    tolerance: dict[float, float] | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "mape_pct": self.mape_pct,
            "r2": self.r2,
            "tolerance": None if self.tolerance is None
            else {repr(k): v for k, v in self.tolerance.items()},
            "error": self.error,
        }


@dataclass
class GridReport:
    grid: ExperimentGrid
    results: dict[tuple[str, int], RowSeedResult] = field(default_factory=dict)
    data_hash: str = ""
    config_hash: str = ""
    code_version: str = __version__

    def aggregate(self, row_name: str) -> dict | None:
        """Mean and best metrics over the seeds that succeeded, else None."""
        ok = [self.results[(row_name, s)] for s in self.grid.seeds
              if (row_name, s) in self.results
              and self.results[(row_name, s)].error is None]
        if not ok:
            return None
        mapes = [r.mape_pct for r in ok]
        r2s = [r.r2 for r in ok if r.r2 is not None]
        agg = {
            "seeds_ok": len(ok),
            "mape_mean": float(np.mean(mapes)),
            "mape_best": float(np.min(mapes)),
            "r2_mean": float(np.mean(r2s)) if r2s else None,
            "r2_best": float(np.max(r2s)) if r2s else None,
            "tolerance_mean": {
                t: float(np.mean([r.tolerance[t] for r in ok]))
                for t in TOLERANCE_THRESHOLDS
            },
        }
        return agg

    def to_json_dict(self) -> dict:
        rows = {}
        for row in self.grid.rows:
            per_seed = {}
            for seed in self.grid.seeds:
                result = self.results.get((row.name, seed))
                if result is not None:
                    per_seed[str(seed)] = result.to_dict()
            agg = self.aggregate(row.name)
            if agg is not None:
                agg = dict(agg)
                agg["tolerance_mean"] = {repr(k): v for k, v in agg["tolerance_mean"].items()}
            rows[row.name] = {"per_seed": per_seed, "aggregate": agg}
        return {
            "config": self.grid.to_dict(),
            "config_hash": self.config_hash,
            "data_hash": self.data_hash,
            "code_version": self.code_version,
            "rows": rows,
        }


def _result_from_report(row: str, seed: int, report: EvaluationReport) -> RowSeedResult:
    return RowSeedResult(row, seed, report.mape_pct, report.r2, dict(report.tolerance))


def _run_one(grid: ExperimentGrid, row: GridRow, seed: int, series: AlignedSeries,
             out_dir: Path) -> RowSeedResult:
    row_dir = out_dir / "rows" / row.name / f"seed{seed}"
    model_path = row_dir / "model.lcst"
    report_path = row_dir / "report.json"
    if model_path.exists() and report_path.exists():
        try:
            from .models import load as load_model
            saved = load_model(model_path)  # checksum + structure check
            report = EvaluationReport.load_json(report_path)
            expected_spec = dataclasses.replace(row.spec, seed=seed)
            if (saved.spec == expected_spec and saved.selector == row.selector
                    and report.selector == row.selector):
                return _result_from_report(row.name, seed, report)
        except (LoadcastError, ValueError, KeyError, json.JSONDecodeError):
            pass  # invalid leftovers; retrain below
    try:
        matrix = assemble(series, row.selector)
        raw = build_windows(matrix, series.segments, series.stamps, grid.window)
        ds = chronological_split(raw, grid.fractions)
        spec = dataclasses.replace(row.spec, seed=seed)
        model = train(ds, spec, row.selector)
        report = evaluate(model, ds, "test")
        row_dir.mkdir(parents=True, exist_ok=True)
        save_model(model, model_path)
        report.save_json(report_path)
        return _result_from_report(row.name, seed, report)
    except Exception as exc:  # record per-row failures, keep the run alive
        return RowSeedResult(row.name, seed, error=f"{type(exc).__name__}: {exc}")


def run_grid(grid: ExperimentGrid, series: AlignedSeries, out_dir,
             workers: int = 1) -> GridReport:
    """Train/evaluate every (row, seed), persist artifacts, render tables.

    Rows with existing valid artifacts are skipped, so an interrupted run
    resumes where it stopped.
    """
    span = grid.window.span
    total = sum(max(0, length - span + 1) for _, length in series.segments)
    if total < 3:
        raise DatasetTooSmall(
            f"series yields {total} windows of {span} hours; need at least 3")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    config_doc = grid.to_dict()
    report = GridReport(
        grid,
        data_hash=series.content_hash(),
        config_hash=hashlib.sha256(
            json.dumps(config_doc, sort_keys=True).encode()).hexdigest(),
    )

    jobs = [(row, seed) for row in grid.rows for seed in grid.seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_one, grid, row, seed, series, out_dir)
                       for row, seed in jobs]
            for (row, seed), fut in zip(jobs, futures):
                report.results[(row.name, seed)] = fut.result()
    else:
        for row, seed in jobs:
            report.results[(row.name, seed)] = _run_one(grid, row, seed, series, out_dir)

    (out_dir / "grid.json").write_text(
        json.dumps(report.to_json_dict(), sort_keys=True, indent=1))
    try:
        text, csv_text = render_table(report, grid.style)
    except MissingRows:
        return report  # every row failed; grid.json carries the record
    tables = out_dir / "tables"
    tables.mkdir(exist_ok=True)
    (tables / f"{grid.style}.txt").write_text(text)
    (tables / f"{grid.style}.csv").write_text(csv_text)
    return report


def format_mape(value: float) -> str:
    return f"{value:.3f}%"


def render_table(report: GridReport, style: str) -> tuple[str, str]:
    """Render aggregated grid results; returns (text_table, csv_table)."""
    if style not in TABLE_STYLES:
        raise InvalidConfig(f"style must be one of {TABLE_STYLES}")
    rows = [(r.name, report.aggregate(r.name)) for r in report.grid.rows]
    live = [(name, agg) for name, agg in rows if agg is not None]
    if not live:
        raise MissingRows("no grid row has an aggregated result")

    name_width = max(len(name) for name, _ in live)
    if style in ("table1", "table2"):
        csv_lines = ["row,mape_mean_pct,mape_best_pct,r2_mean,r2_best"]
        text_lines = [f"{'row':<{name_width}}  MAPE      R^2"]
        for name, agg in live:
            r2m = "" if agg["r2_mean"] is None else f"{agg['r2_mean']:.3f}"
            r2b = "" if agg["r2_best"] is None else f"{agg['r2_best']:.3f}"
            csv_lines.append(
                f"{name},{agg['mape_mean']:.3f},{agg['mape_best']:.3f},{r2m},{r2b}")
            text_lines.append(
                f"{name:<{name_width}}  {format_mape(agg['mape_mean']):<8}  {r2m or 'n/a'}")
    else:  # table5
        header = ",".join(f"acc{int(t)}pct" for t in TOLERANCE_THRESHOLDS)
        csv_lines = [f"row,{header},mape_mean_pct"]
        text_lines = [
            f"{'row':<{name_width}}  " +
            "  ".join(f"<={int(t)}%" for t in TOLERANCE_THRESHOLDS) + "   MAPE"]
        for name, agg in live:
            accs = [agg["tolerance_mean"][t] for t in TOLERANCE_THRESHOLDS]
            csv_lines.append(
                f"{name}," + ",".join(f"{100.0 * a:.3f}" for a in accs)
                + f",{agg['mape_mean']:.3f}")
            text_lines.append(
                f"{name:<{name_width}}  "
                + "  ".join(f"{100.0 * a:4.1f}%" for a in accs)
                + f"  {format_mape(agg['mape_mean'])}")
    return "\n".join(text_lines) + "\n", "\n".join(csv_lines) + "\n"

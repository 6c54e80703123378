"""Command-line entry point: ingest, synth, train, evaluate, predict, grid,
and ablate subcommands over file-based artifacts.

All errors print ``error[<Code>]: <message>`` to stderr and exit nonzero;
every command is deterministic given its flags, config, seed, and inputs.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .dataset import WindowConfig, build_windows, chronological_split
from .errors import ConfigError, LoadcastError
from .evaluation import emit_plot_data, evaluate
from .experiments import builtin_grids, grid_from_config, run_grid
from .features import FeatureSelector, all_features, assemble
from .ingest import (
    HourStamp,
    hour_delta,
    load_and_align,
    read_aligned_csv,
    write_aligned_csv,
)
from .models import ModelSpec, load as load_model, predict_at, save as save_model, train
from .synthetic import generate_synthetic

_CONFIG_DEFAULTS = {
    "data": {"aligned": None, "load": None, "weather": None},
    "window": {"t1": 6, "t2": 4},
    "features": all_features().to_dict(),
    "model": {
        "kind": "lstm",
        "fcnn_hidden": [128, 128, 64],
        "lstm_hidden": 64,
        "lstm_layers": 2,
        "conv_filters": 32,
        "conv_kernel": 3,
        "conv_layers": 1,
        "dense_size": 128,
        "dropout": 0.2,
        "width_multiplier": 1,
        "svr_mode": "epsilon",
        "svr_epsilon": 0.01,
        "svr_c": 1.0,
        "svr_lambda": 1e-6,
        "svr_max_iter": 20000,
    },
    "training": {
        "epochs": 200,
        "batch_size": 256,
        "patience": 10,
        "base_lr": 1e-3,
        "lr_decay": 0.96,
        "seed": 0,
    },
    "split": {"train": 0.45, "val": 0.45, "test": 0.10},
    "output": "out",
}


def _merge_section(name: str, defaults: dict, user) -> dict:
    if not isinstance(user, dict):
        raise ConfigError(f"config section {name!r} must be an object")
    unknown = set(user) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown keys in config section {name!r}: {sorted(unknown)}")
    merged = dict(defaults)
    merged.update(user)
    return merged


def resolve_config(doc: dict) -> dict:
    """Fill defaults and reject unknown keys at every level."""
    if not isinstance(doc, dict):
        raise ConfigError("run config must be a JSON object")
    unknown = set(doc) - set(_CONFIG_DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    resolved = {}
    for section, defaults in _CONFIG_DEFAULTS.items():
        if section == "output":
            resolved[section] = doc.get(section, defaults)
            continue
        resolved[section] = _merge_section(section, defaults, doc.get(section, {}))
    return resolved


def _build_run(resolved: dict):
    """Validate a resolved config into (window, selector, spec, fractions)."""
    try:
        window = WindowConfig(**resolved["window"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"window: {exc}") from None
    try:
        selector = FeatureSelector.from_dict(resolved["features"])
    except ValueError as exc:
        raise ConfigError(f"features: {exc}") from None
    spec = ModelSpec.from_dict({**resolved["model"], **resolved["training"]})
    split = resolved["split"]
    fractions = (split["train"], split["val"], split["test"])
    return window, selector, spec, fractions


def _load_series(data: dict):
    if data.get("aligned"):
        return read_aligned_csv(data["aligned"])
    if data.get("load") and data.get("weather"):
        return load_and_align(data["load"], data["weather"])
    raise ConfigError("data section needs 'aligned' or both 'load' and 'weather'")


def _parse_fractions(text: str) -> tuple[float, float, float]:
    parts = [p for p in text.split(",") if p]
    if len(parts) != 3:
        raise ConfigError(f"expected 3 comma-separated fractions, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"bad fraction in {text!r}") from None


def cmd_ingest(args) -> int:
    series = load_and_align(args.load_csv, args.weather_csv)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / "aligned.csv"
    write_aligned_csv(series, out_path)
    gap_hours = 0
    for (s0, l0), (s1, _) in zip(series.segments, series.segments[1:]):
        gap_hours += hour_delta(series.stamps[s0 + l0 - 1], series.stamps[s1]) - 1
    print(f"wrote {out_path}")
    print(f"rows={len(series)} segments={len(series.segments)} gap_hours={gap_hours}")
    return 0


def cmd_synth(args) -> int:
    load_path, weather_path = generate_synthetic(args.years, args.seed, args.out)
    print(f"wrote {load_path}")
    print(f"wrote {weather_path}")
    return 0


def cmd_train(args) -> int:
    doc = json.loads(Path(args.config).read_text())
    resolved = resolve_config(doc)
    if args.seed is not None:
        resolved["training"]["seed"] = args.seed
    if args.out is not None:
        resolved["output"] = args.out
    window, selector, spec, fractions = _build_run(resolved)

    series = _load_series(resolved["data"])
    matrix = assemble(series, selector)
    raw = build_windows(matrix, series.segments, series.stamps, window)
    ds = chronological_split(raw, fractions)
    model = train(ds, spec, selector)

    out_dir = Path(resolved["output"])
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.json").write_text(json.dumps(resolved, sort_keys=True, indent=1))
    model_path = out_dir / "model.lcst"
    save_model(model, model_path)
    with open(out_dir / "history.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_loss", "val_loss"])
        for epoch, tr, va in model.history:
            writer.writerow([epoch, repr(tr), repr(va)])
    print(f"wrote {model_path}")
    print(f"kind={spec.kind} windows={len(ds)} train={ds.n_train} "
          f"val={ds.n_val} test={ds.n_test} epochs_run={len(model.history)}")
    return 0


def cmd_evaluate(args) -> int:
    model = load_model(args.model)
    series = read_aligned_csv(args.aligned_csv)
    matrix = assemble(series, model.selector)
    raw = build_windows(matrix, series.segments, series.stamps, model.window)
    ds = chronological_split(raw, _parse_fractions(args.fractions))
    report = evaluate(model, ds, args.split)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    report.save_json(out_dir / "report.json")
    emit_plot_data(report, "pred_vs_actual", out_dir / "pred_vs_actual.csv")
    emit_plot_data(report, "error_histogram", out_dir / "error_histogram.csv")

    print(f"split={report.split} samples={report.n_samples} points={report.n_points}")
    print(f"MAPE {report.mape_pct:.3f}%")
    print("R^2 " + ("n/a (constant actual)" if report.r2 is None else f"{report.r2:.3f}"))
    accs = "  ".join(f"<={int(t)}%: {100.0 * v:.1f}%" for t, v in sorted(report.tolerance.items()))
    print(f"tolerance accuracy: {accs}")
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    series = read_aligned_csv(args.aligned_csv)
    try:
        at = HourStamp.parse(args.at)
    except ValueError as exc:
        raise ConfigError(f"--at: {exc}") from None
    forecast = predict_at(model, series, at)
    for h, value in enumerate(forecast, start=1):
        print(f"{at.add_hours(h).isoformat()} {value:.3f}")
    return 0


def _resolve_grid(name_or_path: str):
    grids = builtin_grids()
    if name_or_path in grids:
        return grids[name_or_path]
    path = Path(name_or_path)
    if path.exists():
        return grid_from_config(json.loads(path.read_text()))
    raise ConfigError(
        f"unknown grid {name_or_path!r}; builtins: {', '.join(sorted(grids))} "
        "(or pass a JSON grid config path)")


def _run_grid_cmd(grid, args) -> int:
    import dataclasses
    if args.seeds is not None:
        try:
            seeds = tuple(int(s) for s in args.seeds.split(",") if s)
        except ValueError:
            raise ConfigError(f"--seeds must be comma-separated integers, got {args.seeds!r}")
        if not seeds:
            raise ConfigError("--seeds must name at least one seed")
        grid = dataclasses.replace(grid, seeds=seeds)
    series = read_aligned_csv(args.aligned_csv)
    report = run_grid(grid, series, args.out, workers=args.workers)
    failures = [r for r in report.results.values() if r.error is not None]
    print(f"grid={grid.name} rows={len(grid.rows)} seeds={len(grid.seeds)} "
          f"failures={len(failures)}")
    for result in failures:
        print(f"  failed {result.row} seed{result.seed}: {result.error}", file=sys.stderr)
    print(f"tables under {Path(args.out) / 'tables'}")
    return 0


def cmd_grid(args) -> int:
    return _run_grid_cmd(_resolve_grid(args.grid), args)


def cmd_ablate(args) -> int:
    return _run_grid_cmd(builtin_grids()["table5"], args)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loadcast",
        description="Short-term electric load forecasting pipeline.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse, align, and write aligned.csv")
    p.add_argument("load_csv", help="CSV with header timestamp_cst,load_mw")
    p.add_argument("weather_csv", help="CSV with per-zone UTC weather rows")
    p.add_argument("--out", default="out", help="output directory")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("synth", help="generate seeded synthetic load/weather CSVs")
    p.add_argument("--years", type=float, default=1.0, help="series length in years")
    p.add_argument("--seed", type=int, default=0, help="generator seed")
    p.add_argument("--out", default="out", help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train one model from a JSON run config")
    p.add_argument("--config", required=True, help="path to the run config")
    p.add_argument("--seed", type=int, default=None, help="override training.seed")
    p.add_argument("--out", default=None, help="override the output directory")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a saved model on a split")
    p.add_argument("model", help="path to model.lcst")
    p.add_argument("aligned_csv", help="aligned data to window and score")
    p.add_argument("--split", default="test", choices=("train", "val", "test"))
    p.add_argument("--fractions", default="0.45,0.45,0.10",
                   help="train,val,test fractions used to cut the splits")
    p.add_argument("--out", default="out", help="output directory")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("predict", help="forecast the hours after a timestamp")
    p.add_argument("model", help="path to model.lcst")
    p.add_argument("aligned_csv", help="aligned data containing the input hours")
    p.add_argument("--at", required=True,
                   help="last input hour, e.g. 2015-06-01T12:00:00 (CST)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("grid", help="run a builtin or custom experiment grid")
    p.add_argument("grid", help="builtin name (table1..table5) or grid JSON path")
    p.add_argument("aligned_csv", help="aligned data for every grid row")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--seeds", default=None, help="comma-separated seed list override")
    p.add_argument("--workers", type=int, default=1, help="parallel grid rows")
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("ablate", help="run the leave-one-feature-out ablation grid")
    p.add_argument("aligned_csv", help="aligned data for every ablation row")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--seeds", default=None, help="comma-separated seed list override")
    p.add_argument("--workers", type=int, default=1, help="parallel grid rows")
    p.set_defaults(func=cmd_ablate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LoadcastError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error[FileNotFound]: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error[BadJson]: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error[ValueError]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

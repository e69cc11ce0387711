"""Command-line front end: synthesize stations, run experiment sweeps, rank.

Everything in this module is plumbing around the library. A JSON config
declares the (station, horizon, feature-extraction, model) cells; the runner
fans them out over a process pool and serializes results into stable CSV and
JSON report files. Plots are not rendered here: the CSVs are plot-ready.

All randomness flows from one root seed recorded in every output. Cell seeds
are content-addressed (station name, horizon, pca flag, model family), so
results do not depend on worker count or on the order cells are declared.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import zlib
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np

from .dataset import (
    SplitPlan,
    build_supervised,
    interpolate_daily,
    load_station_csv,
    split_by_years,
)
from .evaluation.grids import (
    DISPLAY_NAMES,
    MODEL_FAMILIES,
    PARADIGM,
    build_learner,
)
from .evaluation.gridsearch import grid_search
from .evaluation.ranking import build_ranking
from .preprocess import fit_feature_transform
from .synthgen import DriftSpec, SynthSpec, generate_with_truth, series_to_csv, truth_to_csv

DEFAULT_LAGS = (0, 1, 2, 3, 4, 5, 6)

SELECTION_NOTE = (
    "hyperparameters are selected by hold-out test R2, so scores compare "
    "model families on this data; they are not unbiased deployment estimates"
)


class ConfigError(Exception):
    """Config or usage problem; maps to exit code 2."""


def _pca_label(use_pca: bool) -> str:
    return "PCA" if use_pca else "No PCA"


def _combo_label(model: str, use_pca: bool) -> str:
    return f"{DISPLAY_NAMES[model]}/{_pca_label(use_pca)}"


# ---------------------------------------------------------------------------
# experiment config


@dataclass
class ExperimentConfig:
    stations: list  # (station_id, csv path) pairs, declaration order
    horizons: list
    pca_options: list  # [False], [True], or [False, True]
    models: list
    pretrain_years: list
    train_years: list
    test_years: list
    lags: list
    seed: int
    test_update: bool
    out_dir: Path
    preset: str
    target: str


def _require(raw: dict, key: str):
    if key not in raw:
        raise ConfigError(f"config is missing required field {key!r}")
    return raw[key]


def load_experiment_config(
    path,
    seed: int | None = None,
    out: str | None = None,
    test_update: bool | None = None,
) -> ExperimentConfig:
    """Parse and validate a sweep config; CLI flags override file values."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")

    stations = []
    datasets = _require(raw, "datasets")
    if not isinstance(datasets, list) or not datasets:
        raise ConfigError("'datasets' must be a non-empty list")
    for entry in datasets:
        sid, csv_path = entry.get("station"), entry.get("path")
        if not sid or not csv_path:
            raise ConfigError("each dataset needs 'station' and 'path'")
        if not Path(csv_path).is_file():
            raise ConfigError(f"dataset file not found: {csv_path}")
        stations.append((str(sid), str(csv_path)))
    ids = [s for s, _ in stations]
    if len(set(ids)) != len(ids):
        raise ConfigError("station ids must be unique")

    horizons = _require(raw, "horizons")
    if not isinstance(horizons, list) or not horizons:
        raise ConfigError("'horizons' must be a non-empty list")
    for h in horizons:
        if not isinstance(h, int) or h < 1:
            raise ConfigError(f"horizons must be integers >= 1, got {h!r}")

    pca = raw.get("pca", "off")
    if pca not in ("on", "off", "both"):
        raise ConfigError(f"'pca' must be on, off, or both, got {pca!r}")
    pca_options = {"on": [True], "off": [False], "both": [False, True]}[pca]

    models = raw.get("models", "all")
    if models == "all":
        models = list(MODEL_FAMILIES)
    if not isinstance(models, list) or not models:
        raise ConfigError("'models' must be 'all' or a non-empty list")
    for m in models:
        if m not in MODEL_FAMILIES:
            raise ConfigError(f"unknown model family {m!r}; known: {', '.join(MODEL_FAMILIES)}")
    if len(set(models)) != len(models):
        raise ConfigError("duplicate model family in 'models'")

    split = _require(raw, "split")
    try:
        plan_years = (
            list(split["pretrain_years"]),
            list(split["train_years"]),
            list(split["test_years"]),
        )
        SplitPlan.from_years(*plan_years)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"'split' needs pretrain_years/train_years/test_years lists ({exc})")
    except ValueError as exc:
        raise ConfigError(f"invalid split plan: {exc}")

    lags = raw.get("lags", list(DEFAULT_LAGS))
    if not isinstance(lags, list) or not lags:
        raise ConfigError("'lags' must be a non-empty list")
    for lag in lags:
        if not isinstance(lag, int) or lag < 0:
            raise ConfigError(f"lags must be integers >= 0, got {lag!r}")

    root_seed = seed if seed is not None else raw.get("seed", 0)
    if not isinstance(root_seed, int) or root_seed < 0:
        raise ConfigError(f"seed must be a non-negative integer, got {root_seed!r}")

    if test_update is None:
        test_update = bool(raw.get("test_update", False))

    preset = raw.get("preset", "full")
    if preset not in ("full", "reduced"):
        raise ConfigError(f"'preset' must be full or reduced, got {preset!r}")

    out_dir = out if out is not None else raw.get("out_dir")
    if not out_dir:
        raise ConfigError("output directory required ('out_dir' in config or --out)")
    out_path = Path(out_dir)
    try:
        out_path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"output directory not writable: {exc}")

    return ExperimentConfig(
        stations=stations,
        horizons=list(horizons),
        pca_options=pca_options,
        models=list(models),
        pretrain_years=plan_years[0],
        train_years=plan_years[1],
        test_years=plan_years[2],
        lags=list(lags),
        seed=root_seed,
        test_update=test_update,
        out_dir=out_path,
        preset=preset,
        target=str(raw.get("target", "target")),
    )


def cell_seed(root_seed: int, station: str, horizon: int, use_pca: bool, model: str) -> int:
    """Content-addressed per-cell seed, independent of declaration order."""
    words = [
        root_seed,
        zlib.crc32(station.encode()),
        horizon,
        int(use_pca),
        zlib.crc32(model.encode()),
    ]
    return int(np.random.SeedSequence(words).generate_state(1)[0])


def _make_jobs(config: ExperimentConfig) -> list:
    jobs = []
    for station, path in config.stations:
        for horizon in config.horizons:
            for use_pca in config.pca_options:
                for model in config.models:
                    jobs.append(
                        {
                            "station": station,
                            "path": path,
                            "target": config.target,
                            "horizon": horizon,
                            "use_pca": use_pca,
                            "model": model,
                            "lags": list(config.lags),
                            "pretrain_years": list(config.pretrain_years),
                            "train_years": list(config.train_years),
                            "test_years": list(config.test_years),
                            "preset": config.preset,
                            "test_update": config.test_update,
                            "root_seed": config.seed,
                            "cell_seed": cell_seed(
                                config.seed, station, horizon, use_pca, model
                            ),
                        }
                    )
    return jobs


# ---------------------------------------------------------------------------
# cell execution (must stay module-level and dict-in/dict-out for pickling)


def _run_cell(job: dict) -> dict:
    """Run one (station, horizon, pca, model) grid search; never raises."""
    out = {
        "station": job["station"],
        "horizon": job["horizon"],
        "use_pca": job["use_pca"],
        "model": job["model"],
        "cell_seed": job["cell_seed"],
        "root_seed": job["root_seed"],
        "ok": False,
        "error": None,
        "best": None,
        "entries": [],
        "predictions": None,
        "equation": None,
    }
    try:
        series = load_station_csv(job["path"], job["station"], job["target"])
        daily = interpolate_daily(series)
        frame = build_supervised(daily, horizon=job["horizon"], lags=job["lags"])
        plan = SplitPlan.from_years(
            job["pretrain_years"], job["train_years"], job["test_years"]
        )
        parts = split_by_years(frame, plan)
        transform = fit_feature_transform(parts.pretrain.X, use_pca=job["use_pca"])
        result = grid_search(
            parts,
            job["model"],
            job["horizon"],
            transform,
            preset=job["preset"],
            test_update=job["test_update"],
            seed=job["cell_seed"],
        )
    except Exception as exc:
        out["error"] = f"{type(exc).__name__}: {exc}"
        return out

    for e in result.entries:
        out["entries"].append(
            {
                "index": e.index,
                "params": e.spec.params_dict,
                "metrics": None if e.metrics is None else e.metrics.to_dict(),
                "error": e.error,
            }
        )
    if result.best_index is None:
        out["error"] = f"all {len(result.entries)} configurations failed"
        return out

    log = result.best_log
    out["ok"] = True
    out["best"] = {
        "index": result.best_index,
        "params": result.best_spec.params_dict,
        "label": result.best_spec.label(),
        "metrics": result.best_metrics.to_dict(),
    }
    out["n_failed"] = result.n_failed
    out["predictions"] = {
        "dates": [d.isoformat() for d in log.dates],
        "observed": [float(v) for v in log.observed],
        "predicted": [float(v) for v in log.predicted],
        "cold_start_count": log.cold_start_count,
        "guarded_division_count": log.guarded_division_count,
    }
    if job["model"] == "dome":
        try:
            learner = build_learner(result.best_spec, seed=job["cell_seed"])
            X_fit = transform.transform(
                np.vstack([parts.pretrain.X, parts.train.X])
            )
            y_fit = np.concatenate([parts.pretrain.y, parts.train.y])
            learner.fit(X_fit, y_fit)
            if job["use_pca"]:
                names = [f"pc{i + 1}" for i in range(transform.output_dim)]
            else:
                names = list(frame.feature_names)
            out["equation"] = learner.to_equation(names)
        except Exception as exc:  # equation is a report nicety, not the result
            out["equation"] = f"<unavailable: {type(exc).__name__}: {exc}>"
    return out


def _execute(jobs: list, parallel: int) -> list:
    if parallel <= 1 or len(jobs) <= 1:
        return [_run_cell(j) for j in jobs]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=parallel) as pool:
        return list(pool.map(_run_cell, jobs))


# ---------------------------------------------------------------------------
# report writers (single collector; canonical order)


def _cell_dir(out_root: Path, res: dict) -> Path:
    return (
        out_root
        / "cells"
        / res["station"]
        / f"h{res['horizon']}"
        / ("pca" if res["use_pca"] else "nopca")
        / res["model"]
    )


def _write_cell(out_root: Path, res: dict) -> None:
    d = _cell_dir(out_root, res)
    d.mkdir(parents=True, exist_ok=True)

    with open(d / "grid.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "params", "r2", "mae", "rmse", "n", "error"])
        for e in res["entries"]:
            m = e["metrics"]
            w.writerow(
                [
                    e["index"],
                    json.dumps(e["params"]),
                    "" if m is None else repr(m["r2"]),
                    "" if m is None else repr(m["mae"]),
                    "" if m is None else repr(m["rmse"]),
                    "" if m is None else m["n"],
                    e["error"] or "",
                ]
            )

    if not res["ok"]:
        return

    preds = res["predictions"]
    lines = ["date,observed,predicted"]
    for dt, obs, pred in zip(preds["dates"], preds["observed"], preds["predicted"]):
        lines.append(f"{dt},{obs!r},{pred!r}")
    (d / "predictions.csv").write_text("\n".join(lines) + "\n")

    meta = {
        "station": res["station"],
        "horizon": res["horizon"],
        "feature_extraction": _pca_label(res["use_pca"]),
        "model": res["model"],
        "model_label": DISPLAY_NAMES[res["model"]],
        "paradigm": PARADIGM[res["model"]],
        "best": res["best"],
        "n_configs": len(res["entries"]),
        "n_failed": res["n_failed"],
        "cold_start_count": preds["cold_start_count"],
        "guarded_division_count": preds["guarded_division_count"],
        "cell_seed": res["cell_seed"],
        "root_seed": res["root_seed"],
        "equation": res["equation"],
        "selection_note": SELECTION_NOTE,
    }
    (d / "metrics.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _write_failures(out_root: Path, results: list) -> None:
    with open(out_root / "failures.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["station", "horizon", "feature_extraction", "model", "error"])
        for res in results:
            if not res["ok"]:
                w.writerow(
                    [
                        res["station"],
                        res["horizon"],
                        _pca_label(res["use_pca"]),
                        res["model"],
                        res["error"],
                    ]
                )


def _combo_r2_grid(results: list, horizons: list, stations: list):
    """Average best R2 across stations per combo; drop incomplete combos."""
    by_key = {
        (r["station"], r["horizon"], r["use_pca"], r["model"]): r
        for r in results
    }
    combos_seen = sorted(
        {(r["model"], r["use_pca"]) for r in results},
        key=lambda mu: (MODEL_FAMILIES.index(mu[0]), mu[1]),
    )
    grid = {}
    dropped = []
    for model, use_pca in combos_seen:
        cells = {}
        complete = True
        for h in horizons:
            vals = []
            for station in stations:
                r = by_key.get((station, h, use_pca, model))
                if r is None or not r["ok"]:
                    complete = False
                    break
                vals.append(r["best"]["metrics"]["r2"])
            if not complete:
                break
            cells[h] = float(np.mean(vals))
        if complete:
            grid[_combo_label(model, use_pca)] = cells
        else:
            dropped.append(_combo_label(model, use_pca))
    return grid, dropped


def _write_ranking_csv(path: Path, table) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["overall_rank", "model", "feature_extraction"]
            + [f"rank_h{h}" for h in table.horizons]
            + ["average_rank"]
        )
        for combo, ranks, avg, overall in table.rows():
            model, extraction = combo.rsplit("/", 1)
            w.writerow([overall, model, extraction] + ranks + [f"{avg:.2f}"])


def _write_heatmap(out_root: Path, results: list, stations: list, horizons: list) -> None:
    """Best R2 per (station, horizon) across all combos, plot-ready."""
    with open(out_root / "heatmap.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["station", "horizon", "model", "feature_extraction", "r2"])
        for station in stations:
            for h in horizons:
                best = None
                for r in results:
                    if r["station"] != station or r["horizon"] != h or not r["ok"]:
                        continue
                    if best is None or r["best"]["metrics"]["r2"] > best["best"]["metrics"]["r2"]:
                        best = r
                if best is not None:
                    w.writerow(
                        [
                            station,
                            h,
                            DISPLAY_NAMES[best["model"]],
                            _pca_label(best["use_pca"]),
                            repr(best["best"]["metrics"]["r2"]),
                        ]
                    )


def _write_boxplot(out_root: Path, results: list) -> None:
    """One row per successful cell: distribution-plot source data."""
    with open(out_root / "boxplot.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(
            ["station", "horizon", "model", "feature_extraction", "r2", "mae", "rmse", "n"]
        )
        for r in results:
            if not r["ok"]:
                continue
            m = r["best"]["metrics"]
            w.writerow(
                [
                    r["station"],
                    r["horizon"],
                    DISPLAY_NAMES[r["model"]],
                    _pca_label(r["use_pca"]),
                    repr(m["r2"]),
                    repr(m["mae"]),
                    repr(m["rmse"]),
                    m["n"],
                ]
            )


def _write_summary(out_root: Path, config: ExperimentConfig, results: list,
                   table, dropped: list) -> None:
    n_ok = sum(1 for r in results if r["ok"])
    lines = [
        "experiment sweep summary",
        f"root seed: {config.seed}",
        f"grid preset: {config.preset}",
        f"test_update: {config.test_update}",
        f"stations: {', '.join(s for s, _ in config.stations)}",
        f"horizons: {', '.join(str(h) for h in config.horizons)}",
        f"cells succeeded: {n_ok}/{len(results)}",
        f"note: {SELECTION_NOTE}",
        "",
    ]
    if table is not None:
        lines.append("ranking (combo, per-horizon ranks, average, overall):")
        for combo, ranks, avg, overall in table.rows():
            lines.append(f"  {overall:>2}  {combo:<18} ranks={ranks} avg={avg:.2f}")
    else:
        lines.append("ranking skipped: no combo completed on every station and horizon")
    if dropped:
        lines.append(f"combos dropped from ranking (incomplete): {', '.join(dropped)}")
    equations = [
        (r["station"], r["horizon"], _pca_label(r["use_pca"]), r["equation"])
        for r in results
        if r["ok"] and r["model"] == "dome" and r["equation"]
    ]
    if equations:
        lines.append("")
        lines.append("fitted equations (best DoME config per cell):")
        for station, h, extraction, eq in equations:
            lines.append(f"  {station} h={h} {extraction}: y = {eq}")
    (out_root / "summary.txt").write_text("\n".join(lines) + "\n")


def _write_reports(config: ExperimentConfig, results: list) -> int:
    out_root = config.out_dir
    for res in results:
        _write_cell(out_root, res)
    _write_failures(out_root, results)
    _write_boxplot(out_root, results)
    stations = [s for s, _ in config.stations]
    _write_heatmap(out_root, results, stations, config.horizons)
    grid, dropped = _combo_r2_grid(results, config.horizons, stations)
    table = None
    if grid:
        table = build_ranking(grid, horizons=config.horizons)
        _write_ranking_csv(out_root / "ranking.csv", table)
    for combo in dropped:
        print(f"warning: combo {combo} incomplete; dropped from ranking", file=sys.stderr)
    _write_summary(out_root, config, results, table, dropped)
    n_ok = sum(1 for r in results if r["ok"])
    for res in results:
        if not res["ok"]:
            print(
                f"cell failed: {res['station']}/h{res['horizon']}/"
                f"{_pca_label(res['use_pca'])}/{res['model']}: {res['error']}",
                file=sys.stderr,
            )
    return 0 if n_ok > 0 else 1


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(args) -> int:
    p = Path(args.config)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    entries = raw.get("stations", [raw]) if isinstance(raw, dict) else None
    if not isinstance(entries, list) or not entries:
        raise ConfigError("synth config must be a station object or {'stations': [...]}")

    specs = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise ConfigError("each station entry must be a JSON object")
        fields = dict(entry)
        drift_raw = fields.pop("drift", None)
        if drift_raw is not None:
            drift_fields = dict(drift_raw)
            flip = drift_fields.get("flip_date")
            if flip is not None:
                drift_fields["flip_date"] = date.fromisoformat(flip)
            try:
                fields["drift"] = DriftSpec(**drift_fields)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"station {i}: bad drift spec: {exc}")
        if args.seed is not None:
            fields["seed"] = int(
                np.random.SeedSequence([args.seed, i]).generate_state(1)[0]
            )
        try:
            specs.append(SynthSpec(**fields))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"station {i}: bad spec: {exc}")

    # Generate everything before touching the filesystem: an error midway
    # must not leave partial output behind.
    rendered = []
    for spec in specs:
        series, truth, _latent = generate_with_truth(spec)
        echo = {
            "station_id": spec.station_id,
            "seed": spec.seed,
            "start_year": spec.start_year,
            "n_years": spec.n_years,
            "n_station_features": spec.n_station_features,
            "n_section_features": spec.n_section_features,
            "baseline": spec.baseline,
            "seasonal_amplitude": spec.seasonal_amplitude,
            "bloom_rate": spec.bloom_rate,
            "bloom_magnitude_mu": spec.bloom_magnitude_mu,
            "bloom_magnitude_sigma": spec.bloom_magnitude_sigma,
            "feature_noise": spec.feature_noise,
            "target_noise": spec.target_noise,
            "sampling": spec.sampling,
            "drift": {
                "kind": spec.drift.kind,
                "shift_days": spec.drift.shift_days,
                "start_year": spec.drift.start_year,
                "flip_date": spec.drift.flip_date.isoformat()
                if spec.drift.flip_date
                else None,
            },
        }
        rendered.append(
            (
                spec.station_id,
                series_to_csv(series),
                truth_to_csv(series.dates, truth),
                json.dumps(echo, indent=2, sort_keys=True) + "\n",
            )
        )

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for station_id, series_csv, truth_csv, spec_json in rendered:
        (out_dir / f"{station_id}.csv").write_text(series_csv)
        (out_dir / f"{station_id}_truth.csv").write_text(truth_csv)
        (out_dir / f"{station_id}_spec.json").write_text(spec_json)
        print(f"wrote {out_dir / (station_id + '.csv')}")
    return 0


def cmd_run(args) -> int:
    config = load_experiment_config(
        args.config,
        seed=args.seed,
        out=args.out,
        test_update=True if args.test_update else None,
    )
    jobs = _make_jobs(config)
    results = _execute(jobs, args.parallel)
    return _write_reports(config, results)


def cmd_grid(args) -> int:
    """Run the hyperparameter grid for one cell of the config."""
    config = load_experiment_config(
        args.config,
        seed=args.seed,
        out=args.out,
        test_update=True if args.test_update else None,
    )
    station_ids = [s for s, _ in config.stations]
    station = args.station or station_ids[0]
    if station not in station_ids:
        raise ConfigError(f"station {station!r} not in config datasets")
    if args.model not in MODEL_FAMILIES:
        raise ConfigError(f"unknown model family {args.model!r}")
    if args.horizon < 1:
        raise ConfigError(f"horizon must be >= 1, got {args.horizon}")
    use_pca = args.pca == "on"

    single = ExperimentConfig(
        stations=[(station, dict(config.stations)[station])],
        horizons=[args.horizon],
        pca_options=[use_pca],
        models=[args.model],
        pretrain_years=config.pretrain_years,
        train_years=config.train_years,
        test_years=config.test_years,
        lags=config.lags,
        seed=config.seed,
        test_update=config.test_update,
        out_dir=config.out_dir,
        preset=config.preset,
        target=config.target,
    )
    results = _execute(_make_jobs(single), args.parallel)
    return _write_reports(single, results)


def cmd_rank(args) -> int:
    """Re-rank an existing results tree (pure aggregation, no model runs)."""
    root = Path(args.results_dir)
    cells = root / "cells"
    if not cells.is_dir():
        raise ConfigError(f"no cells/ directory under {root}")
    records = []
    for metrics_path in sorted(cells.glob("*/h*/*/*/metrics.json")):
        meta = json.loads(metrics_path.read_text())
        records.append(
            (
                meta["station"],
                int(meta["horizon"]),
                meta["feature_extraction"],
                meta["model_label"],
                float(meta["best"]["metrics"]["r2"]),
            )
        )
    if not records:
        raise ConfigError(f"no metrics.json files found under {cells}")

    stations = sorted({r[0] for r in records})
    horizons = sorted({r[1] for r in records})
    combos = sorted({(r[3], r[2]) for r in records})
    by_key = {(r[0], r[1], r[2], r[3]): r[4] for r in records}

    missing = []
    for model, extraction in combos:
        for station in stations:
            for h in horizons:
                if (station, h, extraction, model) not in by_key:
                    missing.append(f"{station}/h{h}/{extraction}/{model}")
    if missing:
        raise ConfigError(
            "results grid is incomplete; missing cells: " + ", ".join(missing)
        )

    grid = {}
    for model, extraction in combos:
        grid[f"{model}/{extraction}"] = {
            h: float(
                np.mean([by_key[(s, h, extraction, model)] for s in stations])
            )
            for h in horizons
        }
    table = build_ranking(grid, horizons=horizons)
    out_path = Path(args.out) if args.out else root / "ranking.csv"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    _write_ranking_csv(out_path, table)
    print(f"wrote {out_path}")
    return 0


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bloomcast",
        description="Algal-bloom forecasting experiments: synthesize, sweep, rank.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate synthetic station CSVs")
    p_synth.add_argument("--config", required=True, help="station spec JSON")
    p_synth.add_argument("--out", required=True, help="output directory")
    p_synth.add_argument("--seed", type=int, default=None, help="override station seeds")
    p_synth.set_defaults(func=cmd_synth)

    p_run = sub.add_parser("run", help="run the full experiment sweep")
    p_run.add_argument("--config", required=True, help="experiment config JSON")
    p_run.add_argument("--out", default=None, help="override config output directory")
    p_run.add_argument("--seed", type=int, default=None, help="override root seed")
    p_run.add_argument("--parallel", type=int, default=1, help="worker processes")
    p_run.add_argument("--test-update", action="store_true",
                       help="let stream learners keep training during the test year")
    p_run.set_defaults(func=cmd_run)

    p_grid = sub.add_parser("grid", help="run one model family's grid on one cell")
    p_grid.add_argument("--config", required=True, help="experiment config JSON")
    p_grid.add_argument("--model", required=True, help="model family key")
    p_grid.add_argument("--horizon", type=int, required=True)
    p_grid.add_argument("--station", default=None, help="default: first dataset")
    p_grid.add_argument("--pca", choices=("on", "off"), default="off")
    p_grid.add_argument("--out", default=None)
    p_grid.add_argument("--seed", type=int, default=None)
    p_grid.add_argument("--parallel", type=int, default=1)
    p_grid.add_argument("--test-update", action="store_true")
    p_grid.set_defaults(func=cmd_grid)

    p_rank = sub.add_parser("rank", help="aggregate a results tree into ranking.csv")
    p_rank.add_argument("results_dir", help="directory written by 'run'")
    p_rank.add_argument("--out", default=None, help="ranking.csv path")
    p_rank.set_defaults(func=cmd_rank)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Declarative experiment runner: config validation, trial grid execution,
aggregation and artifact emission.

A run is a JSON config describing one scenario, a grid of true proportions, a
seed count and a list of estimators; every (proportion, seed) cell draws its
data from a stream derived purely from the cell coordinates, so results do
not depend on execution order or on the number of worker processes.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence

import jsonschema
import numpy as np

from .errors import ConfigError, MpeError
from .estimators import (
    BaseEstimatorSpec,
    ClassifierParams,
    HistogramParams,
    estimate_kappa_max,
    rempe2_empirical,
    sumpe,
)
from .experiments import ALPHA_MODES, SCENARIOS, build_trial
from .learner import TrainConfig
from .plotting import render_mae_plot
from .sampling import RngStream, SpectrumSpec

# Mean bias below this magnitude is tagged "·" (neither sign) in summaries.
SIGN_TOL = 5e-4

VARIANTS = ("base", "rempe2", "sumpe")

_TRAIN_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "epochs": {"type": "integer", "minimum": 1},
        "learning_rate": {"type": "number", "exclusiveMinimum": 0},
        "l2": {"type": "number", "minimum": 0},
        "batch_size": {"type": ["integer", "null"], "minimum": 1},
        "seed": {"type": "integer"},
        "architecture": {"enum": ["logistic", "mlp"]},
        "hidden": {"type": "integer", "minimum": 1},
        "degree": {"type": "integer", "minimum": 1},
        "optimizer": {"enum": ["gd", "adam"]},
    },
}

_ESTIMATOR_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["histogram_ratio", "classifier_ratio"]},
        "tag": {"type": "string"},
        "bins": {"type": "integer", "minimum": 2},
        "edges": {"type": "array", "items": {"type": "number"}, "minItems": 3},
        "tau": {"type": "integer", "minimum": 1},
        "delta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "corrected": {"type": "boolean"},
        "aggregation": {"enum": ["min", "quantile", "mean"]},
        "q": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "train": _TRAIN_SCHEMA,
    },
}

_SCENARIO_PARAMS_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "spectrum": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                f.name: {"type": ["number", "integer", "null"]}
                for f in dataclasses.fields(SpectrumSpec)
            },
        },
        "path": {"type": "string"},
        "threshold": {"type": "number", "minimum": 0, "maximum": 1},
        "propensity": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "train": _TRAIN_SCHEMA,
    },
}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["scenario"],
    "properties": {
        "scenario": {"enum": list(SCENARIOS)},
        "kappa_grid": {
            "type": "array",
            "items": {"type": "number", "minimum": 0, "maximum": 1},
            "minItems": 1,
        },
        "m": {"type": "integer", "minimum": 1},
        "n": {"type": "integer", "minimum": 1},
        "seeds": {"type": "integer", "minimum": 1},
        "base_seed": {"type": "integer"},
        "variants": {
            "type": "array",
            "items": {"enum": list(VARIANTS)},
            "minItems": 1,
        },
        "estimators": {"type": "array", "items": _ESTIMATOR_SCHEMA, "minItems": 1},
        "alpha_mode": {"enum": list(ALPHA_MODES)},
        "rempe_fraction": {"type": "number", "minimum": 0, "maximum": 0.5},
        "timing": {"type": "boolean"},
        "scenario_params": _SCENARIO_PARAMS_SCHEMA,
    },
}

_DEFAULTS = {
    "kappa_grid": [0.1, 0.25, 0.5, 0.75],
    "m": 1000,
    "n": 1000,
    "seeds": 10,
    "base_seed": 0,
    "variants": ["base", "sumpe"],
    "estimators": [{"kind": "histogram_ratio"}],
    "alpha_mode": "plugin",
    "rempe_fraction": 0.1,
    "timing": False,
    "scenario_params": {},
}


@dataclass(frozen=True)
class TrialReport:
    """One estimator run on one generated dataset."""

    scenario: str
    kappa_star: float
    seed: int
    estimator: str
    variant: str
    kappa_hat: Optional[float]
    c_hat: Optional[float]
    abs_error: Optional[float]
    wall_ms: Optional[float] = None
    error: str = ""


def normalize_config(config: dict) -> dict:
    """Validate against the schema and fill defaults; raises ConfigError."""
    try:
        jsonschema.validate(config, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid config: {exc.message}") from exc
    cfg = dict(_DEFAULTS)
    cfg.update(config)
    tags = []
    for i, est in enumerate(cfg["estimators"]):
        spec = _estimator_spec(est, i)
        if spec.tag in tags:
            raise ConfigError(f"duplicate estimator tag {spec.tag!r}")
        tags.append(spec.tag)
    return cfg


def load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return normalize_config(raw)


def _train_config(obj: Optional[dict]) -> TrainConfig:
    return TrainConfig(**obj) if obj else TrainConfig()


def _estimator_spec(obj: dict, index: int) -> BaseEstimatorSpec:
    kind = obj["kind"]
    tag = obj.get("tag") or f"{kind.split('_')[0]}{index}"
    hist_keys = {"bins", "tau", "delta", "corrected", "edges"}
    clf_keys = {"aggregation", "q", "train"}
    given = set(obj) - {"kind", "tag"}
    wrong = given - (hist_keys if kind == "histogram_ratio" else clf_keys)
    if wrong:
        raise ConfigError(f"estimator {tag}: keys {sorted(wrong)} not valid for {kind}")
    if kind == "histogram_ratio":
        kwargs = {k: obj[k] for k in hist_keys & given}
        if "edges" in kwargs:
            kwargs["edges"] = tuple(kwargs["edges"])
        return BaseEstimatorSpec(kind, histogram=HistogramParams(**kwargs), tag=tag)
    clf = ClassifierParams(
        train=_train_config(obj.get("train")),
        **{k: obj[k] for k in ("aggregation", "q") if k in obj},
    )
    return BaseEstimatorSpec(kind, classifier=clf, tag=tag)


def _builder_params(cfg: dict) -> dict:
    params = dict(cfg.get("scenario_params") or {})
    out = {}
    if "train" in params:
        out["train_config"] = _train_config(params.pop("train"))
    if "spectrum" in params:
        spec_kwargs = {k: v for k, v in params.pop("spectrum").items()}
        if cfg["scenario"] != "gamma":
            raise ConfigError("'spectrum' params only apply to the gamma scenario")
        out["spec"] = SpectrumSpec(**spec_kwargs)
    for key in ("path", "threshold", "propensity"):
        if key in params:
            out[key] = params.pop(key)
    return out


def run_cell(cfg: dict, ki: int, seed: int, timing: bool = False) -> List[TrialReport]:
    """Run every estimator and variant on the dataset of one grid cell."""
    kappa_star = float(cfg["kappa_grid"][ki])
    scenario = cfg["scenario"]
    cell = RngStream(int(cfg["base_seed"])).split(ki).split(seed)
    reports: List[TrialReport] = []
    try:
        params = _builder_params(cfg)
        if scenario == "reporting":
            params.setdefault("propensity", 0.7)
        trial = build_trial(
            scenario, kappa_star, cfg["m"], cfg["n"], cfg["alpha_mode"], cell, params
        )
    except Exception as exc:  # a broken cell must not abort the grid
        for i, est in enumerate(cfg["estimators"]):
            spec = _estimator_spec(est, i)
            for variant in cfg["variants"]:
                reports.append(
                    TrialReport(
                        scenario, kappa_star, seed, spec.tag, variant,
                        None, None, None, None, f"data: {exc}",
                    )
                )
        return reports
    for i, est in enumerate(cfg["estimators"]):
        spec = _estimator_spec(est, i)
        est_stream = cell.split(10 + i)
        for variant in cfg["variants"]:
            start = time.perf_counter()
            try:
                if variant == "base":
                    result = estimate_kappa_max(
                        trial.x_f, trial.x_h, spec, est_stream.split(1)
                    )
                elif variant == "sumpe":
                    result = sumpe(trial.x_f, trial.x_h, trial.alpha, spec, est_stream)
                else:
                    result = rempe2_empirical(
                        trial.x_f, trial.x_h, spec,
                        p=cfg["rempe_fraction"], rng=est_stream,
                    )
                wall = (time.perf_counter() - start) * 1e3 if timing else None
                reports.append(
                    TrialReport(
                        scenario, kappa_star, seed, spec.tag, variant,
                        result.kappa_hat, result.c_hat,
                        abs(result.kappa_hat - kappa_star), wall,
                    )
                )
            except Exception as exc:
                reports.append(
                    TrialReport(
                        scenario, kappa_star, seed, spec.tag, variant,
                        None, None, None, None, str(exc),
                    )
                )
    return reports


def _cell_worker(args) -> List[TrialReport]:
    return run_cell(*args)


def run_experiment(config: dict, jobs: int = 1) -> List[TrialReport]:
    """Execute the full (proportion, seed, estimator, variant) grid."""
    cfg = normalize_config(config)
    cells = [
        (cfg, ki, seed, cfg["timing"])
        for ki in range(len(cfg["kappa_grid"]))
        for seed in range(cfg["seeds"])
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            per_cell = list(pool.map(_cell_worker, cells))
    else:
        per_cell = [run_cell(*args) for args in cells]
    return [r for chunk in per_cell for r in chunk]


def aggregate(reports: Sequence[TrialReport]) -> List[dict]:
    """Seed-wise summary per (scenario, proportion, estimator, variant)."""
    groups = {}
    for r in reports:
        if r.error:
            continue
        key = (r.scenario, r.kappa_star, r.estimator, r.variant)
        groups.setdefault(key, []).append(r.kappa_hat - r.kappa_star)
    rows = []
    for (scenario, kappa_star, estimator, variant), errs in sorted(groups.items()):
        arr = np.asarray(errs)
        bias = float(arr.mean())
        if bias > SIGN_TOL:
            sign = "+"
        elif bias < -SIGN_TOL:
            sign = "-"
        else:
            sign = "·"
        stderr = float(arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size > 1 else 0.0
        rows.append(
            {
                "scenario": scenario,
                "kappa_star": kappa_star,
                "estimator": estimator,
                "variant": variant,
                "mae": float(np.abs(arr).mean()),
                "bias": bias,
                "sign": sign,
                "stderr": stderr,
                "seeds": int(arr.size),
            }
        )
    return rows


CSV_COLUMNS = (
    "scenario", "kappa_star", "seed", "estimator", "variant",
    "kappa_hat", "c_hat", "abs_error", "wall_ms", "error",
)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit(
    reports: Sequence[TrialReport],
    summary: Sequence[dict],
    out_dir: str,
    config: Optional[dict] = None,
) -> dict:
    """Write trials.csv, summary.json, per-scenario SVG plots and the echoed
    config; returns a mapping of artifact names to paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    trials_path = os.path.join(out_dir, "trials.csv")
    try:
        with open(trials_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for r in reports:
                writer.writerow([_fmt(getattr(r, col)) for col in CSV_COLUMNS])
    except OSError as exc:
        raise MpeError(f"cannot write {trials_path}: {exc}") from exc
    paths["trials"] = trials_path

    summary_path = os.path.join(out_dir, "summary.json")
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump({"rows": list(summary)}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths["summary"] = summary_path

    for scenario in sorted({row["scenario"] for row in summary}):
        plot_path = os.path.join(out_dir, f"{scenario}_plot.svg")
        render_mae_plot(summary, scenario, plot_path)
        paths[f"{scenario}_plot"] = plot_path

    if config is not None:
        echo_path = os.path.join(out_dir, "config_echo.json")
        with open(echo_path, "w", encoding="utf-8") as fh:
            json.dump(normalize_config(config), fh, indent=2, sort_keys=True)
            fh.write("\n")
        paths["config_echo"] = echo_path
    return paths


def load_trials(path: str) -> List[TrialReport]:
    """Parse a trials.csv back into reports (round trip of ``emit``)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != list(CSV_COLUMNS):
            raise MpeError(f"{path}: unexpected columns {reader.fieldnames}")
        out = []
        for row in reader:
            out.append(
                TrialReport(
                    scenario=row["scenario"],
                    kappa_star=float(row["kappa_star"]),
                    seed=int(row["seed"]),
                    estimator=row["estimator"],
                    variant=row["variant"],
                    kappa_hat=float(row["kappa_hat"]) if row["kappa_hat"] else None,
                    c_hat=float(row["c_hat"]) if row["c_hat"] else None,
                    abs_error=float(row["abs_error"]) if row["abs_error"] else None,
                    wall_ms=float(row["wall_ms"]) if row["wall_ms"] else None,
                    error=row["error"],
                )
            )
    return out

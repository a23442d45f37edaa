"""Task-level metric suites split by partition (in / shifted / full).

Per-record work (errors and uncertainties) may be spread across a thread
pool; results are collected in record order and every reduction happens
afterwards in that order, so output does not depend on the worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import regression as reg
from . import translation as tr
from .core import Partition, RegressionRecord, TrajectoryRecord, TranslationRecord
from .errors import ConfigError
from .io import CurveSet, write_curve_csv, write_curve_svg, write_json
from .retention import (
    Ordering,
    RetentionCurve,
    ScoredSample,
    error_retention_curve,
    f1_at,
    f1_retention_curve,
    roc_auc,
    subsample_curve,
)
from .trajectory import TRAJECTORY_ERRORS, trajectory_errors

PARTITIONS = ("in", "shifted", "full")
F1_RETENTION = 0.95


def _map(fn: Callable, items: Sequence, workers: int) -> list:
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def split(samples: Sequence[ScoredSample]) -> dict[str, list[ScoredSample]]:
    return {
        "in": [s for s in samples if s.tag.partition is Partition.IN_DOMAIN],
        "shifted": [s for s in samples if s.tag.partition is Partition.SHIFTED],
        "full": list(samples),
    }


@dataclass
class Report:
    task: str
    counts: dict[str, int]
    settings: dict
    metrics: dict[str, dict[str, float | None]] = field(default_factory=dict)
    curves: dict[str, CurveSet] = field(default_factory=dict)

    def set(self, name: str, partition: str, value: float | None) -> None:
        self.metrics.setdefault(name, {p: None for p in PARTITIONS})[partition] = (
            None if value is None else float(value)
        )

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "counts": self.counts,
            "settings": self.settings,
            "metrics": self.metrics,
        }

    def write(self, out_dir: str | Path, f1_grid: str = "exact", plots: bool = True) -> None:
        out = Path(out_dir)
        curve_dir = out / "curves"
        curve_dir.mkdir(parents=True, exist_ok=True)
        write_json(self.to_dict(), out / "metrics.json")
        write_curves(self.curves, curve_dir, f1_grid, plots)


def write_curves(curves: dict[str, CurveSet], curve_dir: Path, f1_grid: str = "exact", plots: bool = True) -> None:
    def grid(c: RetentionCurve) -> RetentionCurve:
        return c if f1_grid == "exact" else subsample_curve(c, int(f1_grid))

    curve_dir.mkdir(parents=True, exist_ok=True)
    for name, cs in curves.items():
        write_curve_csv(grid(cs.model), curve_dir / f"{name}.csv")
        write_curve_csv(grid(cs.random), curve_dir / f"{name}__random.csv")
        write_curve_csv(grid(cs.optimal), curve_dir / f"{name}__optimal.csv")
        if plots:
            shown = CurveSet(cs.title, cs.ylabel, grid(cs.model), grid(cs.random), grid(cs.optimal))
            write_curve_svg(shown, curve_dir / f"{name}.svg")


def retention_suite(
    samples: Sequence[ScoredSample],
    threshold: float,
    seed: int,
    label: str,
    error_name: str,
) -> tuple[dict[str, float], dict[str, CurveSet]]:
    """R-AUC, F1-AUC, F1@95% and their baselines for one set of samples."""
    err = error_retention_curve(samples, Ordering.BY_UNCERTAINTY)
    err_rand = error_retention_curve(samples, Ordering.RANDOM, seed)
    err_opt = error_retention_curve(samples, Ordering.OPTIMAL)
    f1 = f1_retention_curve(samples, threshold, Ordering.BY_UNCERTAINTY)
    f1_rand = f1_retention_curve(samples, threshold, Ordering.RANDOM, seed)
    f1_opt = f1_retention_curve(samples, threshold, Ordering.OPTIMAL)
    metrics = {
        "r_auc": err.auc,
        "r_auc_random": err_rand.auc,
        "r_auc_optimal": err_opt.auc,
        "f1_auc": f1.auc,
        "f1_auc_random": f1_rand.auc,
        "f1_auc_optimal": f1_opt.auc,
        "f1_at_95": f1_at(f1, F1_RETENTION),
        "error_at_95": f1_at(err, F1_RETENTION),
    }
    curves = {
        f"{label}__error": CurveSet(f"{label} error retention", error_name, err, err_rand, err_opt),
        f"{label}__f1": CurveSet(f"{label} F1 retention", f"F1 ({error_name} < {threshold:g})", f1, f1_rand, f1_opt),
    }
    return metrics, curves


def _add_retention(report: Report, samples: list[ScoredSample], prefix: str, threshold: float, seed: int, error_name: str):
    for part, subset in split(samples).items():
        if not subset:
            continue
        label = f"{part}__{prefix}" if prefix else part
        metrics, curves = retention_suite(subset, threshold, seed, label, error_name)
        for name, value in metrics.items():
            report.set(f"{prefix}/{name}" if prefix else name, part, value)
        report.curves.update(curves)
    try:
        auc = roc_auc(samples)
    except ValueError:
        auc = None
    report.set(f"{prefix}/roc_auc" if prefix else "roc_auc", "full", auc)


def _counts(tags) -> dict[str, int]:
    shifted = sum(t.partition is Partition.SHIFTED for t in tags)
    return {"in": len(tags) - shifted, "shifted": shifted, "full": len(tags)}


def _partition_means(report: Report, name: str, values: np.ndarray, shifted: np.ndarray, scale: float = 1.0) -> None:
    for part, mask in (("in", ~shifted), ("shifted", shifted), ("full", np.ones_like(shifted))):
        if mask.any():
            report.set(name, part, scale * float(np.mean(values[mask])))


def evaluate_regression(
    records: Sequence[RegressionRecord], threshold: float = reg.ACCEPTABLE_MSE, seed: int = 0, workers: int = 1
) -> Report:
    rows = _map(lambda r: (reg.ensemble_mean(r) - r.target, reg.uncertainty_measures(r, seed)), records, workers)
    report = Report("regression", _counts([r.tag for r in records]), {"threshold": threshold, "seed": seed, "retention_error": "mse"})
    err = np.array([e for e, _ in rows])
    shifted = np.array([r.tag.shifted for r in records], dtype=bool)
    for part, mask in (("in", ~shifted), ("shifted", shifted), ("full", np.ones_like(shifted))):
        if mask.any():
            report.set("rmse", part, float(np.sqrt(np.mean(err[mask] ** 2))))
            report.set("mae", part, float(np.mean(np.abs(err[mask]))))
    for kind in reg.UncertaintyMeasureKind:
        samples = [
            ScoredSample(r.id, e * e, u[kind.value], r.tag) for r, (e, u) in zip(records, rows)
        ]
        _add_retention(report, samples, kind.value, threshold, seed, "MSE")
    return report


def evaluate_trajectory(
    records: Sequence[TrajectoryRecord],
    threshold: float | None,
    seed: int = 0,
    workers: int = 1,
    retention_error: str = "weighted_ade",
) -> Report:
    if threshold is None:
        raise ConfigError("--threshold is required for trajectory records (no default acceptability threshold)")
    kept = [r for r in records if not r.skip]
    report = Report(
        "trajectory",
        {**_counts([r.tag for r in kept]), "skipped": len(records) - len(kept)},
        {"threshold": threshold, "seed": seed, "retention_error": retention_error},
    )
    if not kept:
        return report
    rows = _map(trajectory_errors, kept, workers)
    shifted = np.array([r.tag.shifted for r in kept], dtype=bool)
    for name in TRAJECTORY_ERRORS:
        _partition_means(report, name, np.array([row[name] for row in rows]), shifted)
    samples = [ScoredSample(r.id, row[retention_error], r.request_uncertainty, r.tag) for r, row in zip(kept, rows)]
    _add_retention(report, samples, "", threshold, seed, retention_error)
    return report


def evaluate_translation(
    records: Sequence[TranslationRecord], threshold: float | None, seed: int = 0, workers: int = 1
) -> Report:
    if threshold is None:
        raise ConfigError("--threshold is required for translation records (no default acceptability threshold)")
    report = Report(
        "translation", _counts([r.tag for r in records]), {"threshold": threshold, "seed": seed, "retention_error": "egleu_error"}
    )
    rows = _map(lambda r: (tr.hypothesis_scores(r), tr.record_uncertainty(r)), records, workers)
    expected = np.array([float(np.dot(r.weights, g)) for r, (g, _) in zip(records, rows)])
    best = np.array([g.max() for g, _ in rows])
    shifted = np.array([r.tag.shifted for r in records], dtype=bool)
    _partition_means(report, "egleu", expected, shifted, 100.0)
    _partition_means(report, "max_gleu", best, shifted, 100.0)
    for part, values in report.metrics["egleu"].items():
        report.set("egleu_error", part, None if values is None else 100.0 - values)
    samples = [
        ScoredSample(r.id, max(100.0 - 100.0 * e, 0.0), u, r.tag) for r, e, (_, u) in zip(records, expected, rows)
    ]
    _add_retention(report, samples, "", threshold, seed, "eGLEU error")
    return report


def evaluate(records: Sequence, threshold: float | None = None, seed: int = 0, workers: int = 1) -> Report:
    if not records:
        raise ConfigError("no records to evaluate")
    first = records[0]
    if isinstance(first, RegressionRecord):
        return evaluate_regression(records, reg.ACCEPTABLE_MSE if threshold is None else threshold, seed, workers)
    if isinstance(first, TrajectoryRecord):
        return evaluate_trajectory(records, threshold, seed, workers)
    return evaluate_translation(records, threshold, seed, workers)


def scored_samples(records: Sequence, metric: str, uncertainty_kind: str = "tvar", seed: int = 0) -> list[ScoredSample]:
    """(error, uncertainty) pairs for one named error metric, for curve-only runs."""
    first = records[0]
    if isinstance(first, RegressionRecord):
        if metric != "mse":
            raise ConfigError(f"regression retention metric must be 'mse', got {metric!r}")
        kind = reg.UncertaintyMeasureKind(uncertainty_kind)
        return [ScoredSample(r.id, reg.per_sample_mse(r), reg.uncertainty(r, kind, seed), r.tag) for r in records]
    if isinstance(first, TrajectoryRecord):
        if metric not in TRAJECTORY_ERRORS:
            raise ConfigError(f"trajectory metric must be one of {sorted(TRAJECTORY_ERRORS)}, got {metric!r}")
        fn = TRAJECTORY_ERRORS[metric]
        return [ScoredSample(r.id, fn(r), r.request_uncertainty, r.tag) for r in records if not r.skip]
    if metric != "egleu_error":
        raise ConfigError(f"translation retention metric must be 'egleu_error', got {metric!r}")
    return [ScoredSample(r.id, tr.record_egleu_error(r), tr.record_uncertainty(r), r.tag) for r in records]

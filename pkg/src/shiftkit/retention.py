"""Error- and F1-retention curves, their areas, and ROC-AUC shift detection.

A retention curve replaces predictions with ground truth (zero error) in
order of decreasing uncertainty. At retention k/N the k most certain samples
are kept, and the curve value is the sum of their errors divided by N.

Ordering is fully deterministic: uncertainty ties are broken by ascending
sample id, so that the lower id is retained first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

from .core import IN_DOMAIN, Partition, ShiftTag
from .errors import EmptyDatasetError, SingleClassError, ValidationError

PLOT_GRID_POINTS = 1000


@dataclass(frozen=True)
class ScoredSample:
    id: str
    error: float
    uncertainty: float
    tag: ShiftTag = IN_DOMAIN

    def __post_init__(self):
        if not (math.isfinite(self.error) and self.error >= 0):
            raise ValidationError(f"sample {self.id!r}: error must be finite and >= 0, got {self.error}")
        if not math.isfinite(self.uncertainty):
            raise ValidationError(f"sample {self.id!r}: uncertainty must be finite, got {self.uncertainty}")


class Ordering(str, Enum):
    BY_UNCERTAINTY = "by_uncertainty"
    RANDOM = "random"
    OPTIMAL = "optimal"


@dataclass(frozen=True, eq=False)
class RetentionCurve:
    retention: np.ndarray
    value: np.ndarray

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.retention.tolist(), self.value.tolist()))

    @property
    def auc(self) -> float:
        return trapezoid_area(self.retention, self.value)

    def __len__(self) -> int:
        return self.retention.size


def trapezoid_area(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.trapezoid(y, x))


def _check(samples: Sequence[ScoredSample]) -> None:
    if len(samples) == 0:
        raise EmptyDatasetError("retention analysis needs at least one sample")


def retention_order(
    samples: Sequence[ScoredSample],
    ordering: Ordering | str = Ordering.BY_UNCERTAINTY,
    seed: int | None = None,
) -> list[int]:
    """Indices into ``samples``, most certain (retained first) to least certain."""
    ordering = Ordering(ordering)
    by_id = sorted(range(len(samples)), key=lambda i: samples[i].id)
    if ordering is Ordering.BY_UNCERTAINTY:
        return sorted(by_id, key=lambda i: samples[i].uncertainty)
    if ordering is Ordering.OPTIMAL:
        return sorted(by_id, key=lambda i: samples[i].error)
    if seed is None:
        raise ValueError("random ordering needs a seed")
    perm = np.random.default_rng(seed).permutation(len(samples))
    return [by_id[j] for j in perm]


def _grid(n: int) -> np.ndarray:
    return np.arange(n + 1) / n


def error_retention_curve(
    samples: Sequence[ScoredSample],
    ordering: Ordering | str = Ordering.BY_UNCERTAINTY,
    seed: int | None = None,
) -> RetentionCurve:
    _check(samples)
    order = retention_order(samples, ordering, seed)
    n = len(samples)
    errors = np.array([samples[i].error for i in order])
    value = np.concatenate([[0.0], np.cumsum(errors)]) / n
    return RetentionCurve(_grid(n), value)


def r_auc(curve: RetentionCurve) -> float:
    return curve.auc


def f1_from_counts(true_positives: np.ndarray, predicted: np.ndarray, positives: int) -> np.ndarray:
    """F1 = 2TP / (predicted positives + actual positives), 0 where both are 0."""
    denom = predicted + positives
    with np.errstate(invalid="ignore", divide="ignore"):
        f1 = np.where(denom > 0, 2.0 * true_positives / np.where(denom > 0, denom, 1), 0.0)
    return f1


def f1_retention_curve(
    samples: Sequence[ScoredSample],
    threshold: float,
    ordering: Ordering | str = Ordering.BY_UNCERTAINTY,
    seed: int | None = None,
) -> RetentionCurve:
    """F1 of "retained means predicted acceptable" against error < threshold.

    Optimal ordering for this curve retains acceptable samples first, which
    is what ascending error already does.
    """
    _check(samples)
    order = retention_order(samples, ordering, seed)
    n = len(samples)
    acceptable = np.array([samples[i].error < threshold for i in order])
    tp = np.concatenate([[0], np.cumsum(acceptable)])
    k = np.arange(n + 1)
    return RetentionCurve(_grid(n), f1_from_counts(tp, k, int(acceptable.sum())))


def f1_auc(curve: RetentionCurve) -> float:
    return curve.auc


def f1_at(curve: RetentionCurve, r: float = 0.95) -> float:
    """Curve value at the smallest grid retention >= r."""
    idx = int(np.searchsorted(curve.retention, r, side="left"))
    return float(curve.value[min(idx, len(curve) - 1)])


def roc_auc(samples: Sequence[ScoredSample]) -> float:
    """P(shifted uncertainty > in-domain uncertainty), ties counting one half.

    Computed from the Mann-Whitney rank sum with midranks for ties.
    """
    u = np.array([s.uncertainty for s in samples])
    shifted = np.array([s.tag.partition is Partition.SHIFTED for s in samples])
    n_pos = int(shifted.sum())
    n_neg = len(samples) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassError(
            f"ROC-AUC needs both partitions, got {n_neg} in-domain and {n_pos} shifted samples"
        )
    ranks = rankdata(u)
    rank_sum = float(ranks[shifted].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def subsample_curve(curve: RetentionCurve, n_points: int = PLOT_GRID_POINTS) -> RetentionCurve:
    """Evenly spaced subset of grid points for plotting; endpoints always kept."""
    if len(curve) <= n_points:
        return curve
    idx = np.unique(np.round(np.linspace(0, len(curve) - 1, n_points)).astype(int))
    return RetentionCurve(curve.retention[idx], curve.value[idx])


def random_baseline_auc(
    samples: Sequence[ScoredSample], seeds: Sequence[int], kind: str = "error", threshold: float | None = None
) -> float:
    """Mean AUC of the random-ordering baseline over several seeds."""
    if kind == "error":
        aucs = [error_retention_curve(samples, Ordering.RANDOM, s).auc for s in seeds]
    else:
        aucs = [f1_retention_curve(samples, threshold, Ordering.RANDOM, s).auc for s in seeds]
    return float(np.mean(aucs))

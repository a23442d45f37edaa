"""Shared data model for the three task families.

Every uncertainty scalar in shiftkit follows one orientation: larger means
more uncertain. Scores that point the other way (log-likelihoods,
confidences) go through :func:`uncertainty_from_score` exactly once, at the
point where they enter the system.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DistributionError,
    EmptyEnsembleError,
    EmptyReferenceError,
    NegativeVarianceError,
    ShapeError,
    ValidationError,
)

PROBABILITY_ATOL = 1e-9


class Partition(str, Enum):
    IN_DOMAIN = "in_domain"
    SHIFTED = "shifted"


@dataclass(frozen=True)
class ShiftTag:
    partition: Partition
    meta: tuple[str, ...] = ()

    def __post_init__(self):
        try:
            object.__setattr__(self, "partition", Partition(self.partition))
        except ValueError:
            raise ValidationError(
                f"partition must be one of {[p.value for p in Partition]}, "
                f"got {self.partition!r}"
            ) from None
        object.__setattr__(self, "meta", tuple(str(m) for m in self.meta))

    @property
    def shifted(self) -> bool:
        return self.partition is Partition.SHIFTED


IN_DOMAIN = ShiftTag(Partition.IN_DOMAIN)
SHIFTED = ShiftTag(Partition.SHIFTED)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def uncertainty_from_score(score: float) -> float:
    """Map a larger-is-more-confident score onto the uncertainty orientation."""
    return -float(score)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """A sequence of T planar states in meters plus a per-step validity mask."""

    states: np.ndarray
    validity: np.ndarray = None

    def __post_init__(self):
        states = np.array(self.states, dtype=np.float64)
        if states.ndim != 2 or states.shape[1] != 2 or states.shape[0] < 1:
            raise ShapeError(f"states must have shape (T, 2) with T >= 1, got {states.shape}")
        if self.validity is None:
            validity = np.ones(states.shape[0], dtype=bool)
        else:
            validity = np.array(self.validity, dtype=bool)
        if validity.shape != (states.shape[0],):
            raise ShapeError(
                f"validity mask has shape {validity.shape}, expected ({states.shape[0]},)"
            )
        object.__setattr__(self, "states", _frozen(states))
        object.__setattr__(self, "validity", _frozen(validity))

    def __len__(self) -> int:
        return self.states.shape[0]

    @property
    def T(self) -> int:
        return self.states.shape[0]

    @property
    def is_valid(self) -> bool:
        return bool(self.validity.all())


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    id: str
    predictions: tuple[Trajectory, ...]
    confidences: np.ndarray
    request_uncertainty: float
    ground_truth: Trajectory
    tag: ShiftTag = IN_DOMAIN

    def __post_init__(self):
        preds = tuple(p if isinstance(p, Trajectory) else Trajectory(p) for p in self.predictions)
        gt = self.ground_truth
        if not isinstance(gt, Trajectory):
            gt = Trajectory(gt)
        object.__setattr__(self, "predictions", preds)
        object.__setattr__(self, "ground_truth", gt)
        object.__setattr__(
            self, "confidences", _frozen(np.array(self.confidences, dtype=np.float64).reshape(-1))
        )
        object.__setattr__(self, "request_uncertainty", float(self.request_uncertainty))
        object.__setattr__(self, "id", str(self.id))

    @property
    def D(self) -> int:
        return len(self.predictions)

    @property
    def skip(self) -> bool:
        """True when the ground truth is partially occluded.

        Such prediction requests are kept in files but never scored.
        """
        return not self.ground_truth.is_valid


@dataclass(frozen=True, eq=False)
class RegressionRecord:
    """K ensemble members, each predicting a Gaussian (mean, variance)."""

    id: str
    means: np.ndarray
    variances: np.ndarray
    target: float
    tag: ShiftTag = IN_DOMAIN

    def __post_init__(self):
        means = np.array(self.means, dtype=np.float64).reshape(-1)
        variances = np.array(self.variances, dtype=np.float64).reshape(-1)
        if means.shape != variances.shape:
            raise ShapeError(f"{means.size} means but {variances.size} variances")
        object.__setattr__(self, "means", _frozen(means))
        object.__setattr__(self, "variances", _frozen(variances))
        object.__setattr__(self, "target", float(self.target))
        object.__setattr__(self, "id", str(self.id))

    @classmethod
    def from_members(
        cls, id: str, members: Iterable[tuple[float, float]], target: float, tag: ShiftTag = IN_DOMAIN
    ) -> "RegressionRecord":
        members = list(members)
        means = [m for m, _ in members]
        variances = [v for _, v in members]
        return cls(id, means, variances, target, tag)

    @property
    def K(self) -> int:
        return self.means.size

    @property
    def members(self) -> list[tuple[float, float]]:
        return list(zip(self.means.tolist(), self.variances.tolist()))

    def member(self, k: int) -> "RegressionRecord":
        """The single-model view of ensemble member ``k``."""
        return RegressionRecord(self.id, self.means[k : k + 1], self.variances[k : k + 1], self.target, self.tag)


@dataclass(frozen=True, eq=False)
class TranslationRecord:
    """H weighted hypotheses for one source sentence.

    ``uncertainty`` is optional; when absent, evaluation falls back to the
    entropy of the hypothesis weights.
    """

    id: str
    hypotheses: tuple[tuple[str, ...], ...]
    weights: np.ndarray
    reference: tuple[str, ...]
    tag: ShiftTag = IN_DOMAIN
    uncertainty: float | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "hypotheses", tuple(tuple(str(t) for t in h) for h in self.hypotheses))
        object.__setattr__(self, "reference", tuple(str(t) for t in self.reference))
        object.__setattr__(self, "weights", _frozen(np.array(self.weights, dtype=np.float64).reshape(-1)))
        object.__setattr__(self, "id", str(self.id))
        if self.uncertainty is not None:
            object.__setattr__(self, "uncertainty", float(self.uncertainty))

    @property
    def H(self) -> int:
        return len(self.hypotheses)


def _check_distribution(p: np.ndarray, what: str, strictly_positive: bool) -> None:
    if not np.all(np.isfinite(p)):
        raise DistributionError(f"{what} contain non-finite values: {p.tolist()}")
    if strictly_positive and np.any(p <= 0):
        raise DistributionError(f"{what} must be > 0, got {p.tolist()}")
    if np.any(p < 0):
        raise DistributionError(f"{what} must be >= 0, got {p.tolist()}")
    total = math.fsum(p.tolist())
    if abs(total - 1.0) > PROBABILITY_ATOL:
        raise DistributionError(f"{what} sum to {total!r}, expected 1 within {PROBABILITY_ATOL}")


def validate_trajectory_record(record: TrajectoryRecord) -> TrajectoryRecord:
    """Check a trajectory record and return it unchanged.

    Records whose ground truth is only partially observed are not errors;
    they come back with ``record.skip`` set and are left out of every metric.

    Raises ShapeError on a length mismatch and DistributionError when the
    confidences are not a probability vector.
    """
    if record.D < 1:
        raise ShapeError(f"record {record.id!r}: needs at least one predicted trajectory")
    if record.confidences.size != record.D:
        raise ShapeError(
            f"record {record.id!r}: {record.confidences.size} confidences for {record.D} trajectories"
        )
    T = record.ground_truth.T
    for d, pred in enumerate(record.predictions):
        if pred.T != T:
            raise ShapeError(f"record {record.id!r}: prediction {d} has T={pred.T}, ground truth T={T}")
        if not np.all(np.isfinite(pred.states)):
            raise ValidationError(f"record {record.id!r}: prediction {d} has non-finite states")
    gt = record.ground_truth
    if not np.all(np.isfinite(gt.states[gt.validity])):
        raise ValidationError(f"record {record.id!r}: ground truth has non-finite observed states")
    if not math.isfinite(record.request_uncertainty):
        raise ValidationError(f"record {record.id!r}: request_uncertainty is not finite")
    try:
        _check_distribution(record.confidences, "confidences", strictly_positive=False)
    except DistributionError as e:
        raise DistributionError(f"record {record.id!r}: {e}") from None
    return record


def validate_regression_record(record: RegressionRecord) -> RegressionRecord:
    if record.K < 1:
        raise EmptyEnsembleError(f"record {record.id!r}: ensemble has no members")
    if np.any(record.variances < 0):
        raise NegativeVarianceError(
            f"record {record.id!r}: negative member variance {record.variances.tolist()}"
        )
    if not (np.all(np.isfinite(record.means)) and np.all(np.isfinite(record.variances))):
        raise ValidationError(f"record {record.id!r}: non-finite member outputs")
    if not math.isfinite(record.target):
        raise ValidationError(f"record {record.id!r}: non-finite target")
    return record


def validate_translation_record(record: TranslationRecord) -> TranslationRecord:
    if record.H < 1:
        raise ShapeError(f"record {record.id!r}: needs at least one hypothesis")
    if record.weights.size != record.H:
        raise ShapeError(f"record {record.id!r}: {record.weights.size} weights for {record.H} hypotheses")
    if not record.reference:
        raise EmptyReferenceError(f"record {record.id!r}: empty reference")
    if record.uncertainty is not None and not math.isfinite(record.uncertainty):
        raise ValidationError(f"record {record.id!r}: uncertainty is not finite")
    try:
        _check_distribution(record.weights, "weights", strictly_positive=True)
    except DistributionError as e:
        raise DistributionError(f"record {record.id!r}: {e}") from None
    return record


def validate(record):
    """Dispatch to the validator for the record's task family."""
    if isinstance(record, TrajectoryRecord):
        return validate_trajectory_record(record)
    if isinstance(record, RegressionRecord):
        return validate_regression_record(record)
    if isinstance(record, TranslationRecord):
        return validate_translation_record(record)
    raise TypeError(f"not a shiftkit record: {type(record).__name__}")


def evaluable(records: Sequence[TrajectoryRecord]) -> list[TrajectoryRecord]:
    """Drop prediction requests with partially observed ground truth."""
    return [r for r in records if not r.skip]

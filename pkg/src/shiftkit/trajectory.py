"""Displacement-error metrics for multi-hypothesis trajectory prediction."""

from __future__ import annotations

from enum import Enum

import numpy as np

from .core import Trajectory, TrajectoryRecord
from .errors import ShapeError, ValidationError


class AggregationKind(str, Enum):
    MIN = "min"
    AVG = "avg"


class Displacement(str, Enum):
    ADE = "ade"
    FDE = "fde"


def _step_distances(pred: Trajectory, truth: Trajectory) -> np.ndarray:
    if pred.T != truth.T:
        raise ShapeError(f"prediction has T={pred.T}, ground truth T={truth.T}")
    if not truth.is_valid:
        raise ValidationError("ground truth is not fully observed")
    diff = pred.states - truth.states
    return np.hypot(diff[:, 0], diff[:, 1])


def ade(pred: Trajectory, truth: Trajectory) -> float:
    """Average displacement error, the mean of per-step L2 distances."""
    return float(np.mean(_step_distances(pred, truth)))


def fde(pred: Trajectory, truth: Trajectory) -> float:
    """Final displacement error, the L2 distance at the last step."""
    return float(_step_distances(pred, truth)[-1])


def displacements(record: TrajectoryRecord, which: Displacement | str = "ade") -> np.ndarray:
    """Per-trajectory ADE or FDE for all D predictions of a record."""
    fn = ade if Displacement(which) is Displacement.ADE else fde
    return np.array([fn(p, record.ground_truth) for p in record.predictions])


def agg_displacement(
    record: TrajectoryRecord,
    kind: AggregationKind | str = "min",
    which: Displacement | str = "ade",
) -> float:
    d = displacements(record, which)
    if AggregationKind(kind) is AggregationKind.MIN:
        return float(d.min())
    return float(d.mean())


def top1_index(confidences: np.ndarray) -> int:
    # np.argmax returns the first maximal index, which is the tie rule we want.
    return int(np.argmax(confidences))


def top1_displacement(record: TrajectoryRecord, which: Displacement | str = "ade") -> float:
    """Displacement of the most confident trajectory; ties go to the lowest index."""
    fn = ade if Displacement(which) is Displacement.ADE else fde
    return fn(record.predictions[top1_index(record.confidences)], record.ground_truth)


def weighted_displacement(record: TrajectoryRecord, which: Displacement | str = "ade") -> float:
    return float(np.dot(record.confidences, displacements(record, which)))


# Error metrics selectable for retention analysis.
TRAJECTORY_ERRORS = {
    "min_ade": lambda r: agg_displacement(r, "min", "ade"),
    "avg_ade": lambda r: agg_displacement(r, "avg", "ade"),
    "top1_ade": lambda r: top1_displacement(r, "ade"),
    "weighted_ade": lambda r: weighted_displacement(r, "ade"),
    "min_fde": lambda r: agg_displacement(r, "min", "fde"),
    "avg_fde": lambda r: agg_displacement(r, "avg", "fde"),
    "top1_fde": lambda r: top1_displacement(r, "fde"),
    "weighted_fde": lambda r: weighted_displacement(r, "fde"),
}


def trajectory_errors(record: TrajectoryRecord) -> dict[str, float]:
    """All eight displacement metrics of one record, computed from two passes."""
    ades = displacements(record, "ade")
    fdes = displacements(record, "fde")
    top = top1_index(record.confidences)
    c = record.confidences
    return {
        "min_ade": float(ades.min()),
        "avg_ade": float(ades.mean()),
        "top1_ade": float(ades[top]),
        "weighted_ade": float(np.dot(c, ades)),
        "min_fde": float(fdes.min()),
        "avg_fde": float(fdes.mean()),
        "top1_fde": float(fdes[top]),
        "weighted_fde": float(np.dot(c, fdes)),
    }

"""Record files (JSONL), curve files (CSV) and curve plots (SVG).

One record per line, with a ``task`` field selecting the payload::

    {"task": "regression", "id": "r1", "tag": {"partition": "in_domain", "meta": []},
     "members": [{"mean": 0.1, "var": 1.2}, ...], "target": 0.4}

    {"task": "trajectory", "id": "t1", "tag": {...},
     "predictions": [[[x, y], ...], ...], "confidences": [...],
     "request_uncertainty": 3.2,
     "ground_truth": {"states": [[x, y], ..., null], "validity": [true, ..., false]}}

    {"task": "translation", "id": "s1", "tag": {...},
     "hypotheses": [["a", "b"], ...], "weights": [...], "reference": ["a", "b"],
     "uncertainty": 0.7}

Unobserved ground-truth states are written as ``null``. Floats go through
``repr``, which round-trips binary64 exactly.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .core import (
    RegressionRecord,
    ShiftTag,
    Trajectory,
    TrajectoryRecord,
    TranslationRecord,
    validate,
)
from .errors import ShiftkitError
from .retention import RetentionCurve

TASKS = ("regression", "trajectory", "translation")


class RecordFileError(ShiftkitError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


def _tag_from(obj: dict) -> ShiftTag:
    tag = obj.get("tag", {"partition": "in_domain"})
    if not isinstance(tag, dict) or "partition" not in tag:
        raise ValueError("field 'tag' must be an object with a 'partition'")
    return ShiftTag(tag["partition"], tuple(tag.get("meta", ())))


def _states(rows) -> np.ndarray:
    return np.array([[math.nan, math.nan] if s is None else s for s in rows], dtype=np.float64)


def record_from_dict(obj: dict):
    """Build a record from a parsed JSON object. Raises KeyError/ValueError/TypeError."""
    if not isinstance(obj, dict):
        raise TypeError("record must be a JSON object")
    task = obj.get("task")
    if task not in TASKS:
        raise ValueError(f"field 'task' must be one of {TASKS}, got {task!r}")
    rid, tag = obj["id"], _tag_from(obj)
    if task == "regression":
        members = obj["members"]
        return RegressionRecord(
            rid, [m["mean"] for m in members], [m["var"] for m in members], obj["target"], tag
        )
    if task == "trajectory":
        gt = obj["ground_truth"]
        return TrajectoryRecord(
            id=rid,
            predictions=tuple(Trajectory(_states(p)) for p in obj["predictions"]),
            confidences=obj["confidences"],
            request_uncertainty=obj["request_uncertainty"],
            ground_truth=Trajectory(_states(gt["states"]), gt.get("validity")),
            tag=tag,
        )
    return TranslationRecord(
        rid, obj["hypotheses"], obj["weights"], obj["reference"], tag, obj.get("uncertainty")
    )


def _float(x: float):
    return None if math.isnan(x) else float(x)


def record_to_dict(record) -> dict:
    tag = {"partition": record.tag.partition.value, "meta": list(record.tag.meta)}
    if isinstance(record, RegressionRecord):
        return {
            "task": "regression",
            "id": record.id,
            "tag": tag,
            "members": [{"mean": m, "var": v} for m, v in record.members],
            "target": record.target,
        }
    if isinstance(record, TrajectoryRecord):
        gt = record.ground_truth
        return {
            "task": "trajectory",
            "id": record.id,
            "tag": tag,
            "predictions": [p.states.tolist() for p in record.predictions],
            "confidences": record.confidences.tolist(),
            "request_uncertainty": record.request_uncertainty,
            "ground_truth": {
                "states": [
                    [_float(x), _float(y)] if ok else None
                    for (x, y), ok in zip(gt.states.tolist(), gt.validity.tolist())
                ],
                "validity": gt.validity.tolist(),
            },
        }
    if isinstance(record, TranslationRecord):
        d = {
            "task": "translation",
            "id": record.id,
            "tag": tag,
            "hypotheses": [list(h) for h in record.hypotheses],
            "weights": record.weights.tolist(),
            "reference": list(record.reference),
        }
        if record.uncertainty is not None:
            d["uncertainty"] = record.uncertainty
        return d
    raise TypeError(f"not a shiftkit record: {type(record).__name__}")


def iter_record_file(path: str | Path) -> Iterator[tuple[int, object]]:
    """Yield (line number, validated record or RecordFileError) for each non-blank line.

    Raises OSError if the file cannot be read.
    """
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = validate(record_from_dict(json.loads(line)))
            except json.JSONDecodeError as e:
                yield lineno, RecordFileError(lineno, f"invalid JSON: {e.msg} (column {e.colno})")
            except KeyError as e:
                yield lineno, RecordFileError(lineno, f"missing field {e.args[0]!r}")
            except (ValueError, TypeError) as e:
                yield lineno, RecordFileError(lineno, f"{type(e).__name__}: {e}")
            else:
                yield lineno, record


def read_records(path: str | Path) -> list:
    """Read and validate a whole record file; the first bad line raises RecordFileError."""
    records = []
    for _, item in iter_record_file(path):
        if isinstance(item, RecordFileError):
            raise item
        records.append(item)
    return records


def write_records(records: Iterable, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(record_to_dict(r), allow_nan=False) + "\n")


def write_curve_csv(curve: RetentionCurve, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["retention", "value"])
        for r, v in curve.points:
            w.writerow([repr(r), repr(v)])


def read_curve_csv(path: str | Path) -> RetentionCurve:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    return RetentionCurve(
        np.array([float(r["retention"]) for r in rows]), np.array([float(r["value"]) for r in rows])
    )


def read_score_matrix(path: str | Path) -> np.ndarray:
    """G x K log-probabilities from CSV; a non-numeric first row is taken as a header."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if rows:
        try:
            [float(x) for x in rows[0]]
        except ValueError:
            rows = rows[1:]
    if not rows or len({len(r) for r in rows}) != 1:
        raise ValueError(f"{path}: score matrix must have rows of equal, non-zero length")
    return np.array([[float(x) for x in r] for r in rows])


@dataclass
class CurveSet:
    """A model curve with its random and optimal baselines."""

    title: str
    ylabel: str
    model: RetentionCurve
    random: RetentionCurve
    optimal: RetentionCurve


def write_curve_svg(curves: CurveSet, path: str | Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "shiftkit", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(5, 4))
        ax.plot(curves.model.retention, curves.model.value, label=f"uncertainty (AUC {curves.model.auc:.4g})")
        ax.plot(curves.random.retention, curves.random.value, "--", label=f"random (AUC {curves.random.auc:.4g})")
        ax.plot(curves.optimal.retention, curves.optimal.value, ":", label=f"optimal (AUC {curves.optimal.auc:.4g})")
        ax.set_xlabel("retention fraction")
        ax.set_ylabel(curves.ylabel)
        ax.set_title(curves.title)
        ax.set_xlim(0, 1)
        ax.legend(loc="best", fontsize="small")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def write_json(obj, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, allow_nan=False)
        fh.write("\n")


def common_task(records: Sequence) -> str:
    kinds = {type(r) for r in records}
    if len(kinds) != 1:
        raise ValueError(f"record file mixes task families: {sorted(k.__name__ for k in kinds)}")
    return {RegressionRecord: "regression", TrajectoryRecord: "trajectory", TranslationRecord: "translation"}[
        kinds.pop()
    ]

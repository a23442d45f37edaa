"""Sentence GLEU and the expected / max GLEU metrics over weighted hypotheses.

Inputs are pre-tokenized; nothing here splits or normalizes text. GLEU is
kept on a 0-1 scale per sentence and the dataset aggregates are reported
on 0-100.
"""

from __future__ import annotations

from collections import Counter
from typing import Callable, Sequence

import numpy as np

from .core import TranslationRecord
from .errors import EmptyDatasetError, EmptyReferenceError

SentenceScoreFn = Callable[[Sequence[str], Sequence[str]], float]


def ngram_counts(tokens: Sequence[str], max_order: int = 4) -> Counter:
    """Counts of all n-grams of order 1..max_order, pooled into one Counter."""
    counts = Counter()
    for n in range(1, max_order + 1):
        for i in range(len(tokens) - n + 1):
            counts[tuple(tokens[i : i + n])] += 1
    return counts


def sentence_gleu(hyp: Sequence[str], ref: Sequence[str], max_order: int = 4) -> float:
    """min(precision, recall) of clipped n-gram matches, orders 1..max_order.

    >>> sentence_gleu("a b c".split(), "a b d".split())
    0.5
    """
    if len(ref) == 0:
        raise EmptyReferenceError("reference has no tokens")
    if len(hyp) == 0:
        return 0.0
    hyp_counts = ngram_counts(tuple(hyp), max_order)
    ref_counts = ngram_counts(tuple(ref), max_order)
    matches = sum((hyp_counts & ref_counts).values())
    return min(matches / sum(hyp_counts.values()), matches / sum(ref_counts.values()))


def hypothesis_scores(record: TranslationRecord, score_fn: SentenceScoreFn = sentence_gleu) -> np.ndarray:
    return np.array([score_fn(h, record.reference) for h in record.hypotheses])


def expected_gleu(record: TranslationRecord, score_fn: SentenceScoreFn = sentence_gleu) -> float:
    """Weight-averaged GLEU of one record, on the 0-1 scale."""
    return float(np.dot(record.weights, hypothesis_scores(record, score_fn)))


def record_egleu_error(record: TranslationRecord, score_fn: SentenceScoreFn = sentence_gleu) -> float:
    """Per-record error on the 0-100 scale; this is what retention consumes."""
    # Weights summing to 1 within rounding can push the expectation just past 1.
    return max(100.0 - 100.0 * expected_gleu(record, score_fn), 0.0)


def _require(records: Sequence[TranslationRecord]) -> None:
    if len(records) == 0:
        raise EmptyDatasetError("no translation records")


def egleu(records: Sequence[TranslationRecord], score_fn: SentenceScoreFn = sentence_gleu) -> float:
    _require(records)
    return 100.0 * float(np.mean([expected_gleu(r, score_fn) for r in records]))


def max_gleu(records: Sequence[TranslationRecord], score_fn: SentenceScoreFn = sentence_gleu) -> float:
    _require(records)
    return 100.0 * float(np.mean([hypothesis_scores(r, score_fn).max() for r in records]))


def egleu_error(records: Sequence[TranslationRecord], score_fn: SentenceScoreFn = sentence_gleu) -> float:
    return 100.0 - egleu(records, score_fn)


def weight_entropy(record: TranslationRecord) -> float:
    """Entropy of the hypothesis weights; fallback uncertainty for records without one."""
    w = record.weights
    return float(-np.sum(w * np.log(w)))


def record_uncertainty(record: TranslationRecord) -> float:
    return record.uncertainty if record.uncertainty is not None else weight_entropy(record)

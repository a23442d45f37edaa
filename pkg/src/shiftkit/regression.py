"""Error metrics and ensemble uncertainty measures for scalar regression.

Each record carries K ensemble members predicting N(mean_k, variance_k).
The point prediction is the mean of member means. Uncertainty measures:

    mvar   mean of member variances (data uncertainty)
    varm   population variance of member means (knowledge uncertainty)
    tvar   mvar + varm (total uncertainty)
    epkl   mean KL divergence over ordered member pairs (knowledge uncertainty)
    single_variance   variance reported by member 0 alone
    random            seeded uniform draw, the non-informative baseline

The epkl closed form is a reconstruction: KL between univariate Gaussians,
averaged over all K(K-1) ordered pairs, and 0 for a single member.
"""

from __future__ import annotations

import math
import zlib
from enum import Enum
from typing import Sequence

import numpy as np

from .core import RegressionRecord
from .errors import ConfigError, EmptyDatasetError

VARIANCE_FLOOR = 1e-12
ACCEPTABLE_MSE = 1.0


class UncertaintyMeasureKind(str, Enum):
    MVAR = "mvar"
    VARM = "varm"
    TVAR = "tvar"
    EPKL = "epkl"
    SINGLE_VARIANCE = "single_variance"
    RANDOM = "random"


def ensemble_mean(record: RegressionRecord) -> float:
    return float(np.mean(record.means))


def per_sample_mse(record: RegressionRecord) -> float:
    err = ensemble_mean(record) - record.target
    return err * err


def _errors(records: Sequence[RegressionRecord]) -> np.ndarray:
    if len(records) == 0:
        raise EmptyDatasetError("no regression records")
    return np.array([ensemble_mean(r) - r.target for r in records])


def rmse(records: Sequence[RegressionRecord]) -> float:
    e = _errors(records)
    return math.sqrt(float(np.mean(e * e)))


def mae(records: Sequence[RegressionRecord]) -> float:
    return float(np.mean(np.abs(_errors(records))))


def gaussian_kl(mu_p: float, var_p: float, mu_q: float, var_q: float) -> float:
    """KL(N(mu_p, var_p) || N(mu_q, var_q)) with variances floored at 1e-12."""
    var_p = max(var_p, VARIANCE_FLOOR)
    var_q = max(var_q, VARIANCE_FLOOR)
    d = mu_p - mu_q
    return 0.5 * (math.log(var_q / var_p) + (var_p + d * d) / var_q - 1.0)


def population_variance(x: np.ndarray) -> float:
    # Anchoring on x[0] makes the mean, and so the variance, exact when all values coincide.
    d = x - x[0]
    m = x[0] + np.mean(d)
    return float(np.mean((x - m) ** 2))


def _decomposition(record: RegressionRecord) -> tuple[float, float]:
    mvar = float(np.mean(record.variances))
    varm = population_variance(record.means)
    return mvar, varm


def epkl(record: RegressionRecord) -> float:
    K = record.K
    if K == 1:
        return 0.0
    mu = record.means
    var = np.maximum(record.variances, VARIANCE_FLOOR)
    # (i, j) grid of KL(member i || member j); the diagonal is exactly zero.
    d = mu[:, None] - mu[None, :]
    kl = 0.5 * (np.log(var[None, :] / var[:, None]) + (var[:, None] + d * d) / var[None, :] - 1.0)
    np.fill_diagonal(kl, 0.0)
    # Rounding can leave tiny negatives when members coincide.
    return max(float(kl.sum()) / (K * (K - 1)), 0.0)


def random_uncertainty(record: RegressionRecord, seed: int) -> float:
    """Uniform [0, 1) draw keyed by (seed, record id), independent of record order."""
    key = zlib.crc32(record.id.encode("utf-8"))
    return float(np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, key]).random())


def uncertainty(
    record: RegressionRecord,
    kind: UncertaintyMeasureKind | str = "tvar",
    rng_seed: int | None = None,
) -> float:
    kind = UncertaintyMeasureKind(kind)
    if kind is UncertaintyMeasureKind.RANDOM:
        if rng_seed is None:
            raise ConfigError("the random uncertainty measure needs a seed")
        return random_uncertainty(record, rng_seed)
    if kind is UncertaintyMeasureKind.SINGLE_VARIANCE:
        return float(record.variances[0])
    if kind is UncertaintyMeasureKind.EPKL:
        return epkl(record)
    mvar, varm = _decomposition(record)
    if kind is UncertaintyMeasureKind.MVAR:
        return mvar
    if kind is UncertaintyMeasureKind.VARM:
        return varm
    return mvar + varm


def uncertainty_measures(record: RegressionRecord, rng_seed: int = 0) -> dict[str, float]:
    """Every measure for one record, sharing intermediates so tvar == mvar + varm."""
    mvar, varm = _decomposition(record)
    return {
        "mvar": mvar,
        "varm": varm,
        "tvar": mvar + varm,
        "epkl": epkl(record),
        "single_variance": float(record.variances[0]),
        "random": random_uncertainty(record, rng_seed),
    }

"""Robust Imitative Planning: ensemble scoring and aggregation of trajectories.

Pipeline for one prediction request, given G candidate trajectories and K
likelihood models:

    1. candidates come from the models themselves (see ``shiftkit.synth``)
       or from outside
    2. score every candidate under every model -> G x K log-probabilities
    3. aggregate across models -> G per-trajectory scores
    4. aggregate across candidates -> one request score; its negation is
       the request uncertainty
    5. keep the D best candidates (ties by candidate index)
    6. softmax over the D kept scores -> per-trajectory confidences

``lower_quartile`` is mean minus population standard deviation, not the
25th percentile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Protocol, Sequence

import numpy as np

from .core import Trajectory, uncertainty_from_score
from .errors import ConfigError, CovarianceError, EmptyInputError, ShapeError

LOG_2PI = math.log(2.0 * math.pi)
SYMMETRY_ATOL = 1e-12


class AggOperator(str, Enum):
    MIN = "min"
    MEAN = "mean"
    LOWER_QUARTILE = "lower_quartile"


@dataclass(frozen=True)
class RipConfig:
    K: int = 5
    Q: int = 10
    G: int | None = None
    D: int = 5
    traj_agg: AggOperator = AggOperator.LOWER_QUARTILE
    req_agg: AggOperator = AggOperator.LOWER_QUARTILE

    def __post_init__(self):
        object.__setattr__(self, "traj_agg", AggOperator(self.traj_agg))
        object.__setattr__(self, "req_agg", AggOperator(self.req_agg))
        if self.G is None:
            object.__setattr__(self, "G", self.K * self.Q)
        if self.K < 1 or self.Q < 1:
            raise ConfigError(f"K and Q must be >= 1, got K={self.K}, Q={self.Q}")
        if not 1 <= self.D <= self.G:
            raise ConfigError(f"need 1 <= D <= G, got D={self.D}, G={self.G}")


@dataclass(frozen=True, eq=False)
class GaussianStep:
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64).reshape(2)
        cov = np.asarray(self.covariance, dtype=np.float64).reshape(2, 2)
        check_covariances(cov[None])
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)


class LikelihoodModel(Protocol):
    """Autoregressive Gaussian trajectory density for one scene.

    ``step_parameters`` returns the T conditional means (T, 2) and
    covariances (T, 2, 2) of each state given the preceding states of
    ``traj``. Implementations must be deterministic.
    """

    def step_parameters(self, traj: Trajectory) -> tuple[np.ndarray, np.ndarray]: ...


def gaussian_steps(model: LikelihoodModel, traj: Trajectory) -> list[GaussianStep]:
    means, covs = model.step_parameters(traj)
    return [GaussianStep(m, c) for m, c in zip(means, covs)]


def check_covariances(covs: np.ndarray) -> None:
    a, b, c, d = covs[:, 0, 0], covs[:, 0, 1], covs[:, 1, 0], covs[:, 1, 1]
    if not np.all(np.isfinite(covs)):
        raise CovarianceError("covariance has non-finite entries")
    if np.any(np.abs(b - c) > SYMMETRY_ATOL):
        raise CovarianceError("covariance is not symmetric")
    # A symmetric 2x2 matrix is PD iff its leading minors are positive.
    if np.any(a <= 0) or np.any(a * d - b * c <= 0):
        raise CovarianceError("covariance is not positive-definite")


def gaussian_log_density(x: np.ndarray, means: np.ndarray, covs: np.ndarray) -> np.ndarray:
    """Per-step bivariate normal log-density, closed form for 2x2 covariances."""
    check_covariances(covs)
    r = x - means
    a, b, d = covs[:, 0, 0], covs[:, 0, 1], covs[:, 1, 1]
    det = a * d - b * b
    quad = (d * r[:, 0] ** 2 - 2.0 * b * r[:, 0] * r[:, 1] + a * r[:, 1] ** 2) / det
    return -LOG_2PI - 0.5 * np.log(det) - 0.5 * quad


def log_prob_trajectory(model: LikelihoodModel, traj: Trajectory) -> float:
    means, covs = model.step_parameters(traj)
    means = np.asarray(means, dtype=np.float64)
    covs = np.asarray(covs, dtype=np.float64)
    if means.shape != (traj.T, 2) or covs.shape != (traj.T, 2, 2):
        raise ShapeError(
            f"model emitted means {means.shape} and covariances {covs.shape} for T={traj.T}"
        )
    return float(np.sum(gaussian_log_density(traj.states, means, covs)))


def score_matrix(models: Sequence[LikelihoodModel], candidates: Sequence[Trajectory]) -> np.ndarray:
    """G x K matrix whose (g, k) entry is log q_k(candidate g)."""
    if len({c.T for c in candidates}) > 1:
        raise ShapeError("candidates have different lengths")
    out = np.empty((len(candidates), len(models)))
    for g, traj in enumerate(candidates):
        for k, model in enumerate(models):
            out[g, k] = log_prob_trajectory(model, traj)
    return out


def aggregate(scores, op: AggOperator | str, axis: int | None = None):
    """Reduce scores with min, mean, or mean minus population std.

    With ``axis`` given, reduces a 2-D array along that axis.
    """
    s = np.asarray(scores, dtype=np.float64)
    if s.size == 0:
        raise EmptyInputError("cannot aggregate an empty set of scores")
    op = AggOperator(op)
    if op is AggOperator.MIN:
        out = np.min(s, axis=axis)
    elif op is AggOperator.MEAN:
        out = np.mean(s, axis=axis)
    else:
        out = np.mean(s, axis=axis) - np.std(s, axis=axis)
    return float(out) if axis is None else out


def softmax(x: np.ndarray) -> np.ndarray:
    z = np.exp(x - np.max(x))
    return z / np.sum(z)


@dataclass(frozen=True, eq=False)
class RipResult:
    indices: np.ndarray
    confidences: np.ndarray
    request_uncertainty: float
    trajectory_scores: np.ndarray
    request_score: float
    trajectories: tuple[Trajectory, ...] = ()


def rip_from_scores(scores: np.ndarray, config: RipConfig) -> RipResult:
    """Steps 3-6 on a precomputed G x K log-probability matrix."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2 or scores.size == 0:
        raise ShapeError(f"score matrix must be a non-empty G x K array, got shape {scores.shape}")
    G, K = scores.shape
    if K != config.K:
        raise ConfigError(f"score matrix has {K} model columns, config says K={config.K}")
    if G != config.G:
        raise ConfigError(f"score matrix has {G} candidate rows, config says G={config.G}")
    per_traj = aggregate(scores, config.traj_agg, axis=1)
    request_score = aggregate(per_traj, config.req_agg)
    # Selection and confidences work on scores relative to the matrix maximum,
    # so adding a constant that is itself exact leaves them bit-identical.
    relative = aggregate(scores - scores.max(), config.traj_agg, axis=1)
    # Stable sort on the negated scores keeps lower candidate indices first on ties.
    top = np.argsort(-relative, kind="stable")[: config.D]
    return RipResult(
        indices=top,
        confidences=softmax(relative[top]),
        request_uncertainty=uncertainty_from_score(request_score),
        trajectory_scores=per_traj,
        request_score=request_score,
    )


def run_rip(
    models: Sequence[LikelihoodModel], candidates: Sequence[Trajectory], config: RipConfig
) -> RipResult:
    if len(candidates) != config.G:
        raise ConfigError(f"got {len(candidates)} candidates, config says G={config.G}")
    if len(models) != config.K:
        raise ConfigError(f"got {len(models)} models, config says K={config.K}")
    result = rip_from_scores(score_matrix(models, candidates), config)
    return RipResult(
        indices=result.indices,
        confidences=result.confidences,
        request_uncertainty=result.request_uncertainty,
        trajectory_scores=result.trajectory_scores,
        request_score=result.request_score,
        trajectories=tuple(candidates[i] for i in result.indices),
    )

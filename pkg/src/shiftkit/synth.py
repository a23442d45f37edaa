"""Seeded synthetic datasets for the three task families.

Every random draw comes from a counter-based Philox generator keyed by
(seed, record index, stream id), so a record does not depend on how many
records come before it or on the order they are generated in.

Shifted records are built so that uncertainty and error move together:

* regression: ensemble members disagree more (varm grows) while their
  reported variances stay put, so knowledge measures spot the shift and
  data measures do not;
* trajectory: the agent departs from the nominal kinematics and the
  likelihood models disagree about where it is heading;
* translation: hypotheses get token drops, swaps and substitutions.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from enum import Enum, IntEnum
from pathlib import Path

import numpy as np

from .core import (
    Partition,
    RegressionRecord,
    ShiftTag,
    Trajectory,
    TrajectoryRecord,
    TranslationRecord,
)
from .errors import ConfigError
from .rip import AggOperator, RipConfig, run_rip

HORIZON = 25
DT = 0.2


class Task(str, Enum):
    REGRESSION = "regression"
    TRAJECTORY = "trajectory"
    TRANSLATION = "translation"


class Stream(IntEnum):
    TARGET = 0
    MEMBERS = 1
    SCENE = 2
    MODELS = 3
    CANDIDATES = 4
    OCCLUSION = 5
    REFERENCE = 6
    HYPOTHESES = 7


@dataclass(frozen=True)
class SynthSpec:
    seed: int
    n_in: int
    n_shifted: int
    shift_severity: float
    task: Task
    # regression
    ensemble_size: int = 5
    # trajectory
    K: int = 5
    Q: int = 10
    D: int = 5
    traj_agg: AggOperator = AggOperator.LOWER_QUARTILE
    req_agg: AggOperator = AggOperator.LOWER_QUARTILE
    process_noise: float = 0.02
    occlusion_rate: float = 0.0
    # translation
    n_hypotheses: int = 5
    vocab_size: int = 50

    def __post_init__(self):
        try:
            object.__setattr__(self, "task", Task(self.task))
            object.__setattr__(self, "traj_agg", AggOperator(self.traj_agg))
            object.__setattr__(self, "req_agg", AggOperator(self.req_agg))
        except ValueError as e:
            raise ConfigError(str(e)) from None
        if self.n_in < 0 or self.n_shifted < 0:
            raise ConfigError("record counts must be >= 0")
        if not (math.isfinite(self.shift_severity) and self.shift_severity >= 0):
            raise ConfigError(f"shift_severity must be finite and >= 0, got {self.shift_severity}")
        if not 0 <= self.occlusion_rate <= 1:
            raise ConfigError("occlusion_rate must lie in [0, 1]")

    @classmethod
    def from_dict(cls, d: dict) -> "SynthSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown synth spec fields: {sorted(unknown)}")
        try:
            return cls(**d)
        except TypeError as e:
            raise ConfigError(str(e)) from None

    @classmethod
    def load(cls, path: str | Path) -> "SynthSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, Enum):
                d[k] = v.value
        return d

    @property
    def rip_config(self) -> RipConfig:
        return RipConfig(K=self.K, Q=self.Q, D=self.D, traj_agg=self.traj_agg, req_agg=self.req_agg)

    def partition(self, i: int) -> Partition:
        return Partition.IN_DOMAIN if i < self.n_in else Partition.SHIFTED

    def __len__(self) -> int:
        return self.n_in + self.n_shifted


def stream_rng(seed: int, index: int, stream: int, *extra: int) -> np.random.Generator:
    key = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, index, int(stream), *extra])
    return np.random.Generator(np.random.Philox(key))


# ---------------------------------------------------------------- regression


def _regression_function(x: float) -> float:
    return 2.0 * math.sin(x) + 0.5 * x


def _aleatoric_sd(x: float) -> float:
    return 0.3 + 0.4 * abs(math.sin(1.5 * x))


def gen_regression(spec: SynthSpec) -> list[RegressionRecord]:
    """Noisy-observer ensembles around a smooth target function.

    Member k predicts f(x) + b_k with b_k ~ N(0, 0.15^2 + s^2), where s is
    zero in-domain and scales with shift_severity for shifted records.
    Reported variances track the true aleatoric noise only.
    """
    records = []
    for i in range(len(spec)):
        part = spec.partition(i)
        rng = stream_rng(spec.seed, i, Stream.TARGET)
        x = rng.uniform(-3.0, 3.0)
        sd = _aleatoric_sd(x)
        target = _regression_function(x) + sd * rng.standard_normal()
        s = spec.shift_severity * rng.uniform(0.25, 1.0) if part is Partition.SHIFTED else 0.0

        mrng = stream_rng(spec.seed, i, Stream.MEMBERS)
        K = spec.ensemble_size
        bias = math.sqrt(0.15**2 + s * s) * mrng.standard_normal(K)
        means = _regression_function(x) + bias
        variances = sd * sd * np.exp(0.1 * mrng.standard_normal(K))
        meta = ("synthetic", "knowledge_shift") if part is Partition.SHIFTED else ("synthetic",)
        records.append(RegressionRecord(f"reg-{i:06d}", means, variances, target, ShiftTag(part, meta)))
    return records


# ---------------------------------------------------------------- trajectory


class Maneuver(str, Enum):
    CONSTANT_VELOCITY = "constant_velocity"
    CONSTANT_TURN = "constant_turn"
    STOPPING = "stopping"
    T_JUNCTION = "t_junction"


@dataclass(frozen=True)
class Kinematics:
    speed: float
    yaw_rate: float = 0.0
    accel: float = 0.0


def kinematic_rollout(k: Kinematics, T: int = HORIZON, dt: float = DT) -> np.ndarray:
    """Closed-form positions at t*dt, t = 1..T, starting at the origin heading +x.

    Speed follows speed + accel*t and is clipped at zero (a stopped agent
    stays stopped); heading turns at the constant yaw rate.
    """
    t = np.arange(1, T + 1) * dt
    if k.accel == 0.0:
        dist = k.speed * t
    else:
        t_stop = -k.speed / k.accel if k.accel < 0 else np.inf
        tc = np.minimum(t, t_stop)
        dist = k.speed * tc + 0.5 * k.accel * tc * tc
    if k.yaw_rate == 0.0:
        return np.stack([dist, np.zeros_like(dist)], axis=1)
    # Arc of constant curvature in the distance domain when accel != 0 is
    # approximated by integrating heading over time along the path.
    if k.accel == 0.0:
        r = k.speed / k.yaw_rate
        return np.stack([r * np.sin(k.yaw_rate * t), r * (1.0 - np.cos(k.yaw_rate * t))], axis=1)
    fine = 20
    tf = np.arange(1, T * fine + 1) * (dt / fine)
    v = np.maximum(k.speed + k.accel * tf, 0.0)
    heading = k.yaw_rate * tf
    x = np.cumsum(v * np.cos(heading)) * (dt / fine)
    y = np.cumsum(v * np.sin(heading)) * (dt / fine)
    return np.stack([x, y], axis=1)[fine - 1 :: fine]


@dataclass(frozen=True, eq=False)
class GaussianRolloutModel:
    """Analytic autoregressive Gaussian likelihood around a planned rollout.

    Given the prefix s_<t of a trajectory, the next state is
    N(s_{t-1} + step_t, cov_t), where step_t is the increment of the
    model's own mean rollout and cov_t grows linearly with t. The mean
    rollout itself is therefore the most likely trajectory.
    """

    mean_rollout: np.ndarray
    sd_along: float = 0.06
    sd_across: float = 0.04
    correlation: float = 0.2
    growth: float = 0.04

    def __post_init__(self):
        m = np.array(self.mean_rollout, dtype=np.float64)
        m.setflags(write=False)
        object.__setattr__(self, "mean_rollout", m)

    @property
    def T(self) -> int:
        return self.mean_rollout.shape[0]

    def increments(self) -> np.ndarray:
        return np.diff(self.mean_rollout, axis=0, prepend=np.zeros((1, 2)))

    def covariances(self) -> np.ndarray:
        scale = (1.0 + self.growth * np.arange(self.T)) ** 2
        sa, sc = self.sd_along, self.sd_across
        base = np.array([[sa * sa, self.correlation * sa * sc], [self.correlation * sa * sc, sc * sc]])
        return scale[:, None, None] * base[None]

    def step_parameters(self, traj: Trajectory) -> tuple[np.ndarray, np.ndarray]:
        prev = np.vstack([np.zeros((1, 2)), traj.states[:-1]])
        return prev + self.increments(), self.covariances()

    def sample(self, rng: np.random.Generator, n: int) -> list[Trajectory]:
        L = np.linalg.cholesky(self.covariances())
        eps = rng.standard_normal((n, self.T, 2))
        noise = np.einsum("tij,ntj->nti", L, eps)
        states = np.cumsum(self.increments()[None] + noise, axis=1)
        return [Trajectory(s) for s in states]


@dataclass(frozen=True, eq=False)
class TrajectoryScene:
    id: str
    maneuver: Maneuver
    modes: tuple[np.ndarray, ...]
    ground_truth: Trajectory
    tag: ShiftTag
    models: tuple[GaussianRolloutModel, ...]
    candidates: tuple[Trajectory, ...]


def _scene_kinematics(rng: np.random.Generator, maneuver: Maneuver) -> list[Kinematics]:
    speed = rng.uniform(3.0, 12.0)
    if maneuver is Maneuver.CONSTANT_VELOCITY:
        return [Kinematics(speed)]
    if maneuver is Maneuver.CONSTANT_TURN:
        return [Kinematics(speed, yaw_rate=rng.choice([-1, 1]) * rng.uniform(0.1, 0.4))]
    if maneuver is Maneuver.STOPPING:
        return [Kinematics(speed, accel=-rng.uniform(1.0, 4.0))]
    slow = min(speed, 6.0)
    return [Kinematics(slow, yaw_rate=0.45), Kinematics(slow, yaw_rate=-0.45)]


MANEUVER_WEIGHTS = {
    Maneuver.CONSTANT_VELOCITY: 0.35,
    Maneuver.CONSTANT_TURN: 0.3,
    Maneuver.STOPPING: 0.25,
    Maneuver.T_JUNCTION: 0.1,
}


def gen_trajectory_scene(spec: SynthSpec, i: int) -> TrajectoryScene:
    part = spec.partition(i)
    sev = spec.shift_severity if part is Partition.SHIFTED else 0.0
    rng = stream_rng(spec.seed, i, Stream.SCENE)
    maneuvers = list(MANEUVER_WEIGHTS)
    maneuver = maneuvers[rng.choice(len(maneuvers), p=list(MANEUVER_WEIGHTS.values()))]
    modes_kin = _scene_kinematics(rng, maneuver)
    mode = int(rng.integers(len(modes_kin)))
    true_kin = modes_kin[mode]
    # Shifted agents deviate from the nominal plan in ways no model saw.
    hidden_accel = sev * rng.normal(0.0, 0.8)
    hidden_yaw = sev * rng.normal(0.0, 0.08)
    gt_kin = Kinematics(true_kin.speed, true_kin.yaw_rate + hidden_yaw, true_kin.accel + hidden_accel)
    gt_states = kinematic_rollout(gt_kin)
    if spec.process_noise > 0:
        gt_states = gt_states + np.cumsum(spec.process_noise * rng.standard_normal((HORIZON, 2)), axis=0)

    validity = np.ones(HORIZON, dtype=bool)
    if spec.occlusion_rate > 0:
        orng = stream_rng(spec.seed, i, Stream.OCCLUSION)
        if orng.random() < spec.occlusion_rate:
            start = int(orng.integers(1, HORIZON))
            validity[start : start + int(orng.integers(1, 4))] = False
    ground_truth = Trajectory(np.where(validity[:, None], gt_states, np.nan), validity)

    mrng = stream_rng(spec.seed, i, Stream.MODELS)
    models = []
    for k in range(spec.K):
        kin = modes_kin[k % len(modes_kin)]
        # In-domain members agree closely; on shifted scenes they spread out,
        # some partially tracking the hidden deviation.
        belief = Kinematics(
            kin.speed + mrng.normal(0.0, 0.05 + 0.6 * sev),
            kin.yaw_rate + mrng.normal(0.0, 0.01 + 0.05 * sev) + hidden_yaw * mrng.uniform(0, 0.5),
            kin.accel + mrng.normal(0.0, 0.6 * sev) + hidden_accel * mrng.uniform(0, 0.5),
        )
        widen = 1.0 + 0.5 * sev
        models.append(
            GaussianRolloutModel(kinematic_rollout(belief), sd_along=0.06 * widen, sd_across=0.04 * widen)
        )

    candidates = []
    for k, model in enumerate(models):
        candidates.extend(model.sample(stream_rng(spec.seed, i, Stream.CANDIDATES, k), spec.Q))

    meta = [f"maneuver:{maneuver.value}"]
    if part is Partition.SHIFTED:
        meta.append("anomaly:kinematic_deviation")
    if not validity.all():
        meta.append("occluded")
    return TrajectoryScene(
        id=f"traj-{i:06d}",
        maneuver=maneuver,
        modes=tuple(kinematic_rollout(m) for m in modes_kin),
        ground_truth=ground_truth,
        tag=ShiftTag(part, tuple(meta)),
        models=tuple(models),
        candidates=tuple(candidates),
    )


def gen_trajectory_scenes(spec: SynthSpec) -> list[TrajectoryScene]:
    """Kinematic scenes (T=25 at 5 Hz) with K analytic models and K*Q candidates each."""
    return [gen_trajectory_scene(spec, i) for i in range(len(spec))]


def scene_record(scene: TrajectoryScene, config: RipConfig) -> TrajectoryRecord:
    """Run the RIP pipeline on a scene and package the outcome as a record."""
    result = run_rip(scene.models, scene.candidates, config)
    return TrajectoryRecord(
        id=scene.id,
        predictions=result.trajectories,
        confidences=result.confidences,
        request_uncertainty=result.request_uncertainty,
        ground_truth=scene.ground_truth,
        tag=scene.tag,
    )


def gen_trajectory(spec: SynthSpec, config: RipConfig | None = None) -> list[TrajectoryRecord]:
    config = config or spec.rip_config
    return [scene_record(s, config) for s in gen_trajectory_scenes(spec)]


# --------------------------------------------------------------- translation


def _corrupt(tokens: list[str], n_edits: int, rng: np.random.Generator, vocab: list[str]) -> tuple[list[str], set[str]]:
    out = list(tokens)
    kinds = set()
    for _ in range(n_edits):
        kind = ("token_drop", "token_swap", "substitution")[int(rng.integers(3))]
        if kind == "token_drop" and len(out) > 1:
            del out[int(rng.integers(len(out)))]
        elif kind == "token_swap" and len(out) > 1:
            j = int(rng.integers(len(out) - 1))
            out[j], out[j + 1] = out[j + 1], out[j]
        else:
            out[int(rng.integers(len(out)))] = vocab[int(rng.integers(len(vocab)))]
            kind = "substitution"
        kinds.add(kind)
    return out, kinds


def gen_translation(spec: SynthSpec) -> list[TranslationRecord]:
    """References over a Zipfian vocabulary with progressively corrupted hypotheses.

    Edits per hypothesis are Poisson with rate severity * (0.3 in-domain,
    1.2 shifted) * (1 + 0.5 h) for hypothesis rank h, so severity 0 yields
    exact copies of the reference.
    """
    vocab = [f"w{j}" for j in range(spec.vocab_size)]
    zipf = 1.0 / np.arange(1, spec.vocab_size + 1)
    zipf /= zipf.sum()
    records = []
    for i in range(len(spec)):
        part = spec.partition(i)
        rrng = stream_rng(spec.seed, i, Stream.REFERENCE)
        length = int(rrng.integers(4, 15))
        reference = [vocab[j] for j in rrng.choice(spec.vocab_size, size=length, p=zipf)]

        hrng = stream_rng(spec.seed, i, Stream.HYPOTHESES)
        rate = spec.shift_severity * (1.2 if part is Partition.SHIFTED else 0.3)
        hyps, edits, anomalies = [], [], set()
        for h in range(spec.n_hypotheses):
            n = int(hrng.poisson(rate * (1.0 + 0.5 * h)))
            hyp, kinds = _corrupt(reference, n, hrng, vocab)
            hyps.append(hyp)
            edits.append(n)
            anomalies |= kinds
        edits = np.array(edits, dtype=float)
        logits = -0.7 * edits + 0.3 * hrng.standard_normal(spec.n_hypotheses)
        w = np.exp(logits - logits.max())
        w /= w.sum()
        uncertainty = float(np.mean(edits) / length + 0.05 * abs(hrng.standard_normal()))
        meta = ["synthetic"]
        if part is Partition.SHIFTED:
            meta += [f"anomaly:{a}" for a in sorted(anomalies)]
        records.append(
            TranslationRecord(f"nmt-{i:06d}", hyps, w, reference, ShiftTag(part, tuple(meta)), uncertainty)
        )
    return records


def generate(spec: SynthSpec):
    """Records for ``spec.task``; trajectory scenes are run through RIP."""
    if spec.task is Task.REGRESSION:
        return gen_regression(spec)
    if spec.task is Task.TRAJECTORY:
        return gen_trajectory(spec)
    return gen_translation(spec)

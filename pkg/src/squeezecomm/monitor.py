"""Repeated position measurements of a free mass with Gaussian states.

Position and momentum relate to the dimensionless reading quadratures by
``X = alpha1 * sqrt(2 hbar / (m omega))`` and ``P = alpha2 * sqrt(2 hbar m omega)``.
Covariances use the symmetrized cross term ``vxp = <dX dP + dP dX> / 2``.
"""
from __future__ import annotations

import enum
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import NamedTuple, Sequence, Union

import numpy as np

from .errors import ConfigurationError, DomainError, ValidationError

DET_TOL = 1e-10


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.0
    mass: float = 1.0
    omega: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0 and self.mass > 0 and self.omega > 0):
            raise DomainError("hbar, mass and omega must all be > 0")

    @property
    def x_scale(self) -> float:
        """Position per unit of alpha1."""
        return math.sqrt(2 * self.hbar / (self.mass * self.omega))

    @property
    def p_scale(self) -> float:
        """Momentum per unit of alpha2."""
        return math.sqrt(2 * self.hbar * self.mass * self.omega)

    def to_alpha(self) -> np.ndarray:
        """Diagonal map from (X, P) to (alpha1, alpha2)."""
        return np.diag([1.0 / self.x_scale, 1.0 / self.p_scale])


@dataclass(frozen=True)
class MassGaussianState:
    mean_x: float
    mean_p: float
    vxx: float
    vxp: float
    vpp: float
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)

    def __post_init__(self):
        if not (self.vxx > 0 and self.vpp > 0):
            raise ValidationError("position and momentum variances must be positive")
        floor = self.constants.hbar ** 2 / 4
        if self.determinant < floor * (1 - DET_TOL):
            raise ValidationError(f"covariance determinant {self.determinant:.12g} below hbar^2/4")

    @property
    def determinant(self) -> float:
        return self.vxx * self.vpp - self.vxp ** 2

    @property
    def covariance(self) -> np.ndarray:
        return np.array([[self.vxx, self.vxp], [self.vxp, self.vpp]])

    @property
    def mean(self) -> np.ndarray:
        return np.array([self.mean_x, self.mean_p])

    @property
    def is_contractive(self) -> bool:
        return self.vxp < 0

    def alpha_mean(self) -> np.ndarray:
        return self.constants.to_alpha() @ self.mean


@dataclass(frozen=True)
class ContractiveParams:
    """Squeeze parameters ``mu, nu`` and reading ``alpha = alpha1 + i alpha2``."""

    mu: complex
    nu: complex
    alpha: complex = 0.0

    def __post_init__(self):
        norm = abs(self.mu) ** 2 - abs(self.nu) ** 2
        if abs(norm - 1.0) > 1e-10:
            raise ValidationError(f"|mu|^2 - |nu|^2 = {norm:.12g}, must equal 1")

    @classmethod
    def from_moments(cls, vxx: float, vxp: float, vpp: float,
                     c: PhysicalConstants = PhysicalConstants(), alpha: complex = 0.0) -> "ContractiveParams":
        """Parameters (with real ``mu``) of the pure state having these second moments."""
        if abs(vxx * vpp - vxp ** 2 - c.hbar ** 2 / 4) > 1e-9 * c.hbar ** 2:
            raise ValidationError("moments do not describe a minimum-uncertainty state")
        m, w, h = c.mass, c.omega, c.hbar
        A = vxx * 2 * m * w / h
        B = vpp * 2 / (h * m * w)
        mu = math.sqrt((A + B + 2) / 4)
        nu = complex((B - A) / (4 * mu), -vxp / (h * mu))
        # renormalize away rounding so the invariant check passes exactly
        mu = math.sqrt(1 + abs(nu) ** 2)
        return cls(mu, nu, alpha)

    @classmethod
    def contractive_reset(cls, t: float, eps2: float,
                          c: PhysicalConstants = PhysicalConstants()) -> "ContractiveParams":
        """Pure state whose position variance shrinks to ``eps2`` after free time ``t``."""
        if not (t > 0 and eps2 > 0):
            raise DomainError("need t > 0 and eps2 > 0")
        vpp = c.hbar ** 2 / (4 * eps2)
        vxp = -vpp * t / c.mass
        vxx = (c.hbar ** 2 / 4 + vxp ** 2) / vpp
        return cls.from_moments(vxx, vxp, vpp, c)


def sql_bound(t: float, c: PhysicalConstants = PhysicalConstants()) -> float:
    """Free-mass position-variance floor ``hbar t / m`` for non-contractive states."""
    if t < 0:
        raise DomainError("t must be >= 0")
    return c.hbar * t / c.mass


def tcs_to_moments(p: ContractiveParams, c: PhysicalConstants = PhysicalConstants()) -> MassGaussianState:
    mu, nu, alpha = complex(p.mu), complex(p.nu), complex(p.alpha)
    h, m, w = c.hbar, c.mass, c.omega
    vxx = h / (2 * m * w) * abs(mu - nu) ** 2
    vpp = h * m * w / 2 * abs(mu + nu) ** 2
    vxp = h * (mu * nu.conjugate()).imag
    return MassGaussianState(alpha.real * c.x_scale, alpha.imag * c.p_scale, vxx, vxp, vpp, c)


# -- free evolution -------------------------------------------------------------

Force = Union[float, Sequence[tuple]]


def _segments(force: Force, t: float):
    """Piecewise-constant force as (start, end, value) covering [0, t]; zero past the listed segments."""
    if np.isscalar(force):
        return [(0.0, t, float(force))]
    out = []
    start = 0.0
    for duration, value in force:
        if duration < 0:
            raise DomainError("force segment durations must be >= 0")
        end = min(start + duration, t)
        if end > start:
            out.append((start, end, float(value)))
        start += duration
        if start >= t:
            break
    if start < t:
        out.append((start, t, 0.0))
    return out


def free_evolve(s: MassGaussianState, t: float, f1: Force = 0.0, f2: Force = 0.0) -> MassGaussianState:
    """Evolve for time ``t`` under classical forces.

    ``f1`` pushes the momentum (``dP/dt = -f1``) and ``f2`` the position
    (``dX/dt = P/m + f2``). Each may be a constant or a list of
    ``(duration, value)`` segments.
    """
    if t < 0:
        raise DomainError("t must be >= 0")
    m = s.constants.mass
    cuts = sorted({a for a, _, _ in _segments(f1, t) + _segments(f2, t)} | {t})
    seg1, seg2 = _segments(f1, t), _segments(f2, t)

    def value_at(segs, x):
        for a, b, v in segs:
            if a <= x < b:
                return v
        return 0.0

    x, p = s.mean_x, s.mean_p
    for a, b in zip(cuts[:-1], cuts[1:]):
        tau = b - a
        F = value_at(seg1, a)
        V = value_at(seg2, a)
        x = x + p * tau / m - F * tau * tau / (2 * m) + V * tau
        p = p - F * tau
    k = t / m
    vxx = s.vxx + 2 * k * s.vxp + k * k * s.vpp
    vxp = s.vxp + k * s.vpp
    return MassGaussianState(x, p, vxx, vxp, s.vpp, s.constants)


# -- Gordon-Louisell measurement -------------------------------------------------

class ResetMode(enum.Enum):
    ReadingDependent = "reading"
    ZeroMean = "zero_mean"

    @classmethod
    def parse(cls, name: str) -> "ResetMode":
        key = name.strip().lower().replace("-", "_")
        for mode in cls:
            if key in (mode.value, mode.name.lower()):
                return mode
        raise ConfigurationError(f"unknown reset mode {name!r}; valid: {[m.value for m in cls]}")


def reading_distribution(s: MassGaussianState, reference: ContractiveParams):
    """Mean and covariance of the reading ``(alpha1, alpha2)``.

    The reading covariance is the state covariance plus the reference-state
    covariance, mapped to alpha units.
    """
    c = s.constants
    J = c.to_alpha()
    ref = tcs_to_moments(replace(reference, alpha=0.0), c)
    return J @ s.mean, J @ (s.covariance + ref.covariance) @ J


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def measure_gl(s: MassGaussianState, reference: ContractiveParams, reset: ContractiveParams,
               mode: ResetMode = ResetMode.ReadingDependent, seed=0):
    """Draw a reading and return ``(alpha, post_state)`` with ``alpha`` as a length-2 array."""
    mean, cov = reading_distribution(s, reference)
    L = np.linalg.cholesky(cov)
    alpha = mean + L @ _rng(seed).standard_normal(2)
    a = complex(alpha[0], alpha[1]) if mode is ResetMode.ReadingDependent else 0.0
    return alpha, tcs_to_moments(replace(reset, alpha=a), s.constants)


# -- monitoring protocol ---------------------------------------------------------

def _params_from_json(obj, c: PhysicalConstants) -> ContractiveParams:
    if not isinstance(obj, dict):
        raise ConfigurationError("state parameters must be a JSON object")
    if "target_variance" in obj:
        return ContractiveParams.contractive_reset(float(obj["time"]), float(obj["target_variance"]), c)

    def num(v):
        if isinstance(v, (list, tuple)):
            if len(v) != 2:
                raise ConfigurationError("complex numbers are written as [re, im]")
            return complex(float(v[0]), float(v[1]))
        return complex(float(v))

    try:
        return ContractiveParams(num(obj["mu"]), num(obj["nu"]))
    except KeyError as exc:
        raise ConfigurationError(f"state parameters need key {exc}") from None


@dataclass(frozen=True)
class MonitoringPlan:
    """Measurement schedule.

    ``force`` is either a constant or one constant value per interval.
    ``initial`` defaults to the reset state with zero mean.
    """

    intervals: tuple
    reference: ContractiveParams
    reset: ContractiveParams
    reset_mode: ResetMode = ResetMode.ReadingDependent
    force: Union[float, tuple] = 0.0
    seed: int = 0
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    initial: MassGaussianState | None = None

    def __post_init__(self):
        iv = tuple(float(x) for x in self.intervals)
        if not iv:
            raise ValidationError("monitoring plan has no intervals")
        if any(not x > 0 for x in iv):
            raise ValidationError("interval durations must be > 0")
        object.__setattr__(self, "intervals", iv)
        if not np.isscalar(self.force):
            f = tuple(float(x) for x in self.force)
            if len(f) != len(iv):
                raise ValidationError("force needs one value per interval")
            object.__setattr__(self, "force", f)

    def force_at(self, k: int) -> float:
        return float(self.force) if np.isscalar(self.force) else self.force[k]

    def start_state(self) -> MassGaussianState:
        if self.initial is not None:
            return self.initial
        return tcs_to_moments(replace(self.reset, alpha=0.0), self.constants)

    @classmethod
    def from_dict(cls, d: dict) -> "MonitoringPlan":
        known = {"intervals", "reference", "reset", "reset_mode", "force", "seed", "constants", "initial"}
        unknown = set(d) - known
        if unknown:
            raise ConfigurationError(f"unknown plan keys {sorted(unknown)}; valid: {sorted(known)}")
        c = PhysicalConstants(**d.get("constants", {}))
        intervals = d.get("intervals")
        if isinstance(intervals, dict):
            intervals = [float(intervals["duration"])] * int(intervals["count"])
        if intervals is None:
            raise ConfigurationError("plan needs 'intervals'")
        initial = None
        if "initial" in d:
            i = d["initial"]
            initial = MassGaussianState(float(i.get("mean_x", 0)), float(i.get("mean_p", 0)),
                                        float(i["vxx"]), float(i["vxp"]), float(i["vpp"]), c)
        return cls(
            intervals=tuple(intervals),
            reference=_params_from_json(d.get("reference", {"mu": 1, "nu": 0}), c),
            reset=_params_from_json(d.get("reset", {"mu": 1, "nu": 0}), c),
            reset_mode=ResetMode.parse(d.get("reset_mode", "reading")),
            force=d.get("force", 0.0) if np.isscalar(d.get("force", 0.0)) else tuple(d["force"]),
            seed=int(d.get("seed", 0)),
            constants=c,
            initial=initial,
        )

    @classmethod
    def load(cls, path) -> "MonitoringPlan":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read plan {path}: {exc}") from None
        return cls.from_dict(data)


class MonitoringRecord(NamedTuple):
    time: np.ndarray              # measurement instants
    reading: np.ndarray           # (K, 2) alpha readings
    predicted: np.ndarray         # predicted alpha1 before each reading
    residual: np.ndarray          # alpha1 minus prediction (alpha units)
    residual_position: np.ndarray
    force_estimate: np.ndarray
    n1: np.ndarray                # residual minus the force signal (alpha units)
    n2: np.ndarray                # alpha2 reading minus previous alpha2
    residual_std: np.ndarray      # closed-form std of n1 (alpha units)


def run_monitoring(plan: MonitoringPlan, seed=None) -> MonitoringRecord:
    """Alternate free evolution and measurement over the plan's intervals."""
    c = plan.constants
    rng = _rng(plan.seed if seed is None else seed)
    state = plan.start_state()
    prev = state.alpha_mean()
    K = len(plan.intervals)
    out = {k: np.empty(K) for k in ("time", "predicted", "residual", "rpos", "fhat", "n1", "n2", "std")}
    readings = np.empty((K, 2))
    now = 0.0
    for k, t in enumerate(plan.intervals):
        F = plan.force_at(k)
        evolved = free_evolve(state, t, F)
        _, cov = reading_distribution(evolved, plan.reference)
        alpha, state = measure_gl(evolved, plan.reference, plan.reset, plan.reset_mode, rng)
        now += t
        predicted = prev[0] + prev[1] * c.omega * t
        r = alpha[0] - predicted
        rpos = r * c.x_scale
        signal = -F * t * t / (2 * c.mass) / c.x_scale
        out["time"][k] = now
        out["predicted"][k] = predicted
        out["residual"][k] = r
        out["rpos"][k] = rpos
        out["fhat"][k] = -2 * c.mass * rpos / (t * t)
        out["n1"][k] = r - signal
        out["n2"][k] = alpha[1] - prev[1]
        out["std"][k] = math.sqrt(cov[0, 0])
        readings[k] = alpha
        prev = state.alpha_mean()
    return MonitoringRecord(out["time"], readings, out["predicted"], out["residual"], out["rpos"],
                            out["fhat"], out["n1"], out["n2"], out["std"])


def run_monitoring_trials(plan: MonitoringPlan, trials: int, workers: int = 1) -> list[MonitoringRecord]:
    """Independent runs with child seeds of ``plan.seed``; order and values do not depend on ``workers``."""
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    seeds = np.random.SeedSequence(plan.seed).spawn(trials)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda s: run_monitoring(plan, np.random.default_rng(s)), seeds))
    return [run_monitoring(plan, np.random.default_rng(s)) for s in seeds]

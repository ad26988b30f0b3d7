"""Rate-distortion bounds on measurement accuracy and the multimode FM demo.

Every bound here inverts a rate-distortion curve against a channel capacity:
with capacity ``C`` (nats) the rms error is at least ``scale * exp(-C)``.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from . import _kernels
from .capacities import g_nats
from .errors import DomainError, ValidationError

PHASE_LAMBDA = 1.35
FM_CHUNK = 1000


@dataclass(frozen=True)
class GaussianMeanSquare:
    """Gaussian source with mean-square distortion."""

    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError("sigma must be > 0")

    @property
    def scale(self) -> float:
        return self.sigma


@dataclass(frozen=True)
class UniformPhase:
    """Uniform phase source; the working R(d) is the upper bound ``log2(lam / sqrt(d))``."""

    lam: float = PHASE_LAMBDA

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError("lam must be > 0")

    @property
    def scale(self) -> float:
        return self.lam


RdSource = Union[GaussianMeanSquare, UniformPhase]


def rd_function(source: RdSource, d: float) -> float:
    """Rate in bits per symbol needed to reach distortion ``d``."""
    if not d > 0:
        raise DomainError("distortion d must be > 0")
    if isinstance(source, GaussianMeanSquare):
        return max(0.0, 0.5 * math.log2(source.sigma ** 2 / d))
    if isinstance(source, UniformPhase):
        return max(0.0, math.log2(source.lam / math.sqrt(d)))
    raise ValidationError(f"unknown source {source!r}")


class RdInverse(NamedTuple):
    distortion: float
    rms: float


def rd_invert(source: RdSource, C: float) -> RdInverse:
    """Smallest distortion compatible with ``C`` bits of information."""
    if C < 0:
        raise DomainError("capacity C must be >= 0")
    if not isinstance(source, (GaussianMeanSquare, UniformPhase)):
        raise ValidationError(f"unknown source {source!r}")
    rms = source.scale * 2.0 ** (-C)
    return RdInverse(rms * rms, rms)


class StateKind(enum.Enum):
    Optimal = "optimal"
    TCS = "tcs"
    CoherentHeterodyne = "coherent_heterodyne"

    @classmethod
    def parse(cls, name: str) -> "StateKind":
        key = name.strip().lower().replace("-", "_")
        key = {"cs": "coherent_heterodyne", "het": "coherent_heterodyne", "op": "optimal"}.get(key, key)
        for kind in cls:
            if kind.value == key:
                return kind
        raise ValidationError(f"unknown state kind {name!r}; valid: {[k.value for k in cls]}")


@dataclass(frozen=True)
class MeasurementLimitQuery:
    source: RdSource
    state_kind: StateKind
    S: float
    m: int = 1

    def __post_init__(self):
        if self.S < 0:
            raise DomainError("S must be >= 0")
        if int(self.m) != self.m or self.m < 1:
            raise DomainError("mode count m must be an integer >= 1")


def capacity_nats(kind: StateKind, S: float, m: int = 1) -> float:
    """Capacity in nats of m modes sharing ``S`` photons equally."""
    x = S / m
    if kind is StateKind.Optimal:
        return m * g_nats(x)
    if kind is StateKind.TCS:
        return m * math.log1p(2 * x)
    if kind is StateKind.CoherentHeterodyne:
        return m * math.log1p(x)
    raise ValidationError(f"unknown state kind {kind!r}")


def measurement_limit(q: MeasurementLimitQuery) -> float:
    """Lower bound on rms error (units of sigma, or radians for phase)."""
    return q.source.scale * math.exp(-capacity_nats(q.state_kind, q.S, q.m))


# -- multimode FM threshold Monte Carlo -------------------------------------

@dataclass(frozen=True)
class FmSimConfig:
    """``S`` photons spread over ``m`` frequency bins; noise per quadrature ``noise_var``."""

    S: float
    m: int
    trials: int = 10_000
    seed: int = 0
    noise_var: float = 1.0

    def __post_init__(self):
        if self.trials < 100:
            raise ValidationError("trials must be >= 100")
        if int(self.m) != self.m or self.m < 2:
            raise ValidationError("bin count m must be an integer >= 2")
        if self.S < 0:
            raise DomainError("S must be >= 0")
        if not self.noise_var > 0:
            raise DomainError("noise_var must be > 0")
        if not 0 <= self.seed < 2 ** 64:
            raise ValidationError("seed must be a 64-bit unsigned integer")


class FmSimResult(NamedTuple):
    rms: float
    anomaly_rate: float
    trials: int


def _fm_chunk(cfg: FmSimConfig, n: int, seed_seq: np.random.SeedSequence):
    rng = np.random.default_rng(seed_seq)
    m = cfg.m
    phi = rng.uniform(-math.pi, math.pi, n)
    u = (phi + math.pi) / (2 * math.pi) * m
    # split the pulse energy linearly between the two nearest bin centres
    left = np.floor(u - 0.5)
    frac = u - 0.5 - left
    j = left.astype(np.int64) % m
    rows = np.arange(n)
    amp = np.zeros((n, m))
    amp[rows, j] = np.sqrt(cfg.S * (1.0 - frac))
    amp[rows, (j + 1) % m] += np.sqrt(cfg.S * frac)
    sd = math.sqrt(cfg.noise_var)
    re = amp + sd * rng.standard_normal((n, m))
    im = sd * rng.standard_normal((n, m))
    energy = re * re + im * im
    kstar, pos = _kernels.fm_estimate(energy, 2.0 * cfg.noise_var)
    err = np.mod(pos - u + m / 2, m) - m / 2
    miss = np.abs(np.mod(kstar + 0.5 - u + m / 2, m) - m / 2) > 1.0
    dphi = err * (2 * math.pi / m)
    return float(np.sum(dphi * dphi)), int(np.count_nonzero(miss))


def fm_threshold_sim(cfg: FmSimConfig, workers: int = 1) -> FmSimResult:
    """Empirical rms phase error and wrong-bin rate of the m-bin FM receiver.

    Trials run in chunks of 1000, each with its own child seed of ``cfg.seed``;
    chunk results are summed in chunk order, so the output does not depend on
    ``workers``.
    """
    sizes = [FM_CHUNK] * (cfg.trials // FM_CHUNK)
    if cfg.trials % FM_CHUNK:
        sizes.append(cfg.trials % FM_CHUNK)
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(sizes))
    jobs = list(zip(sizes, seeds))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _fm_chunk(cfg, *job), jobs))
    else:
        parts = [_fm_chunk(cfg, *job) for job in jobs]
    sq = 0.0
    misses = 0
    for s, k in parts:
        sq += s
        misses += k
    return FmSimResult(math.sqrt(sq / cfg.trials), misses / cfg.trials, cfg.trials)

"""Classical information-theory kernel.

All public results are in bits. Internally some quantities are accumulated in
nats and converted at the boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError, ValidationError

NORMALIZATION_TOL = 1e-12
LN2 = math.log(2.0)


def _plogp_sum(p: np.ndarray) -> float:
    """sum p*log2(p) with the 0*log 0 = 0 convention."""
    nz = p[p > 0]
    return float(np.sum(nz * np.log2(nz)))


@dataclass(frozen=True)
class DiscreteDistribution:
    """Probability mass function over a finite alphabet."""

    probs: np.ndarray
    labels: tuple | None = None

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValidationError("probs must be a non-empty 1-D vector")
        if np.any(~np.isfinite(p)) or np.any(p < 0):
            raise ValidationError("probabilities must be finite and nonnegative")
        if abs(p.sum() - 1.0) > NORMALIZATION_TOL:
            raise ValidationError(f"probabilities sum to {p.sum():.15g}, not 1")
        if self.labels is not None and len(self.labels) != p.size:
            raise ValidationError("labels must match probs in length")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def normalized(cls, weights: Sequence[float], labels=None) -> "DiscreteDistribution":
        """Build a distribution by renormalizing nonnegative weights."""
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0) or not np.isfinite(w).all() or w.sum() <= 0:
            raise ValidationError("weights must be nonnegative with positive total")
        return cls(w / w.sum(), labels)

    def __len__(self):
        return self.probs.size


@dataclass(frozen=True)
class JointDistribution:
    """Joint pmf ``p(x_in, x_out)``: rows are inputs, columns outputs."""

    matrix: np.ndarray

    def __post_init__(self):
        j = np.asarray(self.matrix, dtype=float)
        if j.ndim != 2 or j.size == 0:
            raise ValidationError("joint distribution must be a non-empty matrix")
        if np.any(~np.isfinite(j)) or np.any(j < 0):
            raise ValidationError("joint probabilities must be finite and nonnegative")
        if abs(j.sum() - 1.0) > NORMALIZATION_TOL:
            raise ValidationError(f"joint probabilities sum to {j.sum():.15g}, not 1")
        j.setflags(write=False)
        object.__setattr__(self, "matrix", j)

    @classmethod
    def from_channel(cls, prior, channel) -> "JointDistribution":
        """``p(x, y) = p(x) * p(y|x)`` from an input pmf and a row-stochastic matrix."""
        px = prior.probs if isinstance(prior, DiscreteDistribution) else np.asarray(prior, float)
        return cls(px[:, None] * np.asarray(channel, dtype=float))

    @property
    def input_marginal(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    @property
    def output_marginal(self) -> np.ndarray:
        return self.matrix.sum(axis=0)


@dataclass(frozen=True)
class AwgnParams:
    """Additive white Gaussian noise channel parameters.

    Give the noise either directly as ``N`` or through the spectral density
    ``N0`` (then ``N = N0 * W``).
    """

    P: float
    W: float = 1.0
    N: float | None = None
    N0: float | None = None
    T: float = 1.0

    def __post_init__(self):
        if (self.N is None) == (self.N0 is None):
            raise ValidationError("specify exactly one of N or N0")
        if self.P < 0:
            raise DomainError("signal power P must be >= 0")
        if self.W <= 0 or self.T <= 0:
            raise DomainError("bandwidth W and duration T must be > 0")
        if self.noise_power <= 0:
            raise DomainError("noise power must be > 0")

    @property
    def noise_power(self) -> float:
        return self.N if self.N is not None else self.N0 * self.W

    @property
    def dimension(self) -> float:
        """Real signal-space dimension ``2TW``."""
        return 2.0 * self.T * self.W


def data_rate(M: int, T: float) -> float:
    """Bits per second for ``M`` equiprobable messages per ``T`` seconds."""
    if int(M) != M or M < 1:
        raise DomainError("message count M must be an integer >= 1")
    if T <= 0:
        raise DomainError("duration T must be > 0")
    return math.log2(M) / T


def shannon_entropy(p) -> float:
    """Entropy in bits; accepts a DiscreteDistribution or a probability vector."""
    if not isinstance(p, DiscreteDistribution):
        p = DiscreteDistribution(p)
    return -_plogp_sum(p.probs) + 0.0


def binary_entropy(x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise DomainError("binary entropy argument must lie in [0, 1]")
    return shannon_entropy(np.array([x, 1.0 - x]))


def mutual_information(j) -> float:
    """I(X;Y) in bits from a joint distribution; zero-probability cells are skipped."""
    if not isinstance(j, JointDistribution):
        j = JointDistribution(j)
    m = j.matrix
    px = m.sum(axis=1, keepdims=True)
    py = m.sum(axis=0, keepdims=True)
    mask = m > 0
    # p(x|y)/p(x) = p(x,y) / (p(x) p(y))
    ratio = m[mask] / (px * py)[mask]
    return max(float(np.sum(m[mask] * np.log2(ratio))), 0.0)


def awgn_capacity(params: AwgnParams) -> float:
    """Shannon capacity ``W log2(1 + P/N)`` in bits per second."""
    return params.W * math.log2(1.0 + params.P / params.noise_power)


class SignalCount(NamedTuple):
    count: float
    rate: float


def _check_powers(P, N):
    if P < 0:
        raise DomainError("signal power P must be >= 0")
    if N <= 0:
        raise DomainError("noise power N must be > 0")


def distinguishable_signals(P: float, N: float, T: float, W: float, k: float = 1.0) -> SignalCount:
    """Number of well-distinguished signals ``[k sqrt((P+N)/N)]^(2TW)`` and its rate.

    The count is returned as a real number (``inf`` if it overflows); the rate
    is computed in the log domain and never overflows.
    """
    _check_powers(P, N)
    if T <= 0 or W <= 0:
        raise DomainError("T and W must be > 0")
    if k <= 0:
        raise DomainError("k must be > 0")
    log2_amplitudes = math.log2(k) + 0.5 * math.log2((P + N) / N)
    log2_M = 2.0 * T * W * log2_amplitudes
    count = 2.0 ** log2_M if log2_M < 1024 else math.inf
    return SignalCount(count, log2_M / T)


def interval_levels(L: float, delta: float) -> float:
    """Distinguishable levels in an interval of length L under bounded noise of width delta."""
    if L < 0 or delta <= 0:
        raise DomainError("need L >= 0 and delta > 0")
    return (L + delta) / delta


def sphere_volume_ratio(P: float, N: float, D: int) -> float:
    """Volume ratio of the signal-plus-noise sphere to the noise sphere in D dimensions.

    Radii are ``sqrt(D(P+N))`` and ``sqrt(D N)``; the ratio is the radius ratio
    raised to ``D``, i.e. ``((P+N)/N)^(D/2)``.
    """
    _check_powers(P, N)
    if int(D) != D or D < 1:
        raise DomainError("dimension D must be an integer >= 1")
    radius_ratio = math.sqrt(D * (P + N)) / math.sqrt(D * N)
    return radius_ratio ** D


class MmseEstimate(NamedTuple):
    estimate: float
    error_variance: float


def mmse_estimate(A: float, sigma2: float, N: float, y: float = 0.0) -> MmseEstimate:
    """Linear MMSE estimate of a zero-mean Gaussian ``u`` from ``y = A u + n``.

    ``N`` may be ``inf`` (uninformative observation). ``A = 0`` returns the
    prior mean with the prior variance.
    """
    if sigma2 <= 0:
        raise DomainError("prior variance sigma2 must be > 0")
    if N <= 0:
        raise DomainError("noise variance N must be > 0")
    if math.isinf(N) or A == 0:
        return MmseEstimate(0.0, float(sigma2))
    # algebraically (y/A)/(1 + N/(sigma2 A^2)), written to stay finite as A -> 0
    estimate = y * A * sigma2 / (A * A * sigma2 + N)
    error = sigma2 / (1.0 + sigma2 * A * A / N)
    return MmseEstimate(estimate, error)

"""Amplifier models as statistics transforms, and on-off chain error laws.

Gaussian amplifiers (PIA, PSA) act on :class:`GaussianModeState`; the
photon-number (PNA) and on-off (POA) amplifiers act on
:class:`PhotonDistribution`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import stats

from .errors import DomainError, ValidationError
from .states import GaussianModeState, PhotonDistribution

LOG_DOMAIN_GAIN = 50.0


class AmplifierKind(enum.Enum):
    PIA = "pia"
    PSA = "psa"
    PNA = "pna"
    POA = "poa"


def _check_gain(G):
    if not G >= 1:
        raise DomainError(f"gain G={G} must be >= 1")


def amplify(kind: AmplifierKind, G: float, state, alpha_sq: float | None = None):
    """Output statistics of one amplifier of power gain ``G``.

    ``alpha_sq`` is the regenerated on-pulse energy for the POA.
    """
    _check_gain(G)
    if kind in (AmplifierKind.PIA, AmplifierKind.PSA):
        if not isinstance(state, GaussianModeState):
            raise ValidationError(f"{kind.name} acts on GaussianModeState")
        r = math.sqrt(G)
        if kind is AmplifierKind.PIA:
            return GaussianModeState(r * state.mean_x, r * state.mean_y,
                                     G * state.vxx + (G - 1), G * state.vyy + (G - 1), G * state.vxy)
        return GaussianModeState(r * state.mean_x, state.mean_y / r,
                                 G * state.vxx, state.vyy / G, state.vxy)
    if not isinstance(state, PhotonDistribution):
        raise ValidationError(f"{kind.name} acts on PhotonDistribution")
    if kind is AmplifierKind.PNA:
        if int(G) != G:
            raise DomainError("photon-number amplifier needs an integer gain")
        G = int(G)
        out = np.zeros(G * state.n_max + 1)
        out[::G] = state.probs
        return PhotonDistribution(out)
    if kind is AmplifierKind.POA:
        if alpha_sq is None or alpha_sq < 0:
            raise ValidationError("on-off amplifier needs the output pulse energy alpha_sq >= 0")
        on = PhotonDistribution.poisson(alpha_sq)
        p0 = state.probs[0]
        out = (1.0 - p0) * on.probs
        out[0] += p0
        return PhotonDistribution(out)
    raise ValidationError(f"unsupported amplifier {kind!r}")


def quadrature_snr(state: GaussianModeState) -> float:
    """``<x>^2 / Var x`` for the x quadrature."""
    return state.mean_x ** 2 / state.vxx


def pia_noise_figure(G: float) -> float:
    """Input over output x-quadrature SNR of a PIA fed a coherent state."""
    _check_gain(G)
    return (2 * G - 1) / G


def duplicate_counts(d: PhotonDistribution):
    """Photon-number duplicator: both outputs carry the input count statistics."""
    return d, d


def sample_duplicated_counts(d: PhotonDistribution, size: int, rng: np.random.Generator):
    """Paired count samples from an ideal duplicator (identical by construction)."""
    counts = rng.choice(d.numbers, size=size, p=d.probs)
    return counts, counts.copy()


# -- chains ---------------------------------------------------------------------

@dataclass(frozen=True)
class ChainSpec:
    kind: AmplifierKind
    G: float
    n: int
    S: float
    interstage_loss: float | None = None

    def __post_init__(self):
        _check_gain(self.G)
        if int(self.n) != self.n or self.n < 0:
            raise DomainError("stage count n must be an integer >= 0")
        if self.S < 0:
            raise DomainError("source energy S must be >= 0")
        if self.interstage_loss is None:
            object.__setattr__(self, "interstage_loss", 1.0 / self.G)
        elif not 0 <= self.interstage_loss <= 1:
            raise DomainError("interstage transmittance must lie in [0, 1]")

    @property
    def canonical(self) -> bool:
        return abs(self.interstage_loss * self.G - 1.0) < 1e-12


def pna_chain_exponent(G: float, n: int) -> tuple[float, float]:
    """``(f_n, 1 - f_n)`` for a chain of n photon-number amplifiers with loss 1/G."""
    if not G > 1:
        raise DomainError("gain G must be > 1")
    if int(n) != n or n < 0:
        raise DomainError("stage count n must be an integer >= 0")
    f = 0.0
    if G > LOG_DOMAIN_GAIN:
        base = G * math.log1p(-1.0 / G)
        for _ in range(int(n)):
            f = math.exp(base + G * math.log1p(f / (G - 1)))
    else:
        base = (1 - 1 / G) ** G
        for _ in range(int(n)):
            f = base * (1 + f / (G - 1)) ** G
    return f, 1.0 - f


def pna_chain_error(S: float, G: float, n: int) -> float:
    if S < 0:
        raise DomainError("S must be >= 0")
    return 0.5 * math.exp(-S * pna_chain_exponent(G, n)[1])


def poa_chain_error(S: float, n: int) -> float:
    """On-off chain error ``(1 - (1 - e^-S)^n) / 2``."""
    if S < 0:
        raise DomainError("S must be >= 0")
    if int(n) != n or n < 0:
        raise DomainError("stage count n must be an integer >= 0")
    if n == 0:
        return 0.0
    if S == 0:
        return 0.5
    return -0.5 * math.expm1(n * _log_detect(S))


def _log_detect(S):
    """ln(1 - e^-S), accurate for both small and large S."""
    return math.log(-math.expm1(-S)) if S < math.log(2) else math.log1p(-math.exp(-S))


def repeater_error(S: float, n: int) -> float:
    """Error of n direct-detection repeaters, accumulated stage by stage.

    An off pulse is never misread; an on pulse is lost at a stage with the
    vacuum probability of Poisson(S), after which it stays off. The lost
    probability is accumulated directly to avoid cancellation.
    """
    if S < 0 or n < 0:
        raise DomainError("need S >= 0 and n >= 0")
    miss = stats.poisson.pmf(0, S)
    lost = 0.0
    for _ in range(int(n)):
        lost += (1.0 - lost) * miss
    return 0.5 * lost


def pia_chain_exponent(n: int) -> float:
    if int(n) != n or n < 1:
        raise DomainError("PIA chain exponent needs n >= 1")
    return 1.0 / (4 * n)


class ChainComparison(NamedTuple):
    n: np.ndarray
    pia: np.ndarray
    pna: np.ndarray
    poa: np.ndarray


def chain_comparison(S: float, G: float, n_max: int) -> ChainComparison:
    """Normalized exponents ``ln(2 P_e) / S`` for n = 1..n_max."""
    if not S > 0:
        raise DomainError("S must be > 0")
    if not G > 1:
        raise DomainError("G must be > 1")
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    n = np.arange(1, n_max + 1)
    pia = -1.0 / (4.0 * n)
    pna = np.empty(n_max)
    f = 0.0
    log_domain = G > LOG_DOMAIN_GAIN
    base = G * math.log1p(-1.0 / G) if log_domain else (1 - 1 / G) ** G
    for k in range(n_max):
        if log_domain:
            f = math.exp(base + G * math.log1p(f / (G - 1)))
        else:
            f = base * (1 + f / (G - 1)) ** G
        pna[k] = -(1.0 - f)
    poa = np.log(-np.expm1(n * _log_detect(S))) / S
    return ChainComparison(n, pia, pna, poa)

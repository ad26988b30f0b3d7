"""Single-mode state numerics.

Quadratures follow ``a = (x + i y) / 2``, so a coherent state has unit
variance in every quadrature and the uncertainty relation reads
``vxx * vyy - vxy**2 >= 1``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import singledispatch
from typing import NamedTuple

import numpy as np
from scipy import stats

from .errors import DomainError, SqueezeCommError, ValidationError
from .infotheory import DiscreteDistribution, JointDistribution, mutual_information

NORM_TOL = 1e-10
POM_TOL = 1e-8
EIG_CLAMP = 1e-12
TAIL_GUARD = 1e-10
DEFAULT_N_MAX = 40


def _check_eta(eta):
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"transmittance eta={eta} outside [0, 1]")


# -- Gaussian single-mode states ---------------------------------------------

@dataclass(frozen=True)
class GaussianModeState:
    mean_x: float
    mean_y: float
    vxx: float
    vyy: float
    vxy: float = 0.0

    def __post_init__(self):
        if not (self.vxx > 0 and self.vyy > 0):
            raise ValidationError("quadrature variances must be positive")
        if self.determinant < 1.0 - NORM_TOL:
            raise ValidationError(
                f"covariance violates the uncertainty relation (det={self.determinant:.12g} < 1)")

    @property
    def determinant(self) -> float:
        return self.vxx * self.vyy - self.vxy ** 2

    @property
    def covariance(self) -> np.ndarray:
        return np.array([[self.vxx, self.vxy], [self.vxy, self.vyy]])

    @property
    def mean(self) -> np.ndarray:
        return np.array([self.mean_x, self.mean_y])

    @property
    def mean_photons(self) -> float:
        """<a^dagger a> = (<x^2> + <y^2>)/4 - 1/2."""
        return (self.mean_x ** 2 + self.mean_y ** 2 + self.vxx + self.vyy) / 4.0 - 0.5

    @classmethod
    def coherent(cls, alpha: complex = 0.0) -> "GaussianModeState":
        return cls(2 * complex(alpha).real, 2 * complex(alpha).imag, 1.0, 1.0, 0.0)

    @classmethod
    def from_tcs(cls, p: "TcsParams") -> "GaussianModeState":
        st = tcs_stats(p)
        c, s = math.cos(st.theta), math.sin(st.theta)
        a, b = st.var_x, st.var_y
        alpha = complex(p.alpha)
        return cls(2 * alpha.real, 2 * alpha.imag,
                   a * c * c + b * s * s, a * s * s + b * c * c, (a - b) * s * c)

    def quadrature_variance(self, theta: float) -> float:
        """Variance of ``x cos(theta) + y sin(theta)``."""
        c, s = math.cos(theta), math.sin(theta)
        return self.vxx * c * c + 2 * self.vxy * s * c + self.vyy * s * s


@dataclass(frozen=True)
class TcsParams:
    """Two-photon coherent state parameters; ``alpha`` is the mean of ``a``."""

    mu: complex
    nu: complex
    alpha: complex = 0.0

    def __post_init__(self):
        norm = abs(self.mu) ** 2 - abs(self.nu) ** 2
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"|mu|^2 - |nu|^2 = {norm:.12g}, must equal 1")

    @classmethod
    def squeezed(cls, r: float, phi: float = 0.0, alpha: complex = 0.0) -> "TcsParams":
        return cls(math.cosh(r), cmath.exp(1j * phi) * math.sinh(r), alpha)


class TcsStats(NamedTuple):
    mean_x: float
    var_x: float
    var_y: float
    energy: float
    theta: float


def tcs_stats(p: TcsParams) -> TcsStats:
    """Principal-axis quadrature statistics of a TCS.

    ``theta = (arg nu - arg mu)/2`` selects the squeezed quadrature
    ``x cos(theta) + y sin(theta)``; ``mean_x`` is its mean.
    """
    mu, nu, alpha = complex(p.mu), complex(p.nu), complex(p.alpha)
    theta = 0.5 * (cmath.phase(nu) - cmath.phase(mu)) if nu != 0 else 0.0
    am, an = abs(mu), abs(nu)
    mean_x = 2.0 * (alpha * cmath.exp(-1j * theta)).real
    return TcsStats(mean_x, (am - an) ** 2, (am + an) ** 2, abs(alpha) ** 2 + an ** 2, theta)


class SnrOptimum(NamedTuple):
    nu_opt: float
    snr_opt: float
    snr_coherent: float


def snr_objective(nu, S):
    """Homodyne SNR ``4 (S - nu^2)(mu + nu)^2`` with ``mu = sqrt(1 + nu^2)``."""
    nu = np.asarray(nu, dtype=float)
    return 4.0 * (S - nu ** 2) * (np.sqrt(1.0 + nu ** 2) + nu) ** 2


def optimize_snr(S: float, check: bool = False) -> SnrOptimum:
    """Best single-quadrature SNR of a TCS with mean energy ``S``.

    With ``check=True`` the closed form is compared against a coarse scan of
    the objective (step 1e-3 in nu).
    """
    if S < 0:
        raise DomainError("energy S must be >= 0")
    nu = S / math.sqrt(2 * S + 1)
    snr = 4 * S * (S + 1)
    if check and S > 0:
        grid = np.arange(0.0, math.sqrt(S), 1e-3)
        best = float(snr_objective(grid, S).max())
        if best > snr * (1 + 1e-9) or best < snr * (1 - 1e-4):
            raise SqueezeCommError(f"SNR closed form {snr} disagrees with scan maximum {best}")
    return SnrOptimum(nu, float(snr), 4.0 * S)


# -- photon-number distributions ---------------------------------------------

@dataclass(frozen=True)
class PhotonDistribution:
    """Probability vector over photon numbers ``0..n_max``."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValidationError("photon distribution must be a non-empty vector")
        if np.any(~np.isfinite(p)) or np.any(p < 0):
            raise ValidationError("photon probabilities must be finite and nonnegative")
        if abs(p.sum() - 1.0) > NORM_TOL:
            raise ValidationError(f"photon probabilities sum to {p.sum():.15g}")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def fock(cls, n: int, n_max: int | None = None) -> "PhotonDistribution":
        if n < 0:
            raise DomainError("photon number must be >= 0")
        p = np.zeros((n if n_max is None else n_max) + 1)
        p[n] = 1.0
        return cls(p)

    @classmethod
    def poisson(cls, mean: float, n_max: int | None = None) -> "PhotonDistribution":
        """Truncated Poisson law; ``n_max`` defaults to a 1e-15 tail cut."""
        if mean < 0:
            raise DomainError("Poisson mean must be >= 0")
        if n_max is None:
            n_max = int(stats.poisson.isf(1e-15, mean)) + 1 if mean > 0 else 0
        elif stats.poisson.sf(n_max, mean) >= TAIL_GUARD:
            raise ValidationError(f"n_max={n_max} truncates more than {TAIL_GUARD} of Poisson({mean})")
        p = stats.poisson.pmf(np.arange(n_max + 1), mean)
        return cls(p / p.sum())

    @property
    def n_max(self) -> int:
        return self.probs.size - 1

    @property
    def numbers(self) -> np.ndarray:
        return np.arange(self.probs.size)

    @property
    def mean(self) -> float:
        return float(self.probs @ self.numbers)

    @property
    def variance(self) -> float:
        n = self.numbers
        return float(self.probs @ (n - self.mean) ** 2)

    def padded(self, n_max: int) -> np.ndarray:
        out = np.zeros(max(n_max, self.n_max) + 1)
        out[: self.probs.size] = self.probs
        return out


# -- loss channel -------------------------------------------------------------

@singledispatch
def apply_loss(state, eta: float):
    """Beam-splitter loss with transmittance ``eta``."""
    raise ValidationError(f"cannot apply loss to {type(state).__name__}")


@apply_loss.register
def _(state: GaussianModeState, eta: float) -> GaussianModeState:
    _check_eta(eta)
    r = math.sqrt(eta)
    return GaussianModeState(r * state.mean_x, r * state.mean_y,
                             eta * state.vxx + (1 - eta), eta * state.vyy + (1 - eta),
                             eta * state.vxy)


@apply_loss.register
def _(state: PhotonDistribution, eta: float) -> PhotonDistribution:
    _check_eta(eta)
    n = state.numbers
    # binom.pmf overflows internally for subnormal eta; the log form does not
    thin = np.exp(stats.binom.logpmf(n[None, :], n[:, None], eta))
    return PhotonDistribution(state.probs @ thin)


# -- density matrices, ensembles, POMs ---------------------------------------

def _check_density(rho, where="density matrix") -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValidationError(f"{where} must be square")
    if np.max(np.abs(rho - rho.conj().T)) > NORM_TOL:
        raise ValidationError(f"{where} is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > NORM_TOL:
        raise ValidationError(f"{where} has trace {np.trace(rho).real:.12g}")
    if np.linalg.eigvalsh(rho).min() < -NORM_TOL:
        raise ValidationError(f"{where} has a negative eigenvalue")
    return rho


def von_neumann_entropy(rho) -> float:
    """Entropy in bits; eigenvalues below 1e-12 count as zero."""
    w = np.linalg.eigvalsh(np.asarray(rho, dtype=complex))
    w = w[w > EIG_CLAMP]
    return float(-np.sum(w * np.log2(w))) + 0.0


@dataclass(frozen=True)
class FockEnsemble:
    priors: DiscreteDistribution
    states: tuple

    def __post_init__(self):
        priors = self.priors
        if not isinstance(priors, DiscreteDistribution):
            priors = DiscreteDistribution(priors)
        states = tuple(_check_density(r, f"state {i}") for i, r in enumerate(self.states))
        if len(states) != len(priors):
            raise ValidationError("need one prior per state")
        if len({r.shape for r in states}) != 1:
            raise ValidationError("all states must share one truncated space")
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "states", states)

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    @property
    def average_state(self) -> np.ndarray:
        return np.einsum("i,ijk->jk", self.priors.probs, np.stack(self.states))


@dataclass(frozen=True)
class Pom:
    elements: tuple

    def __post_init__(self):
        els = tuple(np.asarray(e, dtype=complex) for e in self.elements)
        if not els:
            raise ValidationError("a POM needs at least one element")
        d = els[0].shape
        for i, e in enumerate(els):
            if e.shape != d or e.ndim != 2 or d[0] != d[1]:
                raise ValidationError("POM elements must be square and of equal size")
            if np.max(np.abs(e - e.conj().T)) > NORM_TOL:
                raise ValidationError(f"POM element {i} is not Hermitian")
            if np.linalg.eigvalsh(e).min() < -NORM_TOL:
                raise ValidationError(f"POM element {i} is not positive")
        if np.max(np.abs(sum(els) - np.eye(d[0]))) > POM_TOL:
            raise ValidationError("POM elements do not sum to the identity")
        object.__setattr__(self, "elements", els)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    @classmethod
    def photon_counting(cls, dim: int) -> "Pom":
        return cls(tuple(np.diag(np.eye(dim)[k]) for k in range(dim)))


def holevo_chi(e: FockEnsemble) -> float:
    """Entropy bound ``S(rho_bar) - sum p S(rho)`` in bits."""
    inner = sum(p * von_neumann_entropy(r) for p, r in zip(e.priors.probs, e.states))
    return max(von_neumann_entropy(e.average_state) - inner, 0.0)


def pom_mutual_information(e: FockEnsemble, m: Pom) -> float:
    """Mutual information between ensemble label and POM outcome, in bits."""
    if m.dim != e.dim:
        raise ValidationError(f"POM dimension {m.dim} does not match ensemble dimension {e.dim}")
    R = np.stack(e.states)
    O = np.stack(m.elements)
    # tr(rho_i O_k) = sum_ab rho_i[a,b] O_k[b,a]
    cond = np.einsum("iab,kba->ik", R, O).real
    joint = np.clip(e.priors.probs[:, None] * cond, 0.0, None)
    return mutual_information(JointDistribution(joint / joint.sum()))


def number_state_ensemble(S: float, n_max: int | None = None) -> FockEnsemble:
    """Fock states |n> with geometric (thermal) priors of mean ``S``.

    ``n_max=None`` uses the smallest truncation of at least 40 whose dropped
    prior mass is below 1e-10. An explicit ``n_max`` that drops more than that
    is rejected.
    """
    if S < 0:
        raise DomainError("mean photon number must be >= 0")
    ratio = S / (1.0 + S)
    needed = 0 if S == 0 else int(math.ceil(math.log(TAIL_GUARD) / math.log(ratio))) - 1
    if n_max is None:
        n_max = max(DEFAULT_N_MAX, needed)
    elif n_max < needed:
        raise ValidationError(f"n_max={n_max} leaves geometric tail mass >= {TAIL_GUARD}")
    w = ratio ** np.arange(n_max + 1)
    priors = DiscreteDistribution.normalized(w)
    eye = np.eye(n_max + 1)
    return FockEnsemble(priors, tuple(np.diag(eye[k]) for k in range(n_max + 1)))


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Ginibre-distributed mixed state ``G G^dagger / tr``."""
    k = dim if rank is None else rank
    G = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
    rho = G @ G.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def random_pom(dim: int, outcomes: int, rng: np.random.Generator) -> Pom:
    """Random POM ``T^{-1/2} G_k T^{-1/2}`` with ``T = sum G_k``."""
    Gs = []
    for _ in range(outcomes):
        A = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        Gs.append(A @ A.conj().T)
    T = sum(Gs)
    w, U = np.linalg.eigh(T)
    Tih = (U / np.sqrt(w)) @ U.conj().T
    els = []
    for G in Gs:
        E = Tih @ G @ Tih
        els.append(0.5 * (E + E.conj().T))
    return Pom(tuple(els))


def random_ensemble(dim: int, size: int, rng: np.random.Generator) -> FockEnsemble:
    priors = DiscreteDistribution.normalized(rng.random(size) + 1e-3)
    return FockEnsemble(priors, tuple(random_density_matrix(dim, rng) for _ in range(size)))

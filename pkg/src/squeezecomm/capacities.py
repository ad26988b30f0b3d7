"""Narrowband boson-channel capacities and the lossy-channel upper bound.

Per-mode formulas are multiplied by the bandwidth ``W`` (modes per second),
so ``W = 1`` gives bits per mode. The coherent-state photon-counting capacity
has no closed form and is computed numerically on an intensity grid.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy import linalg, stats

from . import _kernels
from .errors import ConfigurationError, ConvergenceError, DomainError, ValidationError

LN2 = math.log(2.0)
POISSON_TAIL_GUARD = 1e-10


class CapacityKind(enum.Enum):
    NumberState = "number_state"
    TcsHomodyne = "tcs_homodyne"
    CoherentHeterodyne = "coherent_heterodyne"
    CoherentHomodyne = "coherent_homodyne"
    CoherentPhotonCounting = "coherent_photon_counting"

    @classmethod
    def parse(cls, name: str) -> "CapacityKind":
        key = name.strip().lower().replace("-", "_")
        aliases = {"op": "number_state", "number": "number_state", "tcs": "tcs_homodyne",
                   "het": "coherent_heterodyne", "hom": "coherent_homodyne",
                   "ph": "coherent_photon_counting", "photon_counting": "coherent_photon_counting"}
        key = aliases.get(key, key)
        for kind in cls:
            if kind.value == key or kind.name.lower() == key:
                return kind
        raise ConfigurationError(f"unknown capacity kind {name!r}; valid: {[k.value for k in cls]}")


def _check_S(S):
    S = np.asarray(S, dtype=float)
    if np.any(S < 0) or np.any(~np.isfinite(S)):
        raise DomainError("photon number S must be finite and >= 0")
    return S


def g_nats(S):
    """``(S+1) ln(S+1) - S ln S`` in nats (vectorized, 0 at S = 0)."""
    S = _check_S(S)
    out = (S + 1.0) * np.log1p(S) - np.where(S > 0, S * np.log(np.where(S > 0, S, 1.0)), 0.0)
    return out if out.ndim else float(out)


def g_entropy(S):
    """Maximum photon-number entropy at mean ``S``, in bits per mode."""
    return g_nats(S) / LN2


# -- numerical photon-counting capacity -------------------------------------

@dataclass(frozen=True)
class PoissonSolverOptions:
    """Discretization and stopping rules for the photon-counting capacity.

    The input-intensity grid is uniform on
    ``[0, lambda_max_factor * S + lambda_max_offset]``. ``n_max`` is the count
    truncation (a final column collects the tail); ``None`` picks
    ``ceil(10 S + 10 sqrt(10 S) + 30)``.

    ``method`` is ``"newton"`` (log-barrier Newton on the full constrained
    problem) or ``"blahut-arimoto"`` (Lagrangian Blahut-Arimoto with the
    multiplier found by bisection). ``tol`` is in bits.
    """

    grid_points: int = 201
    lambda_max_factor: float = 10.0
    lambda_max_offset: float = 10.0
    n_max: int | None = None
    tol: float = 1e-6
    max_iters: int = 5000
    method: str = "newton"

    def __post_init__(self):
        if self.grid_points < 2:
            raise ValidationError("grid_points must be >= 2")
        if self.tol <= 0:
            raise ValidationError("tol must be > 0")
        if self.max_iters < 1:
            raise ValidationError("max_iters must be >= 1")
        if self.lambda_max_factor < 0 or self.lambda_max_offset < 0 or (
                self.lambda_max_factor == 0 and self.lambda_max_offset == 0):
            raise ValidationError("intensity grid upper bound must be positive")
        if self.method not in ("newton", "blahut-arimoto"):
            raise ValidationError(f"unknown method {self.method!r}")

    def lambda_max(self, S: float) -> float:
        return self.lambda_max_factor * S + self.lambda_max_offset

    def resolved_n_max(self, S: float) -> int:
        if self.n_max is not None:
            return int(self.n_max)
        n = int(math.ceil(10 * S + 10 * math.sqrt(10 * S) + 30))
        # for small S the +offset on the intensity grid outgrows the formula
        lam_max = self.lambda_max(S)
        if stats.poisson.sf(n, lam_max) >= POISSON_TAIL_GUARD:
            n = int(stats.poisson.isf(POISSON_TAIL_GUARD / 10, lam_max)) + 1
        return n

    def refined(self, factor: int = 2) -> "PoissonSolverOptions":
        """Same options with ``factor`` times the grid points and count truncation."""
        n = None if self.n_max is None else self.n_max * factor
        return replace(self, grid_points=(self.grid_points - 1) * factor + 1, n_max=n)


def poisson_channel(S: float, opts: PoissonSolverOptions):
    """Intensity grid and row-stochastic Poisson count matrix for mean budget S.

    Columns are counts ``0..n_max`` plus one tail column; columns that are
    zero for every input (underflow) are dropped.
    """
    lam_max = opts.lambda_max(S)
    n_max = opts.resolved_n_max(S)
    tail = stats.poisson.sf(n_max, lam_max)
    if tail >= POISSON_TAIL_GUARD:
        raise ValidationError(
            f"n_max={n_max} leaves Poisson tail mass {tail:.3g} at intensity {lam_max:g}; "
            f"need < {POISSON_TAIL_GUARD:g}")
    lam = np.linspace(0.0, lam_max, opts.grid_points)
    counts = np.arange(n_max + 1)
    W = stats.poisson.pmf(counts[None, :], lam[:, None])
    W = np.concatenate([W, stats.poisson.sf(n_max, lam)[:, None]], axis=1)
    W = np.ascontiguousarray(W[:, W.max(axis=0) > 0])
    return lam, W


def _row_wlogw(W):
    return np.sum(np.where(W > 0, W * np.log(np.where(W > 0, W, 1.0)), 0.0), axis=1)


@dataclass(frozen=True)
class PoissonCapacityResult:
    capacity: float            # bits per mode
    multiplier: float          # nats per unit intensity on the mean constraint
    intensities: np.ndarray
    input_probs: np.ndarray
    gap: float                 # certified upper bound minus capacity, bits
    iterations: int
    method: str

    @property
    def mean_intensity(self) -> float:
        return float(self.input_probs @ self.intensities)


def _dual_bound(W, wlogw, lam, p, s, S):
    """max_i [D(W_i||q) - s lam_i] + s S, an upper bound on C(S) for s >= 0."""
    q = p @ W
    D = wlogw - W @ np.log(np.where(q > 0, q, 1.0))
    return float(np.max(D - s * lam) + s * S), float(p @ D)


def _interior_start(lam, S):
    G = lam.size
    p = np.full(G, 1.0 / G)
    mu = p @ lam
    if mu > S:
        a = S / mu
        p = a * p
        p[np.argmin(lam)] += 1.0 - a
    elif mu < S:
        hi = np.argmax(lam)
        a = (lam[hi] - S) / (lam[hi] - mu)
        p = a * p
        p[hi] += 1.0 - a
    return p


def _barrier_solve(W, wlogw, lam, A, b, p, tol_nats, max_iters):
    """Log-barrier Newton maximization of I(p) subject to A p = b, p > 0.

    Works in the scaled variable ``u = dp / p`` so that the Newton matrix
    ``P W diag(1/q) W^T P + mu I`` stays well conditioned as masses vanish.
    Returns ``(p, y, newton_steps)`` with ``y`` the equality multipliers.
    """
    G = p.size
    mu = 1e-2
    steps = 0
    y = np.zeros(A.shape[0])

    def objective(p):
        q = p @ W
        return float(p @ wlogw - q @ np.log(q))

    while True:
        for _ in range(200):
            q = p @ W
            D = wlogw - W @ np.log(q)
            g = p * (D - 1.0) + mu                    # P * grad F
            PW = p[:, None] * W
            M = (PW / q) @ PW.T
            M[np.diag_indices_from(M)] += mu
            At = (A * p).T
            try:
                cf = linalg.cho_factor(M, check_finite=False)
            except linalg.LinAlgError:
                M[np.diag_indices_from(M)] += 1e-14 * np.trace(M)
                cf = linalg.cho_factor(M, check_finite=False)
            Mg = linalg.cho_solve(cf, g, check_finite=False)
            MA = linalg.cho_solve(cf, At, check_finite=False)
            y = np.linalg.solve(At.T @ MA, At.T @ Mg)
            u = Mg - MA @ y
            decrement = float(u @ (g - At @ y))
            steps += 1
            if decrement < 1e-14:
                break
            dp = p * u
            neg = u < 0
            t = min(1.0, 0.99 / np.max(-u[neg])) if np.any(neg) else 1.0
            f0 = objective(p) + mu * np.sum(np.log(p))
            slope = float(g @ u)
            while t > 1e-14:
                pn = p + t * dp
                if np.all(pn > 0) and objective(pn) + mu * np.sum(np.log(pn)) >= f0 + 0.25 * t * slope:
                    break
                t *= 0.5
            p = pn
            # keep the equality constraints exact against drift
            p = np.maximum(p, 1e-300)
            if steps >= max_iters:
                raise ConvergenceError(
                    f"barrier Newton did not converge in {max_iters} steps",
                    last_value=objective(p) / LN2, gap_bound=G * mu / LN2)
        if G * mu < 0.1 * tol_nats:
            return p, y, steps
        mu *= 0.1


def _solve_newton(W, wlogw, lam, S, opts):
    tol = opts.tol * LN2
    G = lam.size
    p0 = _interior_start(lam, S)
    A = np.vstack([np.ones(G), lam])
    p, y, steps = _barrier_solve(W, wlogw, lam, A, np.array([1.0, S]), p0, tol, opts.max_iters)
    s = y[1]
    if s < 0:
        # mean constraint not binding: maximize over the simplex alone
        p, y, more = _barrier_solve(W, wlogw, lam, A[:1], np.array([1.0]),
                                    np.full(G, 1.0 / G), tol, opts.max_iters)
        steps += more
        s = 0.0
    upper, I = _dual_bound(W, wlogw, lam, p, s, S)
    return I, s, p, (upper - I), steps


def _solve_blahut_arimoto(W, wlogw, lam, S, opts):
    tol = opts.tol * LN2
    G = lam.size
    uniform = np.full(G, 1.0 / G)
    iters = 0

    def run(s, p):
        nonlocal iters
        I, mean, gap, it = _kernels.ba_fixed_multiplier(W, wlogw, lam, s, p, tol, opts.max_iters)
        iters += it
        if it >= opts.max_iters:
            raise ConvergenceError(
                f"Blahut-Arimoto did not converge in {opts.max_iters} iterations at multiplier {s:.6g}",
                last_value=I / LN2, gap_bound=gap / LN2)
        return I, mean

    p = uniform.copy()
    I, mean = run(0.0, p)
    if mean <= S * (1 + 1e-6):
        return I, 0.0, p, iters
    lo, hi = 0.0, 1.0
    while True:
        trial = 0.9 * p + 0.1 * uniform
        I, mean = run(hi, trial)
        if mean < S:
            p = trial
            break
        lo, hi, p = hi, 2.0 * hi, trial
    s = hi
    for _ in range(80):
        if abs(mean - S) <= 1e-6 * S:
            break
        s = 0.5 * (lo + hi)
        # mixing in the uniform law keeps every letter alive between solves
        p = 0.9 * p + 0.1 * uniform
        I, mean = run(s, p)
        if mean > S:
            lo = s
        else:
            hi = s
    # first-order correction onto the budget: dC/dS equals the multiplier
    return I + s * (S - mean), s, p, iters


def solve_poisson_capacity(S: float, opts: PoissonSolverOptions) -> PoissonCapacityResult:
    """Capacity of the Poisson counting channel under a mean-intensity budget ``S``."""
    if opts is None:
        raise ConfigurationError("photon-counting capacity needs PoissonSolverOptions")
    S = float(_check_S(S))
    if S == 0.0:
        return PoissonCapacityResult(0.0, 0.0, np.zeros(1), np.ones(1), 0.0, 0, opts.method)
    lam, W = poisson_channel(S, opts)
    wlogw = _row_wlogw(W)
    if opts.method == "newton":
        I, s, p, gap, steps = _solve_newton(W, wlogw, lam, S, opts)
    else:
        I, s, p, steps = _solve_blahut_arimoto(W, wlogw, lam, S, opts)
        upper, _ = _dual_bound(W, wlogw, lam, p, max(s, 0.0), S)
        gap = max(upper - I, 0.0)
    return PoissonCapacityResult(max(I, 0.0) / LN2, s, lam, p, max(gap, 0.0) / LN2, steps, opts.method)


def poisson_capacity(S: float, opts: PoissonSolverOptions) -> float:
    """Photon-counting capacity of coherent states in bits per mode."""
    return solve_poisson_capacity(S, opts).capacity


# -- closed forms, tables ---------------------------------------------------

def capacity(kind: CapacityKind, S: float, W: float = 1.0, opts: PoissonSolverOptions | None = None) -> float:
    """Capacity in bits per second of the chosen state/detection pair."""
    if W <= 0:
        raise DomainError("bandwidth W must be > 0")
    S = float(_check_S(S))
    if kind is CapacityKind.NumberState:
        return W * g_entropy(S)
    if kind is CapacityKind.TcsHomodyne:
        return W * math.log1p(2 * S) / LN2
    if kind is CapacityKind.CoherentHeterodyne:
        return W * math.log1p(S) / LN2
    if kind is CapacityKind.CoherentHomodyne:
        return 0.5 * W * math.log1p(4 * S) / LN2
    if kind is CapacityKind.CoherentPhotonCounting:
        if opts is None:
            raise ConfigurationError("CoherentPhotonCounting requires PoissonSolverOptions")
        return W * poisson_capacity(S, opts)
    raise ConfigurationError(f"unsupported capacity kind {kind!r}")


def lossy_upper_bound(S: float, eta: float, W: float = 1.0) -> float:
    """Upper bound ``W g(eta S)`` on the capacity of a lossy channel."""
    if not 0.0 <= eta <= 1.0:
        raise DomainError("transmittance eta must lie in [0, 1]")
    if W <= 0:
        raise DomainError("bandwidth W must be > 0")
    return W * g_entropy(eta * float(_check_S(S)))


@dataclass(frozen=True)
class CapacityCurve:
    kind: CapacityKind
    W: float
    S: np.ndarray
    C: np.ndarray
    eta: float = 1.0

    def __post_init__(self):
        S = np.asarray(self.S, dtype=float)
        C = np.asarray(self.C, dtype=float)
        if S.shape != C.shape or S.ndim != 1:
            raise ValidationError("S and C must be matching 1-D arrays")
        if np.any(np.diff(S) <= 0):
            raise ValidationError("S samples must be strictly increasing")
        if np.any(C < 0):
            raise ValidationError("capacities must be nonnegative")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "C", C)

    @property
    def samples(self):
        return list(zip(self.S.tolist(), self.C.tolist()))


def capacity_table(kinds: Sequence[CapacityKind], S_grid: Sequence[float], W: float = 1.0,
                   eta: float = 1.0, opts: PoissonSolverOptions | None = None,
                   workers: int = 1) -> list[CapacityCurve]:
    """Sample each capacity kind on ``S_grid``.

    With ``eta < 1`` every kind is evaluated at the received energy ``eta * S``:
    exact for the coherent-state kinds, the lossy upper bound for number
    states, and an optimistic value for TCS (loss also degrades squeezing).
    The result does not depend on ``workers``.
    """
    if not 0.0 <= eta <= 1.0:
        raise DomainError("transmittance eta must lie in [0, 1]")
    S_grid = np.asarray(S_grid, dtype=float)
    _check_S(S_grid)
    curves = []
    for kind in kinds:
        def one(S, kind=kind):
            return capacity(kind, eta * S, W, opts)
        if kind is CapacityKind.CoherentPhotonCounting and workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                values = list(pool.map(one, S_grid))
        else:
            values = [one(S) for S in S_grid]
        curves.append(CapacityCurve(kind, W, S_grid, np.array(values), eta))
    return curves

"""Hot inner loops with a numba path and a pure-numpy fallback.

Set ``SQUEEZECOMM_DISABLE_NUMBA=1`` to force the numpy implementations (also
used automatically when numba is not importable). Both paths implement the
same arithmetic; results agree to rounding, not bit-for-bit.
"""
import os

import numpy as np

_DISABLED = os.environ.get("SQUEEZECOMM_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and not _DISABLED


# -- Blahut-Arimoto with a cost multiplier -----------------------------------

def ba_fixed_multiplier_numpy(W, wlogw, cost, s, p, tol, max_iters):
    """Blahut-Arimoto iterations maximizing ``I(p) - s * <cost>_p`` (nats).

    ``W`` is the row-stochastic channel matrix, ``wlogw[i] = sum_k W log W``.
    ``p`` is updated in place. Iteration stops once the Lagrangian objective
    increases by less than ``tol`` between successive iterates.

    Returns ``(I, mean_cost, gap, iterations)``, where ``gap`` bounds the
    distance of the Lagrangian objective from its maximum.
    """
    Vprev = -np.inf
    I = mean = gap = np.nan
    for it in range(max_iters):
        q = p @ W
        logq = np.log(np.where(q > 0, q, 1.0))
        D = wlogw - W @ logq
        I = float(p @ D)
        mean = float(p @ cost)
        e = D - s * cost
        m = e.max()
        V = I - s * mean
        gap = float(m - V)
        if V - Vprev < tol:
            return I, mean, gap, it
        Vprev = V
        a = p * np.exp(e - m)
        p[:] = a / a.sum()
    return I, mean, gap, max_iters


def _ba_fixed_multiplier_loops(W, wlogw, cost, s, p, tol, max_iters):
    G, K = W.shape
    q = np.empty(K)
    e = np.empty(G)
    Vprev = -np.inf
    I = 0.0
    mean = 0.0
    gap = np.inf
    for it in range(max_iters):
        for k in range(K):
            q[k] = 0.0
        for i in range(G):
            pi = p[i]
            if pi == 0.0:
                continue
            for k in range(K):
                q[k] += pi * W[i, k]
        for k in range(K):
            q[k] = np.log(q[k]) if q[k] > 0.0 else 0.0
        I = 0.0
        mean = 0.0
        m = -np.inf
        for i in range(G):
            d = wlogw[i]
            for k in range(K):
                d -= W[i, k] * q[k]
            I += p[i] * d
            mean += p[i] * cost[i]
            e[i] = d - s * cost[i]
            if e[i] > m:
                m = e[i]
        V = I - s * mean
        gap = m - V
        if V - Vprev < tol:
            return I, mean, gap, it
        Vprev = V
        z = 0.0
        for i in range(G):
            p[i] = p[i] * np.exp(e[i] - m)
            z += p[i]
        for i in range(G):
            p[i] /= z
    return I, mean, gap, max_iters


# -- FM receiver: coarse bin pick plus energy centroid ----------------------

def fm_estimate_numpy(energy, noise_energy):
    """Pick the max-energy bin and refine by a 3-bin energy centroid.

    ``energy`` has shape ``(trials, m)``; bins are cyclic with centres at
    ``k + 0.5``. ``noise_energy`` (mean noise energy per bin) is subtracted
    before weighting, clipped at zero. Returns ``(kstar, position)`` with
    position in bin units on ``[0, m)``.
    """
    trials, m = energy.shape
    kstar = np.argmax(energy, axis=1)
    rows = np.arange(trials)
    num = np.zeros(trials)
    den = np.zeros(trials)
    for off in (-1, 0, 1):
        w = np.maximum(energy[rows, (kstar + off) % m] - noise_energy, 0.0)
        num += off * w
        den += w
    shift = np.divide(num, den, out=np.zeros(trials), where=den > 0)
    return kstar, np.mod(kstar + 0.5 + shift, m)


def _fm_estimate_loops(energy, noise_energy):
    trials, m = energy.shape
    kstar = np.empty(trials, dtype=np.int64)
    pos = np.empty(trials)
    for t in range(trials):
        best = 0
        for k in range(1, m):
            if energy[t, k] > energy[t, best]:
                best = k
        num = 0.0
        den = 0.0
        for off in range(-1, 2):
            w = energy[t, (best + off) % m] - noise_energy
            if w > 0.0:
                num += off * w
                den += w
        shift = num / den if den > 0.0 else 0.0
        kstar[t] = best
        x = (best + 0.5 + shift) % m
        pos[t] = x
    return kstar, pos


if HAS_NUMBA:
    ba_fixed_multiplier_numba = njit(cache=True)(_ba_fixed_multiplier_loops)
    fm_estimate_numba = njit(cache=True)(_fm_estimate_loops)
else:  # pragma: no cover - depends on environment
    ba_fixed_multiplier_numba = None
    fm_estimate_numba = None


def ba_fixed_multiplier(W, wlogw, cost, s, p, tol, max_iters):
    if USE_NUMBA:
        return ba_fixed_multiplier_numba(W, wlogw, cost, float(s), p, float(tol), int(max_iters))
    return ba_fixed_multiplier_numpy(W, wlogw, cost, s, p, tol, max_iters)


def fm_estimate(energy, noise_energy):
    if USE_NUMBA:
        return fm_estimate_numba(np.ascontiguousarray(energy, dtype=np.float64), float(noise_energy))
    return fm_estimate_numpy(energy, noise_energy)

"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py --repeat 5

Both implementations are called directly, so the SQUEEZECOMM_DISABLE_NUMBA
flag does not matter here. The first numba call (compilation) is excluded.
"""
import argparse
import time

import numpy as np

from squeezecomm import _kernels
from squeezecomm.capacities import PoissonSolverOptions, poisson_channel


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_ba(S, grid_points, iters, repeat):
    lam, W = poisson_channel(S, PoissonSolverOptions(grid_points=grid_points))
    with np.errstate(divide="ignore", invalid="ignore"):
        wlogw = np.where(W > 0, W * np.log(W), 0.0).sum(1)
    p0 = np.full(lam.size, 1.0 / lam.size)

    def run(kernel):
        # tol=0 forces exactly `iters` iterations
        return lambda: kernel(W, wlogw, lam, 0.5, p0.copy(), 0.0, iters)

    out = {"numpy": best_of(run(_kernels.ba_fixed_multiplier_numpy), repeat)}
    if _kernels.HAS_NUMBA:
        run(_kernels.ba_fixed_multiplier_numba)()
        out["numba"] = best_of(run(_kernels.ba_fixed_multiplier_numba), repeat)
    return f"blahut-arimoto {W.shape[0]}x{W.shape[1]}, {iters} iters", out


def bench_fm(trials, m, repeat):
    rng = np.random.default_rng(0)
    energy = rng.exponential(2.0, size=(trials, m))
    energy[np.arange(trials), rng.integers(0, m, trials)] += 50.0
    out = {"numpy": best_of(lambda: _kernels.fm_estimate_numpy(energy, 2.0), repeat)}
    if _kernels.HAS_NUMBA:
        _kernels.fm_estimate_numba(energy, 2.0)
        out["numba"] = best_of(lambda: _kernels.fm_estimate_numba(energy, 2.0), repeat)
    return f"fm_estimate {trials} trials x {m} bins", out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--S", type=float, default=1.0)
    ap.add_argument("--grid-points", type=int, default=201)
    ap.add_argument("--iters", type=int, default=200)
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--m", type=int, default=64)
    args = ap.parse_args()

    if not _kernels.HAS_NUMBA:
        print("numba is not importable; timing the numpy path only")
    rows = [bench_ba(args.S, args.grid_points, args.iters, args.repeat),
            bench_fm(args.trials, args.m, args.repeat)]
    print(f"{'kernel':44s} {'numpy(ms)':>10s} {'numba(ms)':>10s} {'speedup':>8s}")
    for name, t in rows:
        nb = t.get("numba")
        nb_txt = f"{1e3 * nb:10.2f}" if nb else f"{'-':>10s}"
        sp = f"{t['numpy'] / nb:8.1f}" if nb else f"{'-':>8s}"
        print(f"{name:44s} {1e3 * t['numpy']:10.2f} {nb_txt} {sp}")


if __name__ == "__main__":
    main()

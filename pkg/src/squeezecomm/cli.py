"""Command-line front end.

Each subcommand computes one table and writes it as CSV or JSON, optionally
with an SVG plot. Exit status: 0 on success, 2 for bad input, 3 when a
numerical solver fails to converge.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .amplifiers import chain_comparison
from .capacities import (CapacityKind, PoissonSolverOptions, capacity_table, g_entropy,
                         lossy_upper_bound)
from .errors import ConfigurationError, ConvergenceError, SqueezeCommError, ValidationError
from .monitor import MonitoringPlan, run_monitoring, run_monitoring_trials, sql_bound
from .ratedistortion import (FmSimConfig, GaussianMeanSquare, MeasurementLimitQuery, StateKind,
                             UniformPhase, fm_threshold_sim, measurement_limit)
from .states import (GaussianModeState, Pom, PhotonDistribution, apply_loss, holevo_chi,
                     number_state_ensemble, optimize_snr, pom_mutual_information, random_ensemble,
                     random_pom)
from .table import Column, ResultTable, emit_plot

# options that never change the numbers, so they stay out of the metadata line
_PLUMBING = {"command", "output", "plot", "config", "workers", "format", "handler"}


def _floats(text: str) -> list[float]:
    try:
        vals = [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _ints(text: str) -> list[int]:
    vals = _floats(text)
    if any(int(v) != v for v in vals):
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}")
    return [int(v) for v in vals]


def _grid(lo, hi, points, spacing):
    if points < 1 or lo < 0 or hi < lo:
        raise ValidationError("need 0 <= smin <= smax and points >= 1")
    if points == 1:
        return np.array([lo])
    if spacing == "log":
        if lo <= 0:
            raise ValidationError("log spacing needs smin > 0")
        return np.geomspace(lo, hi, points)
    return np.linspace(lo, hi, points)


# -- subcommands ---------------------------------------------------------------

def cmd_capacity(a):
    if a.kinds.strip().lower() == "all":
        kinds = list(CapacityKind)
    else:
        kinds = [CapacityKind.parse(k) for k in a.kinds.split(",")]
    S = _grid(a.smin, a.smax, a.points, a.spacing)
    opts = PoissonSolverOptions(grid_points=a.grid_points, n_max=a.n_max, tol=a.tol,
                                max_iters=a.max_iters, method=a.method)
    curves = capacity_table(kinds, S, a.W, a.eta, opts, workers=a.workers)
    tags = {
        CapacityKind.NumberState: "W*g(S), photon-number entropy",
        CapacityKind.TcsHomodyne: "W*log2(1+2S)",
        CapacityKind.CoherentHeterodyne: "W*log2(1+S)",
        CapacityKind.CoherentHomodyne: "(W/2)*log2(1+4S)",
        CapacityKind.CoherentPhotonCounting: "W*C_ph(S), numerical Poisson-channel capacity",
    }
    cols = [Column("S", "photons/mode", "input grid")]
    cols += [Column(f"C_{c.kind.value}", "bits/s", tags[c.kind]) for c in curves]
    return ResultTable.from_arrays(cols, [S] + [c.C for c in curves]), {"logx": a.spacing == "log"}


def cmd_snr(a):
    rows = []
    for S in a.S:
        o = optimize_snr(S, check=True)
        rows.append([S, o.nu_opt, o.snr_opt, o.snr_coherent])
    cols = [Column("S", "photons", "input"),
            Column("nu_opt", "1", "S/sqrt(2S+1)"),
            Column("snr_tcs", "1", "4S(S+1)"),
            Column("snr_coherent", "1", "4S")]
    return ResultTable(cols, rows), {}


def cmd_loss(a):
    etas = np.linspace(0.0, 1.0, a.points)
    tcs = GaussianModeState(0.0, 0.0, a.var_x, 1.0 / a.var_x)
    fock = PhotonDistribution.fock(a.fock)
    rows = []
    for eta in etas:
        g = apply_loss(tcs, eta)
        f = apply_loss(fock, eta)
        rows.append([eta, g.vxx, f.mean, f.variance, lossy_upper_bound(a.S, eta, a.W)])
    cols = [Column("eta", "1", "transmittance grid"),
            Column("var_x", "coherent=1", "eta*V + (1-eta)"),
            Column("fock_mean", "photons", "eta*<N>"),
            Column("fock_var", "photons^2", "eta^2 Var N + eta(1-eta)<N>"),
            Column("C_bound", "bits/s", "W*g(eta*S)")]
    return ResultTable(cols, rows), {}


def cmd_holevo(a):
    if a.ensemble == "number":
        rows = []
        for S in a.S:
            e = number_state_ensemble(S)
            rows.append([S, holevo_chi(e), pom_mutual_information(e, Pom.photon_counting(e.dim)),
                         g_entropy(S)])
        cols = [Column("S", "photons", "input"),
                Column("chi", "bits", "S(rho_bar) - sum p S(rho)"),
                Column("I_counting", "bits", "photon-counting mutual information"),
                Column("g", "bits", "(S+1)log2(S+1) - S log2 S")]
        return ResultTable(cols, rows), {}
    rng = np.random.default_rng(a.seed)
    rows = []
    for k in range(a.trials):
        e = random_ensemble(a.dim, a.states, rng)
        m = random_pom(a.dim, a.outcomes, rng)
        rows.append([k, holevo_chi(e), pom_mutual_information(e, m)])
    cols = [Column("trial", "1", "index"),
            Column("chi", "bits", "S(rho_bar) - sum p S(rho)"),
            Column("I_pom", "bits", "mutual information of POM outcomes")]
    return ResultTable(cols, rows), {}


def cmd_ampchain(a):
    t = chain_comparison(a.S, a.G, a.nmax)
    cols = [Column("n", "stages", "chain length"),
            Column("PIA", "1/photon", "-1/(4n), Gaussian approximation"),
            Column("PNA", "1/photon", "-(1-f_n(G)) from the f_n recurrence"),
            Column("POA", "1/photon", "ln(1-(1-exp(-S))^n)/S")]
    return ResultTable.from_arrays(cols, [t.n, t.pia, t.pna, t.poa]), {}


def cmd_rdlimit(a):
    source = GaussianMeanSquare(a.sigma) if a.source == "gaussian" else UniformPhase(a.lam)
    unit = "sigma-units" if a.source == "gaussian" else "rad"
    rows = []
    for S in a.S:
        for m in a.m:
            rows.append([S, m] + [measurement_limit(MeasurementLimitQuery(source, k, S, m))
                                  for k in StateKind])
    cols = [Column("S", "photons", "input"), Column("m", "modes", "input"),
            Column("rms_optimal", unit, "scale*exp(-m g_nats(S/m))"),
            Column("rms_tcs", unit, "scale*exp(-m ln(1+2S/m))"),
            Column("rms_cs", unit, "scale*exp(-m ln(1+S/m))")]
    meta = {"phase_bound": "shannon_upper"} if a.source == "phase" else {}
    return ResultTable(cols, rows), {"meta": meta}


def cmd_fmsim(a):
    rows = []
    for m in a.m:
        r = fm_threshold_sim(FmSimConfig(a.S, m, a.trials, a.seed, a.noise_var), workers=a.workers)
        rows.append([m, r.rms, r.anomaly_rate])
    cols = [Column("m", "bins", "input"),
            Column("rms", "rad", "Monte Carlo rms phase error"),
            Column("anomaly_rate", "1", "fraction of wrong-bin decisions")]
    return ResultTable(cols, rows), {"logx": True, "logy": True}


def cmd_monitor(a):
    plan = MonitoringPlan.load(a.plan)
    seed = plan.seed if a.seed is None else a.seed
    a.seed = seed
    c = plan.constants
    if a.trials == 1:
        r = run_monitoring(plan, seed)
        cols = [Column("time", "s", "cumulative interval sum"),
                Column("alpha1", "1", "position reading"),
                Column("alpha2", "1", "momentum reading"),
                Column("predicted", "1", "alpha1' + alpha2' omega t"),
                Column("residual", "1", "alpha1'' - predicted"),
                Column("residual_position", "position", "residual*sqrt(2 hbar/(m omega))"),
                Column("force_estimate", "force", "-2 m r / t^2"),
                Column("n1", "1", "residual minus force signal"),
                Column("n2", "1", "alpha2'' - alpha2'"),
                Column("n1_std", "1", "closed-form reading std")]
        arrays = [r.time, r.reading[:, 0], r.reading[:, 1], r.predicted, r.residual,
                  r.residual_position, r.force_estimate, r.n1, r.n2, r.residual_std]
        return ResultTable.from_arrays(cols, arrays), {}
    from dataclasses import replace

    recs = run_monitoring_trials(replace(plan, seed=seed), a.trials, workers=a.workers)
    n1 = np.array([r.n1 for r in recs])
    rpos = np.array([r.residual_position for r in recs])
    sql = np.sqrt([sql_bound(t, c) for t in plan.intervals])
    cols = [Column("time", "s", "cumulative interval sum"),
            Column("n1_mean", "1", "sample mean"),
            Column("n1_rms", "1", "sample rms"),
            Column("n1_std_predicted", "1", "closed-form reading std"),
            Column("residual_position_rms", "position", "sample rms"),
            Column("sqrt_sql", "position", "sqrt(hbar t/m)")]
    arrays = [recs[0].time, n1.mean(0), np.sqrt((n1 ** 2).mean(0)), recs[0].residual_std,
              np.sqrt((rpos ** 2).mean(0)), sql]
    return ResultTable.from_arrays(cols, arrays), {}


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--output", "-o", default=None, help="output file (default stdout)")
    common.add_argument("--plot", default=None, metavar="SVG", help="also write an SVG line plot")
    common.add_argument("--config", default=None, help="flat key=value file; flags override it")
    common.add_argument("--workers", type=int, default=1, help="parallel workers (output unchanged)")

    p = argparse.ArgumentParser(prog="squeezecomm", description="Quantum communication limits toolkit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("capacity", parents=[common], help="capacity curves vs photons per mode")
    s.add_argument("--kinds", default="all", help="comma list of kinds or 'all'")
    s.add_argument("--smin", type=float, default=0.1)
    s.add_argument("--smax", type=float, default=10.0)
    s.add_argument("--points", type=int, default=50)
    s.add_argument("--spacing", choices=["log", "linear"], default="log")
    s.add_argument("--W", type=float, default=1.0, help="bandwidth, modes per second")
    s.add_argument("--eta", type=float, default=1.0, help="transmittance")
    s.add_argument("--grid-points", type=int, default=201)
    s.add_argument("--n-max", type=int, default=None)
    s.add_argument("--tol", type=float, default=1e-6)
    s.add_argument("--max-iters", type=int, default=5000)
    s.add_argument("--method", choices=["newton", "blahut-arimoto"], default="newton")
    s.set_defaults(handler=cmd_capacity)

    s = sub.add_parser("snr", parents=[common], help="optimal TCS homodyne SNR")
    s.add_argument("--S", type=_floats, default=_floats("0.5,1,2,10"))
    s.set_defaults(handler=cmd_snr)

    s = sub.add_parser("loss", parents=[common], help="loss channel on TCS and Fock inputs")
    s.add_argument("--var-x", type=float, default=0.1, help="squeezed quadrature variance")
    s.add_argument("--fock", type=int, default=10)
    s.add_argument("--S", type=float, default=3.0, help="photons per mode for the capacity bound")
    s.add_argument("--W", type=float, default=1.0)
    s.add_argument("--points", type=int, default=11)
    s.set_defaults(handler=cmd_loss)

    s = sub.add_parser("holevo", parents=[common], help="entropy bound on truncated ensembles")
    s.add_argument("--ensemble", choices=["number", "random"], default="number")
    s.add_argument("--S", type=_floats, default=_floats("0.5,1,2"))
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--dim", type=int, default=4)
    s.add_argument("--states", type=int, default=3)
    s.add_argument("--outcomes", type=int, default=4)
    s.set_defaults(handler=cmd_holevo)

    s = sub.add_parser("ampchain", parents=[common], help="amplifier-chain error exponents")
    s.add_argument("--S", type=float, default=10.0)
    s.add_argument("--G", type=float, default=2.0)
    s.add_argument("--nmax", type=int, default=100)
    s.set_defaults(handler=cmd_ampchain)

    s = sub.add_parser("rdlimit", parents=[common], help="rate-distortion measurement limits")
    s.add_argument("--source", choices=["gaussian", "phase"], default="gaussian")
    s.add_argument("--sigma", type=float, default=1.0)
    s.add_argument("--lam", type=float, default=1.35)
    s.add_argument("--S", type=_floats, default=_floats("0.5,1,2,5,10"))
    s.add_argument("--m", type=_ints, default=_ints("1"))
    s.set_defaults(handler=cmd_rdlimit)

    s = sub.add_parser("fmsim", parents=[common], help="multimode FM threshold Monte Carlo")
    s.add_argument("--S", type=float, default=100.0)
    s.add_argument("--m", type=_ints, default=_ints("8,16,32,64"))
    s.add_argument("--trials", type=int, default=10_000)
    s.add_argument("--noise-var", type=float, default=1.0)
    s.set_defaults(handler=cmd_fmsim)

    s = sub.add_parser("monitor", parents=[common], help="free-mass monitoring simulation")
    s.add_argument("--plan", required=True, help="JSON monitoring plan")
    s.add_argument("--trials", type=int, default=1)
    s.set_defaults(handler=cmd_monitor)
    return p


def _subparser(parser, name):
    for action in parser._subparsers._group_actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def read_config(path) -> dict:
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    for n, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{n}: expected key=value")
        key, val = (x.strip() for x in line.split("=", 1))
        values[key.replace("-", "_")] = val
    return values


def _apply_config(parser, argv, args):
    sp = _subparser(parser, args.command)
    valid = sorted(a.dest for a in sp._actions
                   if a.dest not in ("help", "config", "handler") and a.dest != argparse.SUPPRESS)
    values = read_config(args.config)
    unknown = sorted(set(values) - set(valid))
    if unknown:
        raise ConfigurationError(f"unknown config keys {unknown}; valid keys: {valid}")
    sp.set_defaults(**values)
    return parser.parse_args(argv)


def run(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.config:
            try:
                args = _apply_config(parser, argv, args)
            except SystemExit as exc:
                return int(exc.code or 0)
        if args.workers < 1:
            raise ValidationError("--workers must be >= 1")
        if args.command != "monitor" and args.seed is None:
            args.seed = 0
        table, opts = args.handler(args)
        meta = {"command": args.command, "seed": args.seed}
        for k, v in sorted(vars(args).items()):
            if k in _PLUMBING or k == "seed":
                continue
            meta[k] = ",".join(format(x, "g") if isinstance(x, float) else str(x) for x in v) \
                if isinstance(v, list) else v
        meta.update(opts.get("meta", {}))
        table.metadata = meta
        table.write(args.output, args.format)
        if args.plot:
            emit_plot(table, args.plot, logx=opts.get("logx", False), logy=opts.get("logy", False),
                      title=args.command)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (SqueezeCommError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())

"""Command-line interface: ``rattleback <subcommand> [flags]``.

Exit codes: 0 success, 1 failed verification, 2 usage error, 3 integration
failure, 4 insufficient data for analysis.
"""

import argparse
import csv
import json
import sys

import numpy as np

from . import integrate as integ
from ._validation import DomainError, InsufficientDataError, IntegrationError, ParameterError
from .analysis import (
    casimir_wandering, conservation_drift, extended_energy_drift, leaf_mesh,
    potential_profile, reversal_stats, sphere_mesh,
)
from .integrate import IntegratorConfig, Trajectory
from .model import DEFAULT_EPSILON, DEFAULT_LAMBDA, linearized_spectrum
from .transforms import x_to_y, x_to_z, y_angle_in_branch
from .verification import DEFAULT_POINTS, DEFAULT_TOL, report, run_verification

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_INTEGRATION, EXIT_DATA = 0, 1, 2, 3, 4

NAMES = {
    "prs": ["P", "R", "S"],
    "dual": ["P", "R", "S"],
    "darboux": ["Z1", "Z2", "Z3"],
    "y": ["Y1", "Y2", "Y3"],
    "extended": ["Z1", "Z2", "Z3", "Z4"],
}
FMT = "{:.16e}"


class UsageError(Exception):
    pass


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _pair(text):
    vals = _floats(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    return tuple(vals)


def _dump(obj):
    return json.dumps(obj, indent=2)


class _Output:
    """CSV destination plus the stream for the JSON report.

    When the CSV goes to standard output the report moves to standard
    error so the table stays parseable.
    """

    def __init__(self, out):
        self.out = out

    def __enter__(self):
        if self.out == "-":
            self.fh, self.report = sys.stdout, sys.stderr
        else:
            self.fh, self.report = open(self.out, "w", newline=""), sys.stdout
        return self

    def __exit__(self, *exc):
        if self.fh is not sys.stdout:
            self.fh.close()

    def emit(self, obj):
        print(_dump(obj), file=self.report)


# ---------------------------------------------------------------------------
# simulate


def _initial_state(args):
    x0 = np.array(args.ic, dtype=float)
    if x0.shape != (3,):
        raise UsageError(f"--ic needs 3 values (P,R,S), got {len(args.ic)}")
    if args.model in ("prs", "dual"):
        if args.model == "dual" and x0[1] <= 0:
            raise UsageError("--model dual requires R > 0")
        return x0
    if args.model == "darboux":
        return x_to_z(x0, args.lam)
    if args.model == "y":
        if not y_angle_in_branch(x0, args.lam):
            raise UsageError(
                "--model y needs P > 0, R > 0 and |R**(1-lambda) arctan(S/P)| < pi/2"
            )
        return x_to_y(x0, args.lam)
    return np.append(x_to_z(x0, args.lam), args.z4)


def _field(args):
    lam = args.lam
    return {
        "prs": lambda: integ.prs(lam),
        "dual": lambda: integ.dual(lam),
        "darboux": lambda: integ.darboux(lam),
        "y": lambda: integ.so3(lam),
        "extended": lambda: integ.extended(lam, args.epsilon),
    }[args.model]()


def _simulate_report(traj, args):
    if args.model == "extended":
        d = {"max_rel_drift_E": extended_energy_drift(traj, args.epsilon, args.lam)}
        d.update(casimir_wandering(traj).to_dict())
        return d
    coords = {"prs": "x", "dual": "x", "darboux": "z", "y": "y"}[args.model]
    return conservation_drift(traj, args.lam, coords=coords).to_dict()


def cmd_simulate(args):
    if args.t_end <= 0:
        raise UsageError("--t-end must be positive")
    if args.rtol <= 0 or args.atol <= 0:
        raise UsageError("--rtol and --atol must be positive")
    y0 = _initial_state(args)
    names = NAMES[args.model]
    try:
        if args.method == "leapfrog":
            if args.model != "darboux":
                raise UsageError("--method leapfrog is only available for --model darboux")
            if args.dt <= 0:
                raise UsageError("--dt must be positive")
            n = int(round(args.t_end / args.dt))
            traj = integ.integrate_leapfrog_z(y0, args.lam, args.dt, n)
        else:
            cfg = IntegratorConfig(rel_tol=args.rtol, abs_tol=args.atol, dense=False)
            traj = integ.integrate_adaptive(_field(args), y0, (0.0, args.t_end), cfg, names)
    except IntegrationError as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    with _Output(args.out) as out:
        traj.to_csv(out.fh)
        out.emit(_simulate_report(traj, args))
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args):
    if args.points < 1:
        raise UsageError("--points must be at least 1; nothing verified is not a pass")
    if args.tol <= 0:
        raise UsageError("--tol must be positive")
    ok, records = run_verification(args.seed, args.points, args.tol, args.lam)
    text = _dump(report(records, args.seed, ok))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return EXIT_OK if ok else EXIT_VERIFY


# ---------------------------------------------------------------------------
# figure data


def cmd_leaves(args):
    res = (args.resolution, args.resolution)
    with _Output(args.out) as out:
        w = csv.writer(out.fh, lineterminator="\n")
        w.writerow(["surface", "level", "P", "R", "S"])
        counts = {}
        for C in args.C:
            pts = leaf_mesh(C, args.lam, args.r_range, args.s_range, res)
            counts[f"C={C:g}"] = len(pts)
            for row in pts:
                w.writerow(["leaf", FMT.format(C), *(FMT.format(v) for v in row)])
        for H in args.H:
            pts = sphere_mesh(H, res)
            counts[f"H={H:g}"] = len(pts)
            for row in pts:
                w.writerow(["sphere", FMT.format(H), *(FMT.format(v) for v in row)])
        out.emit({"lambda": args.lam, "points": counts})
    return EXIT_OK


def cmd_potential(args):
    prof = potential_profile(args.C, args.z1_range, args.resolution, args.lam)
    with _Output(args.out) as out:
        w = csv.writer(out.fh, lineterminator="\n")
        w.writerow(["Z1", *(f"U_C={C:g}" for C in prof.C_values)])
        for z, row in zip(prof.z1, prof.U):
            w.writerow([FMT.format(z), *(FMT.format(v) for v in row)])
        minima = []
        for C, m, zs in zip(prof.C_values, prof.minima, prof.sampled_minima()):
            entry = {"C": C, "sampled_Z1_min": zs}
            if m is not None:
                entry.update({"Z1_star": m[0], "U_star": m[1]})
            minima.append(entry)
        out.emit({"lambda": args.lam, "minima": minima})
    return EXIT_OK


def cmd_analyze(args):
    try:
        traj = Trajectory.from_csv(args.input)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read trajectory {args.input}: {exc}")
    if args.component not in traj.names:
        raise UsageError(f"column {args.component!r} not in {traj.names}")
    idx = traj.names.index(args.component)
    try:
        stats = reversal_stats(traj, idx, hysteresis=args.hysteresis,
                               transition_fraction=args.transition_fraction)
    except InsufficientDataError as exc:
        print(f"analysis failed: {exc}", file=sys.stderr)
        return EXIT_DATA
    print(_dump(stats.to_dict()))
    return EXIT_OK


def cmd_linearize(args):
    ev = [float(v) for v in linearized_spectrum(args.spin, args.lam)]
    print(_dump({"lambda": args.lam, "spin": args.spin, "eigenvalues": ev}))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_lambda(p):
    p.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA,
                   help="aspect-ratio parameter lambda (default: %(default)s)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rattleback", description="Rattleback PRS simulations and Lie-Poisson checks.",
    )
    parser.add_argument("--config", help="JSON file of flag values; explicit flags win")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate a trajectory and write it as CSV")
    p.add_argument("--model", choices=sorted(NAMES), default="prs")
    _add_lambda(p)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON,
                   help="coupling of the extended model (default: %(default)s)")
    p.add_argument("--ic", type=_floats, default=[0.01, 0.01, 0.5],
                   help="initial (P,R,S), mapped into the model's coordinates")
    p.add_argument("--z4", type=float, default=0.0, help="initial Z4 for --model extended")
    p.add_argument("--t-end", type=float, default=100.0)
    p.add_argument("--rtol", type=float, default=IntegratorConfig.rel_tol)
    p.add_argument("--atol", type=float, default=IntegratorConfig.abs_tol)
    p.add_argument("--method", choices=["adaptive_rk", "leapfrog"], default="adaptive_rk")
    p.add_argument("--dt", type=float, default=1e-3, help="leapfrog step")
    p.add_argument("--out", default="-", help="CSV path, '-' for standard output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="run the Poisson-structure verification suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--points", type=int, default=DEFAULT_POINTS)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    _add_lambda(p)
    p.add_argument("--out", help="also write the JSON report to this path")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("leaves", help="mesh Casimir leaves and energy spheres")
    _add_lambda(p)
    p.add_argument("--C", type=_floats, default=[-1.0, -0.01, 0.01, 1.0])
    p.add_argument("--H", type=_floats, default=[1.0], help="energy-sphere levels")
    p.add_argument("--r-range", type=_pair, default=(0.05, 2.0))
    p.add_argument("--s-range", type=_pair, default=(-1.5, 1.5))
    p.add_argument("--resolution", type=int, default=40)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_leaves)

    p = sub.add_parser("potential", help="tabulate the effective potential U(Z1; C)")
    _add_lambda(p)
    p.add_argument("--C", type=_floats, default=[1.0, 0.1, 0.01, 0.001])
    p.add_argument("--z1-range", type=_pair, default=(-2.0, 2.5))
    p.add_argument("--resolution", type=int, default=401)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_potential)

    p = sub.add_parser("analyze", help="spin-reversal statistics of a trajectory CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--component", default="S")
    p.add_argument("--hysteresis", type=float, default=1e-6)
    p.add_argument("--transition-fraction", type=float, default=0.5)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("linearize", help="eigenvalues at the spinning equilibrium (0, 0, S)")
    _add_lambda(p)
    p.add_argument("--spin", type=float, default=0.5)
    p.set_defaults(func=cmd_linearize)
    return parser


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        with open(known.config) as fh:
            cfg = json.load(fh)
    except (OSError, ValueError) as exc:
        parser.error(f"cannot read config {known.config}: {exc}")
    if not isinstance(cfg, dict):
        parser.error("config must be a JSON object")
    sub = parser._subparsers._group_actions[0].choices
    dests = {a.dest for p in sub.values() for a in p._actions}
    defaults = {}
    for key, value in cfg.items():
        dest = "lam" if key in ("lambda", "lam") else key.replace("-", "_")
        if dest not in dests:
            parser.error(f"unknown config key {key!r}")
        defaults[dest] = value
    for p in sub.values():
        own = {a.dest for a in p._actions}
        p.set_defaults(**{k: v for k, v in defaults.items() if k in own})


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    _apply_config(parser, argv)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ParameterError, DomainError) as exc:
        print(f"rattleback {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

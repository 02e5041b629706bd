"""Command-line entry point.

All rates are in units of Gamma and all times in units of 1/Gamma.

Exit codes: 0 success, 1 bad input or runtime error, 2 a verification
check failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import dynamics, mems, qmat, trajectory, verify
from .errors import CpbError
from .quantifiers import cpb_triplet

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VERIFY = 2

INV_SQRT2 = 1.0 / math.sqrt(2.0)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive(kind):
    def parse(text):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{text!r} is not a valid {kind.__name__}") from None
        if not value > 0:
            raise argparse.ArgumentTypeError(f"{text!r} must be positive")
        return value

    return parse


def _seed_default() -> int:
    raw = os.environ.get("CPB_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"CPB_SEED={raw!r} is not an integer") from None


def mems_sweep(gamma_min: float, gamma_max: float, steps: int, out=None) -> list[dict]:
    """Uniform gamma sweep of the MEMS closed forms, written as CSV.

    When 1/sqrt(2) lies strictly inside the range and there are interior
    grid points, the grid point nearest to it is moved onto it exactly so
    the B = 2 crossing appears in the table.
    """
    if not 0.0 <= gamma_min < gamma_max <= 1.0:
        raise ValueError(f"need 0 <= gamma_min < gamma_max <= 1, got [{gamma_min}, {gamma_max}]")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    grid = np.linspace(gamma_min, gamma_max, steps + 1)
    if steps >= 2 and gamma_min < INV_SQRT2 < gamma_max:
        k = int(np.argmin(np.abs(grid - INV_SQRT2)))
        if 0 < k < steps:
            grid[k] = INV_SQRT2
    rows = []
    for g in grid:
        pt = mems.mems_cpb(float(g))
        rows.append({"gamma": float(g), "C": pt.C, "P": pt.P, "B": pt.B, "R": pt.R, "region": int(pt.region)})
    if out is not None:
        _write_mems_csv(rows, out)
    return rows


def _write_mems_csv(rows, out):
    cols = ("gamma", "C", "P", "B", "R", "region")
    fh = sys.stdout if out == "-" else open(out, "w", newline="")
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        for row in rows:
            writer.writerow([str(row[c]) if c == "region" else f"{row[c]:.17g}" for c in cols])
    finally:
        if fh is not sys.stdout:
            fh.close()


def _cmd_simulate(args) -> int:
    if args.perfect:
        if args.omega is None:
            raise UsageError("simulate --perfect needs --omega")
        params = dynamics.PerfectCavityParams(omega=args.omega, n_max=args.nmax, dt=args.dt)
        scenario = "psi_perfect" if args.initial == "psi" else "custom"
    else:
        if args.lam is None:
            raise UsageError("simulate needs --lambda (or --perfect --omega)")
        params = dynamics.SimParams(lam=args.lam, gamma=args.gamma, n_max=args.nmax, dt=args.dt, t_max=args.tmax)
        scenario = {"psi": "psi_lossy", "plus": "plus_lossy"}.get(args.initial, "custom")
    rho0 = None
    if args.rho0 is not None:
        rho0 = qmat.load_density_matrix(args.rho0)
        scenario = "custom"
    elif scenario == "custom":
        rho0 = dynamics.initial_density(args.initial)
    grid = trajectory.default_grid(args.tmax, args.samples)
    records = trajectory.sample_trajectory(scenario, params, grid, rho0=rho0)
    path = trajectory.export(records, args.out)
    branches = trajectory.detect_branches(records)
    summary = {
        "scenario": scenario,
        "out": str(path),
        "records": len(records),
        "branches": len(branches),
        "max_trace_err": max(r.trace_err for r in records),
    }
    print(json.dumps(summary))
    return EXIT_OK


def _cmd_quantify(args) -> int:
    rho = qmat.load_density_matrix(args.inp)
    trip = cpb_triplet(rho, tol=args.tol)
    print(json.dumps(trip.to_dict()))
    return EXIT_OK


def _cmd_mems(args) -> int:
    mems_sweep(args.gamma_min, args.gamma_max, args.steps, args.out)
    return EXIT_OK


def _cmd_branches(args) -> int:
    rows = trajectory.load_records(args.inp)
    branches = trajectory.detect_branches(rows, threshold=args.threshold)
    result = {"branches": [b.to_dict() for b in branches]}
    if args.inversions:
        result["inversions"] = trajectory.detect_ordering_inversions(rows)
    print(json.dumps(result, indent=1))
    return EXIT_OK


def _cmd_verify(args) -> int:
    checks = verify.run_suites(args.suite, args.seed, workers=args.workers)
    print(f"seed {args.seed}")
    width = max(len(f"{c.suite}: {c.name}") for c in checks)
    for c in checks:
        label = f"{c.suite}: {c.name}"
        print(f"{'PASS' if c.passed else 'FAIL'}  {label:<{width}}  {c.detail}")
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="cpbspace",
        description="Concurrence, purity and Bell-function trajectories of two qubits in a common cavity.",
        epilog="Rates are in units of Gamma, times in units of 1/Gamma.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="evolve a two-qubit state and export its C-P-B trajectory")
    sim.add_argument("--initial", default="psi", choices=sorted(dynamics.INITIAL_STATES))
    sim.add_argument("--rho0", type=Path, help="initial 4x4 state as density-matrix JSON")
    sim.add_argument("--lambda", dest="lam", type=_positive(float), help="Lorentzian half-width")
    sim.add_argument("--gamma", type=_positive(float), default=1.0)
    sim.add_argument("--perfect", action="store_true", help="lossless single-mode cavity")
    sim.add_argument("--omega", type=_positive(float), help="qubit-mode coupling for --perfect")
    sim.add_argument("--tmax", type=_positive(float), default=trajectory.DEFAULT_T_MAX)
    sim.add_argument("--samples", type=_positive(int), default=trajectory.DEFAULT_SAMPLES)
    sim.add_argument("--nmax", type=_positive(int), default=2)
    sim.add_argument("--dt", type=_positive(float))
    sim.add_argument("--out", required=True, help=".csv or .json")
    sim.set_defaults(func=_cmd_simulate)

    qt = sub.add_parser("quantify", help="C, P, B and remainder for a density-matrix JSON file")
    qt.add_argument("--in", dest="inp", type=Path, required=True)
    qt.add_argument("--tol", type=_positive(float), default=1e-10, help="X-structure tolerance")
    qt.set_defaults(func=_cmd_quantify)

    ms = sub.add_parser("mems", help="sweep the MEMS family")
    ms.add_argument("--gamma-min", type=float, default=0.0)
    ms.add_argument("--gamma-max", type=float, default=1.0)
    ms.add_argument("--steps", type=int, default=200)
    ms.add_argument("--out", default="-")
    ms.set_defaults(func=_cmd_mems)

    br = sub.add_parser("branches", help="B > threshold branches of an exported trajectory")
    br.add_argument("--in", dest="inp", type=Path, required=True)
    br.add_argument("--threshold", type=float, default=2.0)
    br.add_argument("--inversions", action="store_true", help="also list entanglement-ordering inversions")
    br.set_defaults(func=_cmd_branches)

    vf = sub.add_parser("verify", help="run the self-check suites")
    vf.add_argument("--suite", nargs="+", default=["all"], choices=["all", *verify.SUITES])
    vf.add_argument("--seed", type=int, default=None)
    vf.add_argument("--workers", type=_positive(int), default=1)
    vf.set_defaults(func=_cmd_verify)
    return parser


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "seed", 0) is None:
            args.seed = _seed_default()
        if args.command == "verify" and "all" in args.suite:
            args.suite = "all"
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return EXIT_INPUT
    except (CpbError, ValueError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

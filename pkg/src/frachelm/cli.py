"""Command-line entry point.

Every subcommand except ``params`` writes a CSV and a JSON manifest next to
it (same stem, ``.json`` suffix). Exit codes: 0 success, 2 usage error,
3 solver non-convergence, 4 invariant or slope violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .analytic import TimeFractionalParams, classical_field, classical_sounding, time_fractional_sounding
from .errors import InvariantViolation, SolverError
from .mesh_fem import build_mesh
from .mt import EarthModel, SoundingPoint, decay_profile, default_frequencies, nondimensionalize, sign_changes, sounding_sweep
from .quadrature import default_spacing, sinc_params
from .verification import mms_convergence, quadrature_sweep

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SOLVER = 3
EXIT_INVARIANT = 4
SLOPE_RANGE = (1.7, 2.3)

SOUNDING_COLUMNS = ["freq_hz", "kappa_sq", "rho_a_ohm_m", "theta_deg", "re_u0", "im_u0", "re_du0", "im_du0", "status"]
DECAY_COLUMNS = ["zeta", "z_m", "re_u", "im_u"]
MMS_COLUMNS = ["n_nodes", "h", "rms", "total_dim", "iterations", "status"]
QUADSWEEP_COLUMNS = ["m", "rms"]


class UsageError(Exception):
    pass


def _nodes_for_h(h: float) -> int:
    n = int(round(1.0 / h)) + 1
    if n < 3 or not math.isclose((n - 1) * h, 1.0, rel_tol=1e-9):
        raise UsageError(f"h={h} does not divide the unit interval")
    return n


def _quad_summary(s: float, n_nodes: int, m_override: Optional[float] = None) -> dict:
    if s == 1.0:
        return {"s": s, "n_nodes": n_nodes, "total_dim": n_nodes}
    h = build_mesh(n_nodes).h
    q = sinc_params(s, h, m_override)
    return {
        "s": s, "h": h, "n_nodes": n_nodes, "m": q.m, "n_minus": q.n_minus,
        "n_plus": q.n_plus, "n_points": q.n_points, "total_dim": q.total_dim(n_nodes),
    }


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def _write_manifest(csv_path: Path, args: argparse.Namespace, derived: dict, solver, results: dict, exit_code: int) -> Path:
    params = {k: v for k, v in vars(args).items() if k not in ("func",)}
    manifest = {
        "artifact": "frachelm",
        "version": __version__,
        "subcommand": args.command,
        "parameters": params,
        "derived": derived,
        "solver": solver,
        "results": results,
        "csv": csv_path.name,
        "exit_code": exit_code,
    }
    path = csv_path.with_suffix(".json")
    path.write_text(json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n")
    return path


# -- subcommands ---------------------------------------------------------------

def cmd_params(args) -> int:
    if not 0.0 < args.h < 1.0:
        raise UsageError(f"h must lie in (0, 1), got {args.h}")
    n = args.n_nodes if args.n_nodes is not None else _nodes_for_h(args.h)
    q = sinc_params(args.s, args.h, args.m)
    print(f"m = {q.m!r}")
    print(f"N- = {q.n_minus}")
    print(f"N+ = {q.n_plus}")
    print(f"P = {q.n_points}")
    print(f"N = {n}")
    print(f"total_dim = {q.total_dim(n)}")
    return EXIT_OK


def cmd_mms(args) -> int:
    rows, slope = mms_convergence(args.s, args.k_sq, args.nodes, tol=args.tol)
    _write_csv(args.out, MMS_COLUMNS,
               [(r.n_nodes, r.h, r.rms_error, r.total_dim, r.iterations, r.status) for r in rows])
    failed = [r for r in rows if not math.isfinite(r.rms_error)]
    slope_ok = SLOPE_RANGE[0] <= slope <= SLOPE_RANGE[1]
    code = EXIT_SOLVER if failed else (EXIT_OK if slope_ok else EXIT_INVARIANT)
    results = {
        "slope": slope, "slope_range": list(SLOPE_RANGE), "slope_ok": slope_ok,
        "achieved_relative_residuals": [r.relative_residual for r in rows],
    }
    derived = [_quad_summary(args.s, n) for n in args.nodes]
    _write_manifest(args.out, args, derived, [{"n_nodes": r.n_nodes, "status": r.status, "iterations": r.iterations} for r in rows], results, code)
    print(f"slope = {slope:.4f} ({'ok' if slope_ok else 'outside ' + str(SLOPE_RANGE)})")
    return code


def _sounding_row(p: SoundingPoint) -> list:
    return [p.frequency, p.kappa_sq, p.rho_a, p.theta_deg, p.surface_field.real, p.surface_field.imag,
            p.surface_gradient.real, p.surface_gradient.imag, p.status]


def cmd_sounding(args) -> int:
    freqs = default_frequencies(args.fmin, args.fmax, args.per_decade)
    header = list(SOUNDING_COLUMNS)
    solver = []
    if args.beta is not None:
        params = TimeFractionalParams(args.beta, args.sigma, args.zstar)
        points = [time_fractional_sounding(params, float(f)) for f in freqs]
        rows = [_sounding_row(p) for p in points]
        derived = {"beta": args.beta}
    else:
        model = EarthModel(args.sigma, args.zstar, args.s, args.n_nodes, args.tol, args.preconditioner)
        points = sounding_sweep(model, freqs)
        rows = [_sounding_row(p) for p in points]
        solver = [dict(frequency=p.frequency, **p.report.summary()) if p.report else {"frequency": p.frequency, "status": p.status}
                  for p in points]
        derived = _quad_summary(args.s, args.n_nodes)
        if args.s == 1.0:
            header += ["rho_a_analytic_ohm_m", "theta_analytic_deg"]
            for row, f in zip(rows, freqs):
                a = classical_sounding(model, float(f))
                row += [a.rho_a, a.theta_deg]
    _write_csv(args.out, header, rows)
    failed = [p.frequency for p in points if p.status not in ("ok", "analytic")]
    code = EXIT_SOLVER if failed else EXIT_OK
    results = {
        "n_points": len(points), "failed_frequencies": failed,
        "high_frequency_rho_a": points[-1].rho_a, "low_frequency_theta_deg": points[0].theta_deg,
    }
    _write_manifest(args.out, args, derived, solver, results, code)
    return code


def cmd_decay(args) -> int:
    model = EarthModel(args.sigma, args.zstar, args.s, args.n_nodes, args.tol, args.preconditioner)
    _, kappa_sq = nondimensionalize(model, args.frequency)
    bundle = decay_profile(model, args.frequency)
    zeta = bundle.mesh.nodes
    exact = classical_field(kappa_sq, zeta)
    header = DECAY_COLUMNS + ["re_u_analytic", "im_u_analytic"]
    rows = [[z, z * args.zstar, u.real, u.imag, a.real, a.imag] for z, u, a in zip(zeta, bundle.u, exact)]
    _write_csv(args.out, header, rows)
    results = {
        "kappa": math.sqrt(kappa_sq), "kappa_sq": kappa_sq,
        "sign_changes": {str(args.s): sign_changes(bundle.u.real), "analytic_s1": sign_changes(exact.real)},
        "relative_l2_vs_analytic_s1": float(np.linalg.norm(bundle.u - exact) / np.linalg.norm(exact)),
    }
    _write_manifest(args.out, args, _quad_summary(args.s, args.n_nodes), bundle.report.summary(), results, EXIT_OK)
    return EXIT_OK


def cmd_quadsweep(args) -> int:
    h = build_mesh(args.n_nodes).h
    m_star = default_spacing(h)
    m_values = args.m if args.m else [f * m_star for f in args.m_factors]
    pts = quadrature_sweep(args.s, args.n_nodes, m_values, k_sq=args.k_sq, tol=args.tol)
    _write_csv(args.out, QUADSWEEP_COLUMNS, pts)
    code = EXIT_SOLVER if any(not math.isfinite(r) for _, r in pts) else EXIT_OK
    derived = {"m_star": m_star, "h": h, "sweep": [_quad_summary(args.s, args.n_nodes, m) for m in m_values]}
    _write_manifest(args.out, args, derived, None, {"rms": [r for _, r in pts]}, code)
    return code


# -- parser ----------------------------------------------------------------------

def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}")


def _model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--s", type=float, default=1.0, help="fractional exponent, 1 for classical")
    p.add_argument("--sigma", type=float, default=0.01, help="conductivity in S/m")
    p.add_argument("--zstar", type=float, default=1000.0, help="scaling depth in m")
    p.add_argument("--n-nodes", type=int, default=501)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--preconditioner", choices=("block_jacobi", "jacobi"), default="block_jacobi")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="frachelm", description="Fractional Helmholtz solver and MT forward model.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="sinc quadrature constants")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    p.add_argument("--n-nodes", type=int, default=None, help="defaults to 1/h + 1")
    p.add_argument("--m", type=float, default=None, help="override the spacing 1/ln(1/h)")
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("mms", help="manufactured-solution convergence study")
    p.add_argument("--s", type=float, default=0.25)
    p.add_argument("--k-sq", type=_complex, default=1.0)
    p.add_argument("--nodes", type=int, nargs="+", default=[101, 201, 501, 1001])
    p.add_argument("--tol", type=float, default=1e-16, help="attempted; the achieved residual is reported")
    p.add_argument("--out", type=Path, default=Path("mms.csv"))
    p.set_defaults(func=cmd_mms)

    p = sub.add_parser("sounding", help="apparent resistivity and phase spectrum")
    _model_args(p)
    p.add_argument("--beta", type=float, default=None, help="emit the analytic time-fractional spectrum instead")
    p.add_argument("--fmin", type=float, default=1e-2)
    p.add_argument("--fmax", type=float, default=1e4)
    p.add_argument("--per-decade", type=int, default=10)
    p.add_argument("--out", type=Path, default=Path("sounding.csv"))
    p.set_defaults(func=cmd_sounding)

    p = sub.add_parser("decay", help="field versus depth at one frequency")
    _model_args(p)
    p.add_argument("--frequency", type=float, default=1000.0, help="Hz")
    p.add_argument("--out", type=Path, default=Path("decay.csv"))
    p.set_defaults(func=cmd_decay)

    p = sub.add_parser("quadsweep", help="MMS error versus sinc spacing")
    p.add_argument("--s", type=float, default=0.25)
    p.add_argument("--k-sq", type=_complex, default=1.0)
    p.add_argument("--n-nodes", type=int, default=101)
    p.add_argument("--m", type=float, nargs="+", default=None, help="explicit spacings")
    p.add_argument("--m-factors", type=float, nargs="+", default=[0.5, 1.0, 2.0], help="multiples of 1/ln(1/h)")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--out", type=Path, default=Path("quadsweep.csv"))
    p.set_defaults(func=cmd_quadsweep)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ValueError) as err:
        print(f"usage error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as err:
        print(f"solver error: {err}", file=sys.stderr)
        return EXIT_SOLVER
    except InvariantViolation as err:
        print(f"invariant violation: {err}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point ``wwlump``.

Subcommands: ``lump``, ``solve``, ``verify``, ``sweep`` and ``dno-check``.
Exit status is 0 on success, 1 when an invariant check fails, 2 for a
configuration error and 3 when an iteration does not converge.  Reports
already produced are written before a non-zero exit.
"""

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import lump, nonlinear, spectral, suites
from .config import DEFAULTS, parse_config
from .errors import (ConfigurationError, InvariantFailure, IterationError, PreconditionError,
                     WWLumpError)
from .wwl1 import write_field

__all__ = ["main", "build_parser", "EXIT_OK", "EXIT_INVARIANT", "EXIT_CONFIG", "EXIT_ITERATION"]

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_CONFIG = 2
EXIT_ITERATION = 3

log = logging.getLogger("wwlump")

# (flag, config key, type, help)
_OPTIONS = [
    ("--eps", "eps", float, "long-wave parameter"),
    ("--sigma", "sigma", float, "Bond number, must exceed 1/3"),
    ("--lx", "lx", float, "half-length of the box in x"),
    ("--ly", "ly", float, "half-length of the box in y"),
    ("--nx", "nx", int, "grid points in x"),
    ("--ny", "ny", int, "grid points in y"),
    ("--tol-outer", "tol_outer", float, "outer fixed-point tolerance"),
    ("--tol-inner", "tol_inner", float, "inner psi-iteration tolerance"),
    ("--tol-linear", "tol_linear", float, "GMRES tolerance"),
    ("--max-iter", "max_iter", int, "maximum outer iterations"),
    ("--dno", "dno", str, "Dirichlet-Neumann evaluation: exact or series"),
    ("--nz", "nz", int, "Chebyshev points in depth for the exact operator"),
    ("--oracle-tol", "oracle_tol", float, "tolerance of the exact operator iteration"),
    ("--lump-source", "lump_source", str, "lump on the torus: petviashvili, periodic, pointwise"),
    ("--out", "out", str, "output directory"),
    ("--seed", "seed", int, "seed for random probe fields"),
]


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _add_common(p):
    p.add_argument("--config", help="key = value file; flags override its entries")
    for flag, key, kind, text in _OPTIONS:
        p.add_argument(flag, dest=key, type=kind, default=None,
                       help=f"{text} (default: {getattr(DEFAULTS, key)})")
    p.add_argument("--force", action="store_true", default=None,
                   help=f"allow eps above {nonlinear.EPS_MAX}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")


def build_parser():
    parser = _ArgumentParser(
        prog="wwlump", description="Localized gravity-capillary waves seeded by KP-I lumps.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)
    p = sub.add_parser("lump", help="compute the torus lump; writes q.wwl1, q1.wwl1, lump.json")
    _add_common(p)
    p = sub.add_parser("solve", help="run the fixed-point solver; writes fields and report.json")
    _add_common(p)
    p = sub.add_parser("verify", help="run every invariant suite; writes report.json")
    _add_common(p)
    p.add_argument("--symbols-csv", help="also write (m1, m2, sigma_L1, sigma_L2) to this file")
    p.add_argument("--dno-n", type=int, default=128,
                   help="grid points per axis for the DNO suite (default: 128)")
    p = sub.add_parser("sweep", help="solve over several eps; writes sweep.csv and sweep.json")
    _add_common(p)
    p.add_argument("--eps-list", required=True, help="comma-separated eps values")
    p = sub.add_parser("dno-check", help="constant-depth and scaling checks of the DNO operator")
    _add_common(p)
    p.add_argument("--symbols-csv", help="also write (m1, m2, sigma_L1, sigma_L2) to this file")
    return parser


def _config_from_args(args, **extra):
    overrides = {key: getattr(args, key) for _, key, _, _ in _OPTIONS}
    overrides["force"] = args.force
    overrides.update(extra)
    return parse_config(args.config, overrides)


def _clean(obj):
    """Recursively convert numpy scalars and non-finite floats for strict JSON."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n")
    log.info("wrote %s", path)


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            vals = [row[h] for h in header] if isinstance(row, dict) else row
            w.writerow([_fmt(v) for v in vals])
    log.info("wrote %s", path)


def _write_symbols(path, grid):
    write_csv(path, ["m1", "m2", "sigma_L1", "sigma_L2"], suites.symbol_rows(grid))


def cmd_lump(cfg, args):
    grid = cfg.grid()
    out = Path(cfg.out)
    params = lump.LumpParams.from_grid(grid)
    if cfg.lump_source == "petviashvili":
        res = lump.lump_petviashvili(params, grid, tol=1e-13, full_output=True)
        q, info = res.q, {"iterations": res.iterations, "factor": res.factor,
                          "petviashvili_residual": res.residual}
    else:
        q, info = lump.torus_lump(params, grid, source=cfg.lump_source), {}
    q1 = spectral.derivative(q, "x")
    q2 = spectral.derivative(q, "x", 2)
    kp = lump.kpi_residual(q, params)
    closed = lump.lump_eps(params, grid)
    summary = {
        "config": cfg.as_dict(),
        "source": cfg.lump_source,
        "kp_residual_max": kp.max_abs(),
        "kp_residual_interior_max": lump.interior_max(kp),
        "kp_residual_relative": kp.max_abs() / q2.max_abs(),
        "closed_form_l2_gap": spectral.l2_norm(q - closed) / spectral.l2_norm(closed),
        "q_max": float(q.values.max()), "q_min": float(q.values.min()),
        "q1_max": float(q1.values.max()), "q1_min": float(q1.values.min()),
        **info,
    }
    write_field(out / "q.wwl1", q)
    write_field(out / "q1.wwl1", q1)
    write_json(out / "lump.json", summary)
    return EXIT_OK


def _solve_one(cfg):
    return nonlinear.solve_fixed_point(cfg.solver())


def cmd_solve(cfg, args):
    out = Path(cfg.out)
    try:
        state, report = _solve_one(cfg)
    except IterationError as exc:
        if exc.report is not None:
            write_json(out / "report.json", {"run": exc.report.to_dict(), "config": cfg.as_dict()})
        raise
    for name in ("phi", "psi", "eta", "xi"):
        write_field(out / f"{name}.wwl1", getattr(state, name))
    write_json(out / "report.json", {"run": report.to_dict(), "config": cfg.as_dict()})
    return EXIT_OK


def _guarded(fn, name, *a):
    try:
        return fn(*a)
    except InvariantFailure as exc:
        return {"name": name, "passed": False, "checks": {}, "error": str(exc),
                "report": exc.report if isinstance(exc.report, dict) else None}


def cmd_verify(cfg, args):
    grid = cfg.grid()
    out = Path(cfg.out)
    dgrid = grid.with_(Nx=min(args.dno_n, grid.Nx), Ny=min(args.dno_n, grid.Ny))
    results = []
    for name, fn, a in (("spectral", suites.spectral_suite, (grid, cfg.seed)),
                        ("symbols", suites.symbol_suite, (grid,)),
                        ("lump", suites.lump_suite, (grid,)),
                        ("dno", suites.dno_suite, (dgrid, cfg.oracle())),
                        ("linear", suites.linear_suite, (grid, cfg.seed))):
        log.info("suite %s", name)
        results.append(_guarded(fn, name, *a))
    passed = all(r["passed"] for r in results)
    eigen = next((r.get("eigen") for r in results if r["name"] == "linear"), None)
    write_json(out / "report.json", {"config": cfg.as_dict(), "passed": passed,
                                     "suites": {r["name"]: r for r in results}})
    if eigen is not None:
        write_json(out / "eigenreport.json", eigen)
    if args.symbols_csv:
        _write_symbols(args.symbols_csv, grid)
    for r in results:
        print(f"{r['name']:<10} {'PASS' if r['passed'] else 'FAIL'}")
    return EXIT_OK if passed else EXIT_INVARIANT


def _parse_eps_list(text):
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigurationError(f"cannot parse eps list {text!r}", field="eps_list") from None
    if not vals:
        raise ConfigurationError("eps list is empty", field="eps_list")
    return vals


SWEEP_COLUMNS = ["eps", "iters", "contraction", "E_eta", "E_xi", "r_kinematic", "r_bernoulli", "wall_s"]


def cmd_sweep(cfg, args):
    eps_list = _parse_eps_list(args.eps_list)
    # Validate every case before the first solve starts.
    cfgs = [cfg.with_eps(e) for e in eps_list]
    out = Path(cfg.out)
    rows, reports, failed = [], {}, False
    for c in cfgs:
        log.info("solving eps = %g", c.eps)
        try:
            _, rep = _solve_one(c)
        except IterationError as exc:
            failed = True
            rep = exc.report
            if rep is None:
                raise
        reports[c.eps] = rep
        rows.append({"eps": c.eps, "iters": rep.iterations, "contraction": rep.last_contraction,
                     "E_eta": rep.E_eta, "E_xi": rep.E_xi, "r_kinematic": rep.r_kinematic, "r_bernoulli": rep.r_bernoulli,
                     "wall_s": rep.wall_s})
    write_csv(out / "sweep.csv", SWEEP_COLUMNS, rows)
    summary = {"config": cfg.as_dict(), "rows": rows,
               "runs": {repr(e): r.to_dict() for e, r in reports.items()}}
    if len(eps_list) >= 2 and not failed:
        summary["orders"] = nonlinear.decay_order_check(reports)
    write_json(out / "sweep.json", summary)
    return EXIT_ITERATION if failed else EXIT_OK


DNO_COLUMNS = ["amplitude", "R2", "R3", "R2_ratio", "R3_ratio", "iterations"]


def cmd_dno_check(cfg, args):
    grid = cfg.grid()
    out = Path(cfg.out)
    res = _guarded(suites.dno_suite, "dno", grid, cfg.oracle())
    if "scaling" in res:
        write_csv(out / "dno_check.csv", DNO_COLUMNS, res["scaling"])
    write_json(out / "dno_check.json", {"config": cfg.as_dict(), **res})
    if args.symbols_csv:
        _write_symbols(args.symbols_csv, grid)
    print(f"dno        {'PASS' if res['passed'] else 'FAIL'}")
    return EXIT_OK if res["passed"] else EXIT_INVARIANT


COMMANDS = {"lump": cmd_lump, "solve": cmd_solve, "verify": cmd_verify, "sweep": cmd_sweep,
            "dno-check": cmd_dno_check}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        spectral.set_workers(spectral.workers_from_env())
        cfg = _config_from_args(args)
        Path(cfg.out).mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, args)
    except (ConfigurationError, PreconditionError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantFailure as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except IterationError as exc:
        print(f"iteration failure: {exc}", file=sys.stderr)
        return EXIT_ITERATION
    except WWLumpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Structured results are JSON (sorted keys, so identical seed and config give
byte-identical reports); trajectories are CSV.  Exit codes: 0 success or
converged, 1 solver gave up without a verdict, 2 input error, 3 obstructed
verdict, 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import contact as ct
from . import foliation, verify
from .coisotropy import (PreconditionError, ProlongOptions, Section,
                         family_section, kuranishi, prolong, residual)
from .fields import Field

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_OBSTRUCTED = 3
EXIT_VERIFY = 4

CONFIG_ENV = "COISOLAB_CONFIG"


@dataclass
class RunConfig:
    trunc_order: int = 8
    poly_deg: int = 2
    identity_tol: float = 1e-9
    solver_tol: float = 1e-9
    leaf_tol: float = 1e-9
    seed: int = 0
    sample_count: int = 50
    out: str | None = None

    def validate(self):
        for name in ("identity_tol", "solver_tol", "leaf_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def _cfg(args) -> RunConfig:
    return load_config(getattr(args, "config", None), args)


def load_config(path: str | None, args) -> RunConfig:
    cfg = RunConfig()
    path = path or os.environ.get(CONFIG_ENV)
    if path:
        with open(path) as fh:
            data = json.load(fh)
        for key, value in data.items():
            if not hasattr(cfg, key):
                raise ValueError(f"unknown config key '{key}'")
            setattr(cfg, key, type(getattr(cfg, key))(value)
                    if getattr(cfg, key) is not None else value)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "trunc", None) is not None:
        cfg.trunc_order = args.trunc
    if getattr(args, "tol", None) is not None:
        cfg.solver_tol = args.tol
        cfg.identity_tol = args.tol
        cfg.leaf_tol = args.tol
    if getattr(args, "out", None) is not None:
        cfg.out = args.out
    cfg.validate()
    return cfg


def _emit(text: str, out_path: str | None):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _emit_json(payload, out_path: str | None):
    _emit(json.dumps(payload, sort_keys=True, indent=2), out_path)


def _load_section(path: str) -> Section:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise _InputError(f"section file not found: {path}")
    except json.JSONDecodeError as exc:
        raise _InputError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})")
    try:
        return Section.from_json_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise _InputError(f"{path}: bad section payload: {exc}")


def _load_field(path: str) -> Field:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise _InputError(f"field file not found: {path}")
    except json.JSONDecodeError as exc:
        raise _InputError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})")
    try:
        return Field.from_json_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise _InputError(f"{path}: bad field payload: {exc}")


class _InputError(Exception):
    pass


def _parse_point(text: str, dim: int) -> np.ndarray:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != dim:
        raise _InputError(f"point needs {dim} coordinates, got {len(parts)}")
    return np.array([float(p) for p in parts])


def _trace_csv(trace: foliation.LeafTrace) -> str:
    lines = ["step,x1,x2,x3,x4,x5,u1,u2,u3,u4,u5"]
    for i, (w, u) in enumerate(zip(trace.points, trace.lifted)):
        vals = [repr(float(v)) for v in list(w) + list(u)]
        lines.append(",".join([str(i)] + vals))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_residual(args) -> int:
    cfg = _cfg(args)
    s = _load_section(args.section)
    r = residual(s)
    _emit_json({"check": "residual",
                "residual_norm": r.l2_norm(),
                "max_abs": r.max_abs(),
                "truncation_loss": r.trunc_loss}, cfg.out)
    return EXIT_OK


def cmd_kuranishi(args) -> int:
    cfg = _cfg(args)
    s = _load_section(args.section)
    obstruction = kuranishi(s)
    nonzero = obstruction.max_abs() > cfg.identity_tol
    _emit_json({"check": "kuranishi",
                "norm": obstruction.l2_norm(),
                "max_abs": obstruction.max_abs(),
                "nonzero": bool(nonzero),
                "field": obstruction.to_json_dict()}, cfg.out)
    return EXIT_OK


def cmd_prolong(args) -> int:
    cfg = _cfg(args)
    direction = _load_section(args.section)
    opts = ProlongOptions(tol=cfg.solver_tol, max_iters=args.max_iters,
                          solver_radius=args.radius, trunc_order=cfg.trunc_order)
    try:
        report = prolong(direction, args.eps, opts)
    except PreconditionError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    _emit_json(report.to_json_dict(), cfg.out)
    if report.status == "converged":
        return EXIT_OK
    if report.status == "obstructed":
        return EXIT_OBSTRUCTED
    return EXIT_FAIL


def cmd_leaves(args) -> int:
    cfg = _cfg(args)
    if (args.t is None) == (args.section is None):
        raise _InputError("choose exactly one of --t or --section")
    if args.t is not None:
        verdict = foliation.classify_leaf_linear(args.t, tol=cfg.leaf_tol,
                                                 max_denominator=args.max_denominator)
        payload = {"t": args.t, **verdict.to_json_dict()}
        trace = None
        if args.trace:
            frame = foliation.characteristic_frame(
                family_section(args.t, cfg.trunc_order))
            duration = args.duration
            if duration is None and verdict.kind == "torus":
                duration = verdict.periods[0]
            trace = foliation.trace_leaf(frame, _parse_point(args.start, 5),
                                         duration or 2.0 * math.pi, h=args.step)
    else:
        s = _load_section(args.section)
        verdict, trace = foliation.classify_section_leaf(
            s, _parse_point(args.start, 5), args.duration or 2.0 * math.pi,
            h=args.step)
        payload = verdict.to_json_dict()
    _emit_json(payload, cfg.out)
    if trace is not None and args.csv:
        _emit(_trace_csv(trace), args.csv)
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _cfg(args)
    report = verify.run_suites(args.suite, seed=cfg.seed, n=args.n,
                               trunc_order=cfg.trunc_order)
    if args.n == 0:
        sys.stderr.write("warning: --n 0 requested, suites pass vacuously\n")
    _emit_json(report, cfg.out)
    return EXIT_OK if report["pass"] else EXIT_VERIFY


def cmd_flow(args) -> int:
    cfg = _cfg(args)
    lam = _load_field(args.hamiltonian)
    cd = ct.standard_contact(trunc_order=cfg.trunc_order, verify=False)
    p = _parse_point(args.point, cd.space.dim)
    path = ct.flow_contact(cd, lam, p, args.duration, h=args.step)
    lines = ["step,t,x1,x2,x3,x4,x5,y4,y5"]
    for i, q in enumerate(path):
        t = i * args.step * (1 if args.duration >= 0 else -1)
        lines.append(",".join([str(i), repr(float(t))]
                              + [repr(float(v)) for v in q]))
    _emit("\n".join(lines) + "\n", cfg.out)
    return EXIT_OK


def cmd_scan(args) -> int:
    cfg = _cfg(args)
    values = [float(v) for v in args.values]
    report = foliation.integrality_scan(values, tol=cfg.leaf_tol,
                                        max_denominator=args.max_denominator)
    _emit_json(report, cfg.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    # global flags live on a parent so they are accepted before or after the
    # subcommand; SUPPRESS defaults keep subparsers from clobbering values
    # parsed at the top level
    common = argparse.ArgumentParser(add_help=False)
    for args, kw in (
        (("--config",), {"help": f"JSON config path (or ${CONFIG_ENV})"}),
        (("--seed",), {"type": int, "help": "PRNG seed"}),
        (("--trunc",), {"type": int, "help": "frequency truncation order"}),
        (("--tol",), {"type": float, "help": "override all tolerances"}),
        (("--out",), {"help": "write the main report here instead of stdout"}),
        (("--format",), {"choices": ("json", "csv"),
                         "help": "preferred output format where both make sense"}),
    ):
        common.add_argument(*args, default=argparse.SUPPRESS, **kw)

    parser = argparse.ArgumentParser(
        prog="coisolab", allow_abbrev=False, parents=[common],
        description="coisotropic-deformation laboratory on T^5 x R^2")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        p = sub.add_parser(name, parents=[common], allow_abbrev=False, **kw)
        p.set_defaults(func=fn)
        return p

    p = add("residual", cmd_residual, help="coisotropicity residual of a section")
    p.add_argument("section")

    p = add("kuranishi", cmd_kuranishi,
            help="prolongability obstruction of a section")
    p.add_argument("section")

    p = add("prolong", cmd_prolong, help="Gauss-Newton prolongation attempt")
    p.add_argument("section", help="direction (infinitesimal deformation) file")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--max-iters", type=int, default=200)
    p.add_argument("--radius", type=int, default=1,
                   help="per-axis frequency radius of the solver unknowns")

    p = add("leaves", cmd_leaves, help="classify / trace characteristic leaves")
    p.add_argument("--t", type=float, help="parameter of the linear family")
    p.add_argument("--section", help="section file for trace-based evidence")
    p.add_argument("--start", default="0,0,0,0,0")
    p.add_argument("--duration", type=float)
    p.add_argument("--step", type=float, default=1e-2)
    p.add_argument("--max-denominator", type=int, default=10 ** 6)
    p.add_argument("--trace", action="store_true", help="also integrate a trace")
    p.add_argument("--csv", help="write the trace CSV here")

    p = add("scan", cmd_scan, help="integrality scan over family parameters")
    p.add_argument("values", nargs="*")
    p.add_argument("--max-denominator", type=int, default=10 ** 6)

    p = add("verify", cmd_verify, help="randomized identity suites")
    p.add_argument("suite", choices=("cartan", "jacobi", "contact",
                                     "reduction", "all"))
    p.add_argument("--n", type=int, default=50)

    p = add("flow", cmd_flow, help="contact flow trajectory of a Hamiltonian")
    p.add_argument("hamiltonian", help="Field JSON of the Hamiltonian section")
    p.add_argument("--point", required=True, help="7 start coordinates")
    p.add_argument("--duration", type=float, required=True)
    p.add_argument("--step", type=float, default=1e-3)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 success, 1 usage or validation error, 2 computational
failure or failed certification.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

from . import __version__
from .bounds import bounds_report, sweep
from .errors import ContractError, ConvergenceError
from .grid import Convention, GridSpec, MAX_DIMENSION
from .maxprinciple import verify_decay
from .optimizer import solve_optimizer
from .serialize import SCHEMA_VERSION, atomic_write, csv_text, dumps, plot_csv, sweep_csv
from .verify import certify_all

OUTPUT_DIR_ENV = "DHLS_OUTPUT_DIR"

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    n: int = 1
    N: list[int] = field(default_factory=lambda: [8])
    convention: str = "unit"
    tol: float = 1e-10
    max_iter: int = 100_000
    shift: float = 1.0
    dense_limit: int = 4096
    seed: int = 0
    deterministic: bool = True
    format: str = "json"
    output: Optional[str] = None

    def validate(self, command: str) -> None:
        problems = []
        if not isinstance(self.n, int) or not 1 <= self.n <= MAX_DIMENSION:
            problems.append(f"n must be an integer in 1..{MAX_DIMENSION}")
        if not self.N or any(not isinstance(x, int) or x < 1 for x in self.N):
            problems.append("N must be positive integers")
        elif command != "sweep" and len(self.N) != 1:
            problems.append(f"{command} takes a single N")
        elif any(b <= a for a, b in zip(self.N, self.N[1:])):
            problems.append("N values must be strictly increasing")
        if self.convention not in ("unit", "centered"):
            problems.append("convention must be 'unit' or 'centered'")
        elif command == "decay" and self.convention != "centered":
            problems.append("decay requires the centered convention")
        if not self.tol > 0:
            problems.append("tol must be positive")
        if not isinstance(self.max_iter, int) or self.max_iter < 1:
            problems.append("max_iter must be a positive integer")
        if not self.shift >= 0:
            problems.append("shift must be nonnegative")
        if not isinstance(self.dense_limit, int) or self.dense_limit < 1:
            problems.append("dense_limit must be a positive integer")
        if self.format not in ("json", "csv"):
            problems.append("format must be 'json' or 'csv'")
        if problems:
            raise UsageError("; ".join(problems))

    def echo(self) -> dict:
        return asdict(self)


CONFIG_KEYS = {f.name for f in fields(RunConfig)}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser, multi_N: bool = False) -> None:
    p.add_argument("-n", "--dimension", dest="n", type=int, help="lattice dimension (1-4)")
    if multi_N:
        p.add_argument("-N", "--side", dest="N", type=int, nargs="+", help="increasing side lengths")
    else:
        p.add_argument("-N", "--side", dest="N", type=int, help="side length N")
    p.add_argument("--convention", choices=["unit", "centered"])
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--shift", type=float)
    p.add_argument("--dense-limit", dest="dense_limit", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--deterministic", dest="deterministic", action="store_true", default=None,
                   help="omit wall-clock timings so output is byte-reproducible (default)")
    p.add_argument("--no-deterministic", dest="deterministic", action="store_false",
                   help="record wall-clock timings")
    p.add_argument("--format", choices=["json", "csv"])
    p.add_argument("-o", "--output", help="output file (stdout if omitted)")
    p.add_argument("--config", help="flat JSON file of RunConfig fields")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dhls", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compute", help="sharp constant and optimizer for one grid")
    _common(p)
    p.add_argument("--vector-out", help="CSV file for the optimizer (coordinates, value)")

    p = sub.add_parser("sweep", help="lambda_N and bounds over increasing N")
    _common(p, multi_N=True)
    p.add_argument("--plot-data", help="CSV of (ln_N, lambda, lower, upper)")

    p = sub.add_parser("verify", help="run every certificate and emit a JSON report")
    _common(p)

    p = sub.add_parser("decay", help="monotone-decay certificate on a centered grid")
    _common(p)

    p = sub.add_parser("bounds", help="lower/upper bounds next to lambda_N")
    _common(p)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the config file, then explicit flags."""
    values = asdict(RunConfig())
    if args.command == "decay":
        values["convention"] = "centered"
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = sorted(set(loaded) - CONFIG_KEYS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        values.update(loaded)
    for key in CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            values[key] = val
    if not isinstance(values["N"], list):
        values["N"] = [values["N"]]
    cfg = RunConfig(**values)
    cfg.validate(args.command)
    return cfg


def _target(path: Optional[str]) -> Optional[Path]:
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def _emit(text: str, path: Optional[str]) -> None:
    target = _target(path)
    if target is None:
        sys.stdout.write(text)
    else:
        atomic_write(target, text)


def _grid(cfg: RunConfig) -> GridSpec:
    return GridSpec(cfg.n, cfg.N[0], Convention(cfg.convention))


def _header(command: str, cfg: RunConfig) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": command, "config": cfg.echo()}


def cmd_compute(cfg: RunConfig, vector_out: Optional[str] = None) -> int:
    g = _grid(cfg)
    try:
        opt = solve_optimizer(g, cfg.tol, cfg.max_iter, shift=cfg.shift, dense_limit=cfg.dense_limit)
        converged = True
    except ConvergenceError as exc:
        opt, converged = exc.partial, False
        print(f"dhls: {exc}", file=sys.stderr)
    record = {
        "n": g.dimension,
        "N": g.side,
        "convention": g.convention.value,
        "lambda": opt.lam,
        "el_residual": opt.el_residual,
        "gap_ratio": opt.gap_ratio,
        "iterations": opt.iterations,
        "min_entry": opt.min_entry,
        "mode": opt.mode.value,
        "converged": converged,
    }
    if cfg.format == "json":
        _emit(dumps({**_header("compute", cfg), **record}), cfg.output)
    else:
        _emit(csv_text(list(record), [list(record.values())]), cfg.output)
    if vector_out:
        coords = [f"r{i + 1}" for i in range(g.dimension)]
        rows = [list(p) + [v] for p, v in zip(g.coords.tolist(), opt.vector)]
        atomic_write(_target(vector_out), csv_text(coords + ["value"], rows))
    return EXIT_OK if converged else EXIT_FAIL


def cmd_sweep(cfg: RunConfig, plot_data: Optional[str] = None) -> int:
    table = sweep(
        cfg.n,
        cfg.N,
        cfg.tol,
        strict=False,
        convention=Convention(cfg.convention),
        dense_limit=cfg.dense_limit,
        max_iter=cfg.max_iter,
        shift=cfg.shift,
    )
    _emit(sweep_csv(table, with_timing=not cfg.deterministic), cfg.output)
    target = _target(cfg.output)
    if target is not None:
        meta = {
            **_header("sweep", cfg),
            "columns": ["n", "N", "lambda", "lower", "upper", "slope_prev", "ln_N", "wall_ms", "error"],
            "slopes": [{"N_pair": list(pair), "slope": s} for pair, s in table.slopes()],
        }
        atomic_write(target.with_name(target.name + ".meta.json"), dumps(meta))
    if plot_data:
        atomic_write(_target(plot_data), plot_csv(table))
    return EXIT_FAIL if any(r.error for r in table.rows) else EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    rep = certify_all(cfg.n, cfg.N[0], cfg.tol, cfg.seed)
    entries = []
    for e in rep.entries:
        item = {"id": e.id, "pass": e.passed, "metrics": e.metrics, "tolerance": e.tolerance, "note": e.note}
        if not cfg.deterministic:
            item["wall_time"] = e.wall_time
        entries.append(item)
    doc = {
        **_header("verify", cfg),
        "n": rep.n,
        "N": rep.N,
        "tol": rep.tol,
        "seed": rep.seed,
        "entries": entries,
        "pass": rep.passed,
    }
    _emit(dumps(doc), cfg.output)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_decay(cfg: RunConfig) -> int:
    g = _grid(cfg)
    if g.convention is not Convention.CENTERED:
        raise UsageError("decay requires the centered convention")
    try:
        opt = solve_optimizer(g, min(cfg.tol, 1e-12), cfg.max_iter, shift=cfg.shift,
                              dense_limit=cfg.dense_limit, with_gap=False)
    except ConvergenceError as exc:
        print(f"dhls: {exc}", file=sys.stderr)
        return EXIT_FAIL
    rep = verify_decay(opt)
    axes = [
        {
            "axis": ax.axis,
            "min_d": ax.min_d,
            "min_direct": ax.min_direct,
            "min_F": ax.min_F,
            "opnorm_A": ax.opnorm_A,
            "norm_bound": ax.norm_bound,
            "delta_N": ax.delta_N,
            "residual": ax.residual,
            "fixed_point_gap": ax.fixed_point_gap,
            "pass": ax.passed,
        }
        for ax in rep.axes
    ]
    doc = {**_header("decay", cfg), "n": g.dimension, "N": g.side, "lambda": opt.lam, "axes": axes,
           "pass": rep.passed}
    _emit(dumps(doc), cfg.output)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_bounds(cfg: RunConfig) -> int:
    g = _grid(cfg)
    try:
        opt = solve_optimizer(g, cfg.tol, cfg.max_iter, shift=cfg.shift, dense_limit=cfg.dense_limit,
                              with_gap=False)
    except ConvergenceError as exc:
        print(f"dhls: {exc}", file=sys.stderr)
        return EXIT_FAIL
    rep = bounds_report(g, opt.lam)
    doc = {
        **_header("bounds", cfg),
        "n": g.dimension,
        "N": g.side,
        "lower_uniform": rep.lower_uniform,
        "lambda": rep.lam,
        "upper_center": rep.upper_center,
        "upper_integral": rep.upper_integral,
        "sphere_area": rep.sphere_area,
        "log_N": rep.log_N,
        "intercept": rep.lam - rep.sphere_area * rep.log_N,
        "pass": rep.sandwich_ok,
    }
    _emit(dumps(doc), cfg.output)
    return EXIT_OK if rep.sandwich_ok else EXIT_FAIL


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "compute":
            return cmd_compute(cfg, args.vector_out)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.plot_data)
        if args.command == "verify":
            return cmd_verify(cfg)
        if args.command == "decay":
            return cmd_decay(cfg)
        return cmd_bounds(cfg)
    except (UsageError, ContractError) as exc:
        print(f"dhls: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

    critset <argument|critical|scan|verify|count> --config FILE [--output PATH] [--threads N]

Exit codes: 0 success, 1 numerical failure, 2 invalid configuration.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from typing import Any, Optional

import numpy as np

from . import __version__, verify
from .errors import (CritsetError, DirichletViolation, EmptyScanRange, GridMismatch,
                     InvalidGrid, InvalidParameter, NotApplicable, NotPositive,
                     RangeUnattainable)
from .grid import Grid, GridFunction
from .manifold import chart_point, default_direction, find_lambda, is_Ck_nonempty, lambda_scan
from .nonlinearity import make_family
from .pruefer import free_argument, integrate_argument
from .shooting import count_solutions, ode_residual, shoot
from .variational import is_critical

COMMON = {"nonlinearity", "grid", "output"}
ALLOWED = {
    "argument": COMMON | {"u", "tol"},
    "critical": COMMON | {"h", "p", "k", "theta", "bracket_limit"},
    "scan": COMMON | {"mode", "h", "p", "lambda_range", "omega_range", "samples"},
    "verify": COMMON | {"only", "seed"},
    "count": COMMON | {"g", "s_range", "samples"},
}
# verify uses its own nonlinearities
REQUIRED = {"argument": {"nonlinearity"}, "critical": {"nonlinearity"},
            "scan": set(), "verify": set(), "count": {"nonlinearity"}}

CONFIG_ERRORS = (InvalidParameter, InvalidGrid, GridMismatch, DirichletViolation,
                 NotPositive, NotApplicable, EmptyScanRange)


class ConfigError(Exception):
    pass


# -- serialization -----------------------------------------------------------

def _fmt(x: float) -> str:
    if math.isnan(x):
        return "null"
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps(obj: Any) -> str:
    """JSON with floats fixed at 17 significant digits and sorted keys."""
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}: {dumps(v)}" for k, v in sorted(obj.items()))
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(float(obj))
    return json.dumps(obj)


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format(float(x), ".17g") if isinstance(x, (float, np.floating)) else x
                    for x in row])
    return buf.getvalue()


# -- config ------------------------------------------------------------------

class Config:
    def __init__(self, command: str, raw: dict, output: Optional[str]):
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(raw) - ALLOWED[command]
        if unknown:
            raise ConfigError(f"unknown config key(s) for {command}: {sorted(unknown)}")
        missing = REQUIRED[command] - set(raw)
        if missing:
            raise ConfigError(f"missing config key(s): {sorted(missing)}")
        self.raw = raw
        grid = raw.get("grid", {})
        if not isinstance(grid, dict) or set(grid) - {"n", "substeps"}:
            raise ConfigError("key 'grid' accepts only 'n' and 'substeps'")
        self.grid = self._wrap("grid", lambda: Grid(grid.get("n", 2048)))
        self.substeps = grid.get("substeps", 2)
        if isinstance(self.substeps, bool) or not isinstance(self.substeps, int) or self.substeps < 1:
            raise ConfigError("key 'grid.substeps' must be a positive integer")
        out = raw.get("output", {})
        if not isinstance(out, dict) or set(out) - {"path", "format"}:
            raise ConfigError("key 'output' accepts only 'path' and 'format'")
        self.format = out.get("format", "json")
        if self.format not in ("json", "csv"):
            raise ConfigError("key 'output.format' must be 'json' or 'csv'")
        self.path = output if output is not None else out.get("path")
        self.f = (self._wrap("nonlinearity", lambda: make_family(raw["nonlinearity"]))
                  if "nonlinearity" in raw else None)

    def _wrap(self, key, build):
        try:
            return build()
        except (CritsetError, TypeError, ValueError) as exc:
            raise ConfigError(f"key {key!r}: {exc}") from exc

    def function(self, key: str, default=None, dirichlet: bool = True) -> Optional[GridFunction]:
        if key not in self.raw:
            return default
        return self._wrap(key, lambda: GridFunction.from_json(self.raw[key], self.grid, dirichlet))

    def number(self, key: str, default=None, kind=float):
        if key not in self.raw:
            if default is None:
                raise ConfigError(f"missing config key {key!r}")
            return default
        value = self.raw[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"key {key!r} must be a number")
        if kind is int and int(value) != value:
            raise ConfigError(f"key {key!r} must be an integer")
        if not math.isfinite(value):
            raise ConfigError(f"key {key!r} must be finite")
        return kind(value)

    def pair(self, key: str, default) -> tuple[float, float]:
        value = self.raw.get(key, default)
        if (not isinstance(value, (list, tuple)) or len(value) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)):
            raise ConfigError(f"key {key!r} must be a pair of numbers")
        lo, hi = float(value[0]), float(value[1])
        if not lo < hi:
            raise ConfigError(f"key {key!r}: empty range [{lo}, {hi}]")
        return lo, hi


def _emit(cfg: Config, summary: dict, csv_text: Optional[str]) -> None:
    """JSON summary goes to the output path (format json) or stdout; CSV to the path."""
    text = dumps(summary) + "\n"
    if cfg.format == "csv" and csv_text is not None:
        if cfg.path:
            with open(cfg.path, "w", newline="") as fh:
                fh.write(csv_text)
        else:
            sys.stdout.write(csv_text)
            return
        sys.stdout.write(text)
    elif cfg.path:
        with open(cfg.path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- commands ----------------------------------------------------------------

def cmd_argument(cfg: Config, threads: int) -> int:
    u = cfg.function("u", GridFunction.zero(cfg.grid))
    tol = cfg.number("tol", 1e-8)
    if tol <= 0:
        raise ConfigError("key 'tol' must be positive")
    path = integrate_argument(cfg.f, u, cfg.substeps)
    check = is_critical(path, tol)
    summary = {"W_pi": path.W_pi, "is_critical": check.critical, "k": check.k,
               "distance": check.distance, **{k: v for k, v in path.terminal().items() if k != "W_pi"}}
    _emit(cfg, summary, path.to_csv())
    return 0


def cmd_critical(cfg: Config, threads: int) -> int:
    h = cfg.function("h", GridFunction.zero(cfg.grid))
    p = cfg.function("p", default_direction(cfg.grid))
    limit = cfg.number("bracket_limit", 1e6)
    if ("k" in cfg.raw) == ("theta" in cfg.raw):
        raise ConfigError("exactly one of 'k' and 'theta' is required")
    try:
        if "k" in cfg.raw:
            k = cfg.number("k", kind=int)
            if k < 1:
                raise ConfigError("key 'k' must be a positive integer")
            if not is_Ck_nonempty(cfg.f, k):
                _emit(cfg, {"k": k, "nonempty": False}, None)
                return 0
            point = chart_point(cfg.f, h, p, k, limit, cfg.substeps)
            summary = {"nonempty": True, **point.to_json()}
        else:
            theta = cfg.number("theta")
            if theta <= 0:
                raise ConfigError("key 'theta' must be positive")
            try:
                point = find_lambda(cfg.f, h, p, theta, limit, cfg.substeps)
            except RangeUnattainable as exc:
                _emit(cfg, {"theta": theta, "attainable": False, "reason": str(exc)}, None)
                return 0
            summary = {"attainable": True, **point.to_json()}
    except NotApplicable as exc:
        raise ConfigError(f"key 'nonlinearity': {exc}") from exc
    _emit(cfg, summary, None)
    return 0


def cmd_scan(cfg: Config, threads: int) -> int:
    mode = cfg.raw.get("mode", "lambda")
    samples = cfg.number("samples", 401, int)
    if samples < 2:
        raise ConfigError("key 'samples' must be at least 2")
    if mode == "lambda":
        if cfg.f is None:
            raise ConfigError("missing config key 'nonlinearity'")
        lo, hi = cfg.pair("lambda_range", [-100.0, 100.0])
        h = cfg.function("h", GridFunction.zero(cfg.grid))
        p = cfg.function("p", default_direction(cfg.grid))
        xs = np.linspace(lo, hi, samples)
        ws = lambda_scan(cfg.f, h, p, xs, cfg.substeps, threads)
        d = np.diff(ws)
        trend = "decreasing" if np.all(d < 0) else "increasing" if np.all(d > 0) else "none"
        header = ["lambda", "W_pi"]
    elif mode == "omega":
        lo, hi = cfg.pair("omega_range", [-10.0, 30.0])
        xs = np.linspace(lo, hi, samples)
        ws = np.array([free_argument(w) for w in xs])
        trend = "increasing" if np.all(np.diff(ws) > 0) else "none"
        header = ["omega", "W_pi"]
    else:
        raise ConfigError("key 'mode' must be 'lambda' or 'omega'")
    summary = {"mode": mode, "samples": samples, "monotone": trend,
               "W_min": float(ws.min()), "W_max": float(ws.max())}
    _emit(cfg, summary, _csv(header, zip(xs, ws)))
    return 0


def cmd_verify(cfg: Config, threads: int, only=None) -> int:
    only = only or cfg.raw.get("only")
    if isinstance(only, str):
        only = [only]
    if only is not None:
        unknown = set(only) - set(verify.GROUPS)
        if unknown:
            raise ConfigError(f"key 'only': unknown group(s) {sorted(unknown)}")
    seed = cfg.number("seed", 0, int)
    rows = verify.run(cfg.grid, cfg.substeps, only, seed)
    width = max(len(name) for name, _, _ in rows)
    for name, ok, detail in rows:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {detail}")
    passed = all(ok for _, ok, _ in rows)
    if cfg.path:
        _emit(cfg, {"passed": passed, "checks": [{"name": n, "passed": ok, "detail": d}
                                                 for n, ok, d in rows]}, None)
    return 0 if passed else 1


def cmd_count(cfg: Config, threads: int) -> int:
    g = cfg.function("g", GridFunction.zero(cfg.grid), dirichlet=False)
    lo, hi = cfg.pair("s_range", [-200.0, 200.0])
    samples = cfg.number("samples", 2001, int)
    if samples < 2:
        raise ConfigError("key 'samples' must be at least 2")
    result = count_solutions(cfg.f, g, lo, hi, samples, cfg.substeps, threads)
    solutions = []
    for s in list(result.slopes) + list(result.tangential):
        rec = shoot(cfg.f, g, s, cfg.substeps)
        u = rec.trajectory
        solutions.append({
            "s": s,
            "terminal": rec.terminal,
            "residual": ode_residual(cfg.f, g, u),
            "zeros_of_u": int(np.count_nonzero(np.diff(np.sign(u.values[1:-1])) != 0)),
            "tangential": s in result.tangential,
        })
    summary = {"count": result.count, "solutions": solutions,
               "blowup_samples": result.blowups, "window": [lo, hi], "samples": samples}
    _emit(cfg, summary, result.scan_csv())
    return 0


COMMANDS = {"argument": cmd_argument, "critical": cmd_critical, "scan": cmd_scan,
            "verify": cmd_verify, "count": cmd_count}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="critset", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--output", help="output path (overrides output.path)")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for scans; never changes results")
    parser.add_argument("--only", action="append", help="verify: run only this group")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON in config: {exc}") from exc
        if args.threads < 1:
            raise ConfigError("--threads must be positive")
        cfg = Config(args.command, raw, args.output)
        if args.command == "verify":
            return cmd_verify(cfg, args.threads, args.only)
        return COMMANDS[args.command](cfg, args.threads)
    except ConfigError as exc:
        print(f"critset: config error: {exc}", file=sys.stderr)
        return 2
    except CONFIG_ERRORS as exc:
        print(f"critset: config error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except CritsetError as exc:
        print(f"critset: numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

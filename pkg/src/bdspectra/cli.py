"""``bd-spectra`` command-line interface.

Exit codes: 0 success, 1 a verified property failed, 2 unreadable or
malformed input, 3 coefficients outside their admissible range.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from importlib import resources
from pathlib import Path

import numpy as np

from . import checks
from .errors import (
    BdSpectraError, DomainError, ExprSyntaxError, PositivityViolation, ProblemFileError,
    RangeViolation, SpecError,
)
from .model import RandomWalkSpec, load_problem, rw_to_bd_hat
from .monotonicity import applicable_criteria, classify, grid_points, parse_criterion, scan
from .spectral_calculus import Local, all_lambda_primes, bounds

__all__ = ["main", "RunConfig", "build_parser"]

EXIT_OK, EXIT_PROPERTY, EXIT_INPUT, EXIT_VALIDITY = 0, 1, 2, 3
PARALLEL_MIN_GRID = 256


@dataclass
class RunConfig:
    command: str
    problem_path: str
    grid: int = 1000
    criteria: list = field(default_factory=list)
    output: str | None = None
    format: str = "csv"
    workers: int = 1


def fmt(x) -> str:
    return format(float(x), ".17g")


# --------------------------------------------------------------------------
# per-point work (module level so process pools can pickle it)
# --------------------------------------------------------------------------

def _analyze_row(spec, t):
    if isinstance(spec, RandomWalkSpec):
        spec.values(t)
        loc = Local.at(rw_to_bd_hat(spec), t)
        shift = -1.0
    else:
        loc = Local.at(spec, t)
        shift = 0.0
    lam = loc.eigenvalues() + shift
    dlam = all_lambda_primes(loc)
    b = bounds(loc)
    return [t, *lam, *dlam, b.m1 + shift, b.m2 + shift, b.mu + shift]


def _trace_rows(spec, criteria, t):
    rows = []
    for c in criteria:
        v = classify(spec, c, t)
        rows.append([t, c, int(v.member), int(v.nondegenerate), v.trace()])
    return rows


def _map(cfg: RunConfig):
    workers = cfg.workers
    if workers > 1 and cfg.grid >= PARALLEL_MIN_GRID:
        pool = ProcessPoolExecutor(max_workers=workers)
        return pool, partial(pool.map, chunksize=max(1, cfg.grid // (4 * workers)))
    return None, map


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def _write_csv(out, header, rows):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) if isinstance(x, (float, np.floating)) else x for x in row])


def _write_report(out, header, rows):
    cells = [[fmt(x) if isinstance(x, (float, np.floating)) else str(x) for x in row]
             for row in rows]
    widths = [max([len(h)] + [len(r[i]) for r in cells]) for i, h in enumerate(header)]
    out.write("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip() + "\n")
    for r in cells:
        out.write("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n")


def _emit(cfg, out, header, rows):
    (_write_csv if cfg.format == "csv" else _write_report)(out, header, rows)


def cmd_analyze(cfg: RunConfig, spec, out) -> int:
    n = spec.n
    header = (["t"] + [f"lambda_{k}" for k in range(n + 1)]
              + [f"dlambda_{k}" for k in range(n + 1)] + ["m1", "m2", "mu"])
    pool, mapper = _map(cfg)
    try:
        rows = list(mapper(partial(_analyze_row, spec), grid_points(spec.domain, cfg.grid)))
    finally:
        if pool is not None:
            pool.shutdown()
    _emit(cfg, out, header, rows)
    return EXIT_OK


def cmd_scan(cfg: RunConfig, spec, out) -> int:
    _validate_grid(spec, cfg.grid)
    pool, mapper = _map(cfg)
    rows = []
    try:
        for c in cfg.criteria:
            for iv in scan(spec, c, cfg.grid, mapper=mapper):
                rows.append([iv.criterion, iv.direction, iv.lo, iv.hi])
    finally:
        if pool is not None:
            pool.shutdown()
    _emit(cfg, out, ["criterion", "direction", "lo", "hi"], rows)
    return EXIT_OK


def cmd_trace(cfg: RunConfig, spec, out) -> int:
    pool, mapper = _map(cfg)
    try:
        chunks = list(mapper(partial(_trace_rows, spec, cfg.criteria),
                             grid_points(spec.domain, cfg.grid)))
    finally:
        if pool is not None:
            pool.shutdown()
    rows = [row for chunk in chunks for row in chunk]
    _emit(cfg, out, ["t", "criterion", "member", "nondegenerate", "witness"], rows)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, spec, out) -> int:
    results = checks.run_suite(spec, grid_points(spec.domain, cfg.grid))
    for r in results:
        out.write(r.line() + "\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_PROPERTY


COMMANDS = {"analyze": cmd_analyze, "scan": cmd_scan, "verify": cmd_verify, "trace": cmd_trace}


# --------------------------------------------------------------------------
# plumbing
# --------------------------------------------------------------------------

def _validate_grid(spec, grid):
    # a grid point evaluated before any work gives range/positivity errors
    # a clean exit code instead of silently empty scans
    for t in grid_points(spec.domain, grid):
        spec.values(t)


def resolve_problem(path: str) -> Path:
    """A file path, or the name of a bundled problem (``A1``, ``B1``, ...)."""
    p = Path(path)
    if p.exists() or p.suffix:
        return p
    bundled = resources.files("bdspectra") / "problems" / f"{path}.toml"
    return Path(str(bundled)) if bundled.is_file() else p


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="bd-spectra",
        description="Spectra and eigenvalue monotonicity of time-dependent birth-death "
                    "and random-walk matrices.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--problem", required=True,
                    help="problem file (TOML) or the name of a bundled problem")
    ap.add_argument("--grid", type=int, default=1000, help="interior grid points (default 1000)")
    ap.add_argument("--criteria", default="",
                    help="comma-separated criterion tags (default: all that apply)")
    ap.add_argument("--out", default=None, help="output file (default stdout)")
    ap.add_argument("--format", choices=("csv", "report"), default="csv")
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                    help="process-pool size for grid evaluation")
    return ap


def _config(args, spec) -> RunConfig:
    if args.grid < 2:
        raise ValueError("--grid must be at least 2")
    if args.criteria:
        tags = []
        for raw in args.criteria.split(","):
            base, arrow = parse_criterion(raw)
            tag = base + arrow
            if tag not in applicable_criteria(spec):
                raise ValueError(f"criterion {tag} does not apply to this problem")
            tags.append(tag)
    else:
        tags = list(applicable_criteria(spec))
    return RunConfig(args.command, args.problem, args.grid, tags, args.out, args.format,
                     max(1, args.workers))


def _error(msg):
    print(f"bd-spectra: error: {msg}", file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = load_problem(resolve_problem(args.problem))
        cfg = _config(args, spec)
    except (ProblemFileError, ExprSyntaxError, SpecError, ValueError) as exc:
        _error(exc)
        return EXIT_INPUT

    buf = io.StringIO()
    try:
        code = COMMANDS[cfg.command](cfg, spec, buf)
    except (PositivityViolation, RangeViolation, DomainError) as exc:
        _error(exc)
        return EXIT_VALIDITY
    except BdSpectraError as exc:
        _error(exc)
        return EXIT_PROPERTY

    text = buf.getvalue()
    if cfg.output:
        try:
            Path(cfg.output).write_text(text, encoding="utf-8")
        except OSError as exc:
            _error(f"cannot write {cfg.output}: {exc.strerror}")
            return EXIT_INPUT
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

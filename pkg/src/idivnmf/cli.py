"""Batch command-line front end.

Reads a nonnegative matrix from a headerless comma-separated text file, runs
the solver, and writes the denormalized factors (``W.csv``, ``H.csv``, so
that the input is approximately ``W @ H``), a flat ``manifest.json``
describing the run, and optionally a JSON-lines iteration trace.  All file
writes are atomic (temp file plus rename) and, for a fixed flag set
including the seed, byte-identical across runs of the same build.

Exit codes: 0 converged, 2 iteration budget exhausted, 3 underflow stop,
4 input or usage error, 5 identity-check violation.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import time

import numpy as np

from .core import DegenerateMatrixError, denormalize_solution, normalize_problem
from .diagnostics import kkt_report
from .solver import (
    STATUS_CONVERGED,
    STATUS_MAX_ITERS,
    STATUS_UNDERFLOW,
    IdentityViolationError,
    SolverConfig,
    solve,
)

__all__ = ["MatrixParseError", "ingest_matrix", "emit_matrix", "main"]

EXIT_OK = 0
EXIT_MAX_ITERS = 2
EXIT_UNDERFLOW = 3
EXIT_INPUT = 4
EXIT_IDENTITY = 5

_STATUS_EXIT = {
    STATUS_CONVERGED: EXIT_OK,
    STATUS_MAX_ITERS: EXIT_MAX_ITERS,
    STATUS_UNDERFLOW: EXIT_UNDERFLOW,
}

# Stationarity tolerance used for the optional report in the manifest.
KKT_TOL = 1e-6


class MatrixParseError(ValueError):
    """Malformed matrix file (ragged rows, bad numbers, empty input)."""


class _UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; route through our own error
    # instead so usage problems map to the input-error exit code.
    def error(self, message):
        raise _UsageError(message)


def ingest_matrix(path) -> np.ndarray:
    """Parse a headerless comma-separated matrix file.

    One row per line, blank lines ignored.  Ragged rows and non-finite or
    negative entries are reported with their 1-based position.
    """
    rows: list[list[float]] = []
    width = None
    first_line = None
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            cells = line.strip().split(",")
            try:
                values = [float(cell) for cell in cells]
            except ValueError:
                raise MatrixParseError(f"{path}: cannot parse row at line {lineno}")
            if width is None:
                width = len(values)
                first_line = lineno
            elif len(values) != width:
                raise MatrixParseError(
                    f"{path}: row at line {lineno} has {len(values)} entries, "
                    f"expected {width} (as in line {first_line})"
                )
            for col, value in enumerate(values, start=1):
                if math.isnan(value) or math.isinf(value):
                    raise MatrixParseError(
                        f"{path}: non-finite entry at ({len(rows) + 1}, {col})"
                    )
                if value < 0:
                    raise MatrixParseError(
                        f"{path}: negative entry at ({len(rows) + 1}, {col})"
                    )
            rows.append(values)
    if not rows:
        raise MatrixParseError(f"{path}: no matrix rows found")
    return np.array(rows, dtype=np.float64)


def _format_value(x: float) -> str:
    # Shortest decimal that round-trips the double exactly; integral values
    # drop the trailing ".0" so 5.0 prints as "5".
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") else s


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit_matrix(path, matrix: np.ndarray) -> None:
    """Write a matrix in the same comma-separated dialect ``ingest_matrix``
    reads, losslessly (values round-trip bit for bit)."""
    lines = [",".join(_format_value(x) for x in row) for row in np.atleast_2d(matrix)]
    _atomic_write(str(path), "\n".join(lines) + "\n")


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="idivnmf",
        description=(
            "Approximate nonnegative matrix factorization minimizing the "
            "generalized Kullback-Leibler divergence."
        ),
    )
    parser.add_argument("--input", required=True, help="matrix file (CSV rows, no header)")
    parser.add_argument("--k", required=True, type=int, help="inner size of the factorization")
    parser.add_argument(
        "--variant",
        choices=("simultaneous", "sequential", "unnormalized"),
        default="simultaneous",
        help="update scheme (default: simultaneous)",
    )
    parser.add_argument(
        "--init",
        choices=("deterministic", "random"),
        default="deterministic",
        help="starting pair (default: deterministic row/column profile)",
    )
    parser.add_argument("--seed", type=int, default=0, help="seed for --init random")
    parser.add_argument("--max-iters", type=int, default=1000, help="iteration budget")
    parser.add_argument("--tol", type=float, default=1e-10, help="relative gain stopping threshold")
    parser.add_argument("--trace", default=None, help="write a JSON-lines iteration trace here")
    parser.add_argument("--out-dir", default=".", help="directory for W.csv, H.csv, manifest.json")
    parser.add_argument(
        "--components",
        action="store_true",
        help="record the exact gain decomposition in the trace",
    )
    parser.add_argument(
        "--kkt",
        action="store_true",
        help=f"append a stationarity report (tolerance {KKT_TOL:g}) to the manifest",
    )
    parser.add_argument(
        "--check-identities",
        action="store_true",
        help="verify the exact descent identities every iteration; abort on violation",
    )
    return parser


def _trace_lines(result) -> str:
    lines = []
    for rec in result.trace:
        entry: dict = {
            "iter": rec.iteration,
            "divergence": rec.divergence,
            "gain": rec.gain,
        }
        if rec.gain_marginal is not None:
            entry["gain_p"] = rec.gain_marginal
            entry["gain_q"] = rec.gain_factor
            entry["gain_residual"] = rec.gain_residual
        lines.append(json.dumps(entry))
    return "\n".join(lines) + ("\n" if lines else "")


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.k < 1:
            raise _UsageError("--k must be at least 1")
        if args.seed < 0:
            raise _UsageError("--seed must be nonnegative")
        if args.max_iters < 1:
            raise _UsageError("--max-iters must be at least 1")
        if not args.tol > 0:
            raise _UsageError("--tol must be positive")

        matrix = ingest_matrix(args.input)
        config = SolverConfig(
            inner_size=args.k,
            max_iters=args.max_iters,
            tol_gain=args.tol,
            variant=args.variant,
            init=args.init,
            seed=args.seed,
            record_components=args.components,
        )
        started = time.perf_counter()
        result = solve(matrix, config, check_identities=args.check_identities)
        wall_ms = (time.perf_counter() - started) * 1000.0
    except IdentityViolationError as exc:
        print(f"idivnmf: identity check failed: {exc}", file=sys.stderr)
        return EXIT_IDENTITY
    except (_UsageError, MatrixParseError, DegenerateMatrixError, ValueError) as exc:
        print(f"idivnmf: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"idivnmf: error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    scaled = normalize_problem(matrix)
    w, h = denormalize_solution(result.pair, scaled.total)
    out_dir = args.out_dir
    os.makedirs(out_dir, exist_ok=True)
    emit_matrix(os.path.join(out_dir, "W.csv"), w)
    emit_matrix(os.path.join(out_dir, "H.csv"), h)

    manifest = {
        "input": str(args.input),
        "k": args.k,
        "variant": args.variant,
        "init": args.init,
        "seed": args.seed,
        "max_iters": args.max_iters,
        "tol": args.tol,
        "total": scaled.total,
        "status": result.status,
        "final_divergence": result.final_divergence,
        "effective_inner_size": result.effective_inner_size,
        "iterations": len(result.trace),
        "wall_time_ms": wall_ms,
    }
    if args.kkt:
        report = kkt_report(scaled.p, result.pair, tol=KKT_TOL)
        manifest["kkt"] = {
            "max_complementarity": report.max_complementarity,
            "min_zero_gradient": report.min_zero_gradient,
            "dead_columns": list(report.dead_columns),
        }
    _atomic_write(
        os.path.join(out_dir, "manifest.json"), json.dumps(manifest, indent=2) + "\n"
    )

    if args.trace is not None:
        _atomic_write(str(args.trace), _trace_lines(result))

    return _STATUS_EXIT[result.status]


if __name__ == "__main__":
    sys.exit(main())

"""Command-line sweep runner.

Exit status: 0 when every row succeeded, 1 on any failed row or soundness
violation, 2 when the specification is invalid.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import __version__
from .experiments import (DEFAULT_THETA, ExperimentSpec, SpecError, available_workers, emit_chart,
                          emit_csv, run_sweep, soundness_violations)

EXIT_OK, EXIT_PARTIAL, EXIT_SPEC = 0, 1, 2


def _csv_list(text: str) -> tuple:
    return tuple(s.strip() for s in text.split(",") if s.strip())


def _grid(text: str) -> tuple:
    """``start:stop:step`` (inclusive stop) or a comma-separated list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError("grid must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise argparse.ArgumentTypeError("need step > 0 and stop >= start")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 12) for i in range(count))
    try:
        return tuple(float(v) for v in _csv_list(text))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="caqer", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("sweep", help="run a parameter sweep and write CSV/SVG")
    s.add_argument("--code", default="five_qubit",
                   choices=["five_qubit", "steane", "shor", "random"])
    s.add_argument("--code-n", type=int, default=6, help="qubits of a random code")
    s.add_argument("--code-k", type=int, default=2, help="logical qubits of a random code")
    s.add_argument("--seed", type=int, default=0, help="seed of a random code")
    s.add_argument("--channel", default="ampdamp", choices=["ampdamp", "purestates", "depolarizing"])
    s.add_argument("--grid", type=_grid, default=(),
                   help="noise values as start:stop:step or a,b,c (default per channel)")
    s.add_argument("--theta", type=float, default=DEFAULT_THETA,
                   help="separation angle of the pure-state rotation channel")
    s.add_argument("--methods", type=_csv_list, default=("baseline", "qec", "eigqer"),
                   help="comma list from baseline, qec, eigqer, blockeig:M, orderqer:1+2, optimal")
    s.add_argument("--bounds", type=_csv_list, default=(),
                   help="comma list from gersgorin, svd, iterative:lambda_max, "
                        "iterative:block_sdp:M, iterated_block:M, pauli_cert, sdp_dual")
    s.add_argument("--early-stop", type=float, default=1e-5,
                   help="EigQER early-stop contribution (0 runs to completion)")
    s.add_argument("--tol", type=float, default=1e-8, help="dual feasibility tolerance")
    s.add_argument("--csv", required=True, help="output CSV path")
    s.add_argument("--chart", help="output SVG path")
    s.add_argument("--workers", type=int, default=available_workers())
    s.add_argument("--force-large-sdp", action="store_true",
                   help="allow the full-space SDP on codes with 7 or more qubits")
    s.add_argument("--record-timings", action="store_true",
                   help="fill the seconds column (makes the CSV run-dependent)")
    s.add_argument("-v", "--verbose", action="store_true")
    return p


def spec_from_args(args) -> ExperimentSpec:
    return ExperimentSpec(
        code=args.code, channel=args.channel, values=tuple(args.grid), methods=tuple(args.methods),
        bounds=tuple(args.bounds), theta=args.theta, code_n=args.code_n, code_k=args.code_k,
        seed=args.seed, early_stop_contribution=args.early_stop,
        force_large_sdp=args.force_large_sdp, record_timings=args.record_timings,
        workers=args.workers, tol=args.tol,
    )


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors, 0 for --help/--version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        spec = spec_from_args(args).validate()
    except SpecError as exc:
        print(f"invalid spec: {exc}", file=sys.stderr)
        return EXIT_SPEC
    rows = run_sweep(spec)
    try:
        emit_csv(rows, args.csv)
        if args.chart:
            emit_chart(rows, args.chart)
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    failed = [r for r in rows if not r.ok]
    for r in failed:
        print(f"failed: {r.method} at {r.param_name}={r.param_value}: {r.error}", file=sys.stderr)
    bad = soundness_violations(rows)
    for v, upper, lower, a, b in bad:
        print(f"soundness: {upper}={a:.10g} < {lower}={b:.10g} at {v}", file=sys.stderr)
    print(f"{len(rows)} rows, {len(failed)} failed, {len(bad)} soundness violations -> {args.csv}")
    return EXIT_PARTIAL if failed or bad else EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Command-line front end: single-instance solving, experiment grids, and
autocorrelation support inspection.

Exit codes: 0 success, 1 usage/validation error, 2 I/O error,
3 infeasible support constraints.
"""

from __future__ import annotations

import argparse
import json
import os
import secrets
import sys
from pathlib import Path

import numpy as np

from .bench import ExperimentSpec, SpecValidationError, run_experiment, summarize, write_csv, write_summary
from .ensembles import Fourier1D
from .fienup import FienupConfig, sparse_fienup
from .search import gespar
from .signals import load_measurements, save_signal
from .support import (InfeasibleSupportError, UndersampledError,
                      autocorrelation, derive_supports, noisy_mode)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_INFEASIBLE = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the CLI contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="gespar",
                     description="Sparse phase retrieval from quadratic/Fourier-magnitude measurements")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="recover a sparse signal from a measurement file")
    solve.add_argument("measurements", help="JSON file {\"N\": ..., \"y\": [...]}")
    solve.add_argument("--n", type=int, required=True, help="native signal length")
    solve.add_argument("--s", type=int, required=True, help="sparsity budget")
    solve.add_argument("--tau", type=float, default=1e-4, help="success threshold on the unweighted objective")
    solve.add_argument("--iter", type=int, default=6400, dest="iters", help="total swap budget")
    solve.add_argument("--seed", type=int, default=None,
                       help="RNG seed (default: $GESPAR_SEED, else a fresh one, printed)")
    solve.add_argument("--method", choices=("gespar", "fienup"), default="gespar")
    solve.add_argument("--no-weighting", action="store_true", help="disable random measurement weights")
    solve.add_argument("--support-mode", choices=("auto", "autocorr", "none"), default="auto",
                       help="autocorrelation-derived supports, or none (noisy data); auto picks by N")
    solve.add_argument("--output", default="recovered.json", help="recovered-signal JSON path")
    solve.add_argument("--fienup-restarts", type=int, default=100)
    solve.add_argument("--fienup-iters", type=int, default=1000)

    bench = sub.add_parser("bench", help="run an experiment grid from a spec file")
    bench.add_argument("spec", help="experiment spec JSON")
    bench.add_argument("--csv", default=None, help="trial table output (default <spec>.trials.csv)")
    bench.add_argument("--summary", default=None, help="per-cell summary output (default <spec>.summary.json)")
    bench.add_argument("--workers", type=int, default=1, help="parallel trial workers")

    autoc = sub.add_parser("autocorr", help="print the autocorrelation and derived support sets")
    autoc.add_argument("measurements", help="JSON file {\"N\": ..., \"y\": [...]}")
    autoc.add_argument("--n", type=int, required=True, help="native signal length")
    autoc.add_argument("--zero-tol", type=float, default=1e-8, help="relative zero classification tolerance")
    return parser


def _fail(message: str, code: int) -> int:
    print(f"gespar: error: {message}", file=sys.stderr)
    return code


def _read_measurements(path):
    try:
        return load_measurements(path)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        raise _IoError(str(exc)) from exc


class _IoError(Exception):
    pass


def _resolve_seed(seed) -> int:
    if seed is not None:
        return int(seed)
    env = os.environ.get("GESPAR_SEED")
    if env is not None:
        return int(env)
    return secrets.randbits(63)


def _format_set(indices) -> str:
    return "{" + ", ".join(str(i) for i in indices) + "}"


def _cmd_solve(args) -> int:
    if args.n < 1:
        return _fail("--n must be positive", EXIT_USAGE)
    if args.s < 1:
        return _fail("--s must be positive", EXIT_USAGE)
    if args.tau <= 0:
        return _fail("--tau must be positive", EXIT_USAGE)
    if args.iters < 1:
        return _fail("--iter must be at least 1", EXIT_USAGE)
    y = _read_measurements(args.measurements)
    N = y.shape[0]
    if N < args.n:
        return _fail(f"measurement length N={N} is smaller than --n {args.n}", EXIT_USAGE)
    if args.s > args.n:
        return _fail(f"--s {args.s} exceeds --n {args.n}", EXIT_USAGE)

    seed = _resolve_seed(args.seed)
    print(f"seed = {seed}")
    rng = np.random.default_rng(seed)
    ensemble = Fourier1D(args.n, N)

    if args.method == "fienup":
        cfg = FienupConfig(args.s, args.fienup_iters, args.fienup_restarts)
        signal = sparse_fienup(y, args.n, N, cfg, rng)
        objective = ensemble.objective(signal.values, y)
        swaps = 0
        success = objective < args.tau
    else:
        mode = args.support_mode
        if mode == "auto":
            mode = "autocorr" if N >= 2 * args.n - 1 else "none"
        if mode == "autocorr":
            try:
                constraints = derive_supports(autocorrelation(y, args.n), args.s)
            except UndersampledError as exc:
                return _fail(str(exc), EXIT_USAGE)
        else:
            constraints = noisy_mode(args.n, args.s)
        result = gespar(ensemble, y, constraints, rng, tau=args.tau,
                        max_swaps=args.iters, weighting=not args.no_weighting)
        signal = result.x
        objective = result.objective_unweighted
        swaps = result.swaps_used
        success = result.success
        print(f"restarts = {result.restarts}")

    save_signal(args.output, signal)
    print(f"objective = {objective:.6e}")
    print(f"swaps = {swaps}")
    print(f"success = {str(bool(success)).lower()}")
    print(f"recovered signal written to {args.output}")
    return EXIT_OK


def _cmd_autocorr(args) -> int:
    if args.n < 1:
        return _fail("--n must be positive", EXIT_USAGE)
    y = _read_measurements(args.measurements)
    try:
        acf = autocorrelation(y, args.n, zero_tol=args.zero_tol)
    except UndersampledError as exc:
        return _fail(str(exc), EXIT_USAGE)
    try:
        constraints = derive_supports(acf, s=len(acf.lags))
    except ValueError as exc:
        return _fail(str(exc), EXIT_USAGE)
    lags = ", ".join(f"{v:.6g}" for v in acf.lags)
    print(f"autocorrelation lags 0..{args.n - 1}: [{lags}]")
    print(f"J1 = {_format_set(constraints.forced)}")
    print(f"J2 = {_format_set(constraints.candidates)}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    if args.workers < 1:
        return _fail("--workers must be at least 1", EXIT_USAGE)
    try:
        spec = ExperimentSpec.from_file(args.spec)
    except (OSError, json.JSONDecodeError) as exc:
        raise _IoError(str(exc)) from exc

    stem = Path(args.spec).stem
    csv_path = args.csv if args.csv else f"{stem}.trials.csv"
    summary_path = args.summary if args.summary else f"{stem}.summary.json"

    records = run_experiment(spec, workers=args.workers)
    write_csv(records, csv_path)
    write_summary(records, summary_path)

    header = f"{'method':<8} {'n':>5} {'N':>5} {'s':>3} {'snr_db':>7} {'trials':>6} {'success':>8} {'mean_nmse':>11} {'mean_swaps':>10} {'mean_time':>9}"
    print(header)
    for cell in summarize(records)["cells"]:
        rate = "-" if cell["success_rate"] is None else f"{cell['success_rate']:.2f}"
        snr = "-" if cell["snr_db"] is None else f"{cell['snr_db']:g}"
        print(f"{cell['method']:<8} {cell['n']:>5} {cell['N']:>5} {cell['s']:>3} {snr:>7} "
              f"{cell['trials']:>6} {rate:>8} {cell['mean_nmse']:>11.3e} "
              f"{cell['mean_swaps']:>10.1f} {cell['mean_time']:>9.3f}")
    print(f"trials written to {csv_path}; summary written to {summary_path}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "solve":
            return _cmd_solve(args)
        if args.command == "autocorr":
            return _cmd_autocorr(args)
        return _cmd_bench(args)
    except _IoError as exc:
        return _fail(str(exc), EXIT_IO)
    except InfeasibleSupportError as exc:
        return _fail(str(exc), EXIT_INFEASIBLE)
    except SpecValidationError as exc:
        return _fail(str(exc), EXIT_USAGE)
    except ValueError as exc:
        return _fail(str(exc), EXIT_USAGE)


if __name__ == "__main__":
    sys.exit(main())

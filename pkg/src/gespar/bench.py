"""Monte-Carlo benchmark harness: truth generation, noise, degeneracy-aware
success metrics, and reproducible experiment grids.

Recovery from Fourier magnitudes is only defined up to circular shift, global
sign, and mirroring (point reflection on 2-D grids), so reconstruction error
is the minimum NMSE over all such alignments.  Trials are seeded per
(cell, trial) with a stable hash, making every grid slice independently
reproducible and the records identical regardless of worker count.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ensembles import Fourier1D, Fourier2D
from .fienup import FienupConfig, sparse_fienup
from .search import gespar
from .signals import SparseSignal
from .support import InfeasibleSupportError, autocorrelation, derive_supports, noisy_mode

__all__ = [
    "ExperimentSpec",
    "SpecValidationError",
    "TrialRecord",
    "add_noise",
    "aligned_nmse",
    "aligned_nmse_grid",
    "bundled_spec_path",
    "equivalent_up_to_degeneracies",
    "generate_truth",
    "run_experiment",
    "summarize",
    "write_csv",
    "write_summary",
]

SUCCESS_TOL = 1e-3

CSV_COLUMNS = ("seed", "n", "N", "s", "snr_db", "method", "success", "nmse", "swaps", "wall_time")

_METHODS = ("gespar", "fienup")
_KINDS = ("fourier1d", "fourier2d")


@dataclass(frozen=True)
class TrialRecord:
    seed: int
    n: int
    N: int
    s: int
    snr_db: float | None
    method: str
    success: bool | None
    nmse: float
    swaps: int
    wall_time: float


class SpecValidationError(ValueError):
    """Invalid experiment spec; the message lists every offending field."""


def generate_truth(n: int, s: int, rng, N: int | None = None) -> SparseSignal:
    """Random s-sparse truth with magnitudes uniform on [3, 4], random signs.

    Index 1 always carries a nonzero (removes the shift degeneracy); the
    remaining s-1 support indices are drawn uniformly without replacement.
    """
    if not 1 <= s <= n:
        raise ValueError(f"need 1 <= s <= n, got s={s}, n={n}")
    idx = np.concatenate([[0], 1 + rng.choice(n - 1, size=s - 1, replace=False)]) \
        if s > 1 else np.array([0])
    values = np.zeros(n)
    values[idx] = rng.uniform(3.0, 4.0, size=s) * rng.choice([-1.0, 1.0], size=s)
    return SparseSignal(values, n, n if N is None else int(N))


def add_noise(y, snr_db, rng) -> np.ndarray:
    """White Gaussian noise scaled so the realized SNR is exactly ``snr_db`` dB.

    SNR = 20 log10(||y|| / ||v||).  ``None`` or infinite SNR returns a copy.
    """
    y = np.asarray(y, dtype=float)
    if snr_db is None or np.isinf(snr_db):
        return y.copy()
    norm_y = float(np.linalg.norm(y))
    if norm_y == 0.0:
        raise ValueError("cannot set an SNR for all-zero measurements")
    v = rng.standard_normal(y.shape[0])
    v *= norm_y / (10.0 ** (snr_db / 20.0) * np.linalg.norm(v))
    return y + v


def _best_corr(x: np.ndarray, c: np.ndarray) -> float:
    """Max |circular cross-correlation| of two equal-length real vectors."""
    corr = np.fft.ifft(np.fft.fft(x) * np.conj(np.fft.fft(c))).real
    return float(np.max(np.abs(corr)))


def aligned_nmse(x_true: np.ndarray, x_hat: np.ndarray) -> float:
    """Minimal ||x - T(x_hat)|| / ||x|| over sign, circular shift, and mirror.

    Both arguments are padded length-N vectors.
    """
    x = np.asarray(x_true, dtype=float)
    c = np.asarray(x_hat, dtype=float)
    if x.shape != c.shape or x.ndim != 1:
        raise ValueError("aligned_nmse needs two equal-length 1-D vectors")
    nx = float(np.linalg.norm(x))
    if nx == 0.0:
        raise ValueError("reference signal is identically zero")
    mirrored = np.roll(c[::-1], 1)
    sq = float(np.dot(x, x) + np.dot(c, c))
    best = min(sq - 2.0 * _best_corr(x, c), sq - 2.0 * _best_corr(x, mirrored))
    return math.sqrt(max(best, 0.0)) / nx


def aligned_nmse_grid(x_true: np.ndarray, x_hat: np.ndarray) -> float:
    """2-D variant: sign, per-axis circular shifts, and point reflection."""
    X = np.asarray(x_true, dtype=float)
    C = np.asarray(x_hat, dtype=float)
    if X.shape != C.shape or X.ndim != 2:
        raise ValueError("aligned_nmse_grid needs two equal-shape 2-D grids")
    nx = float(np.linalg.norm(X))
    if nx == 0.0:
        raise ValueError("reference signal is identically zero")

    def best_corr2(a, b):
        corr = np.fft.ifft2(np.fft.fft2(a) * np.conj(np.fft.fft2(b))).real
        return float(np.max(np.abs(corr)))

    reflected = np.roll(C[::-1, ::-1], (1, 1), axis=(0, 1))
    sq = float(np.sum(X * X) + np.sum(C * C))
    best = min(sq - 2.0 * best_corr2(X, C), sq - 2.0 * best_corr2(X, reflected))
    return math.sqrt(max(best, 0.0)) / nx


def equivalent_up_to_degeneracies(x_true, x_hat, N: int | None = None,
                                  tol: float = SUCCESS_TOL) -> tuple[bool, float]:
    """Whether two padded vectors agree up to the trivial degeneracies.

    Returns ``(equivalent, aligned_nmse)``.  Vectors shorter than ``N`` are
    zero-padded first.
    """
    x = np.asarray(x_true, dtype=float)
    c = np.asarray(x_hat, dtype=float)
    if N is not None:
        x = np.concatenate([x, np.zeros(N - x.shape[0])])
        c = np.concatenate([c, np.zeros(N - c.shape[0])])
    nmse = aligned_nmse(x, c)
    return bool(nmse <= tol), nmse


@dataclass(frozen=True)
class ExperimentSpec:
    """Finite experiment grid over (method, n, N, s, snr_db).

    Solver parameters (tau, max swaps, weighting, support mode) are scalars
    for the whole grid; the mandated CSV row schema cannot distinguish cells
    that differ only in those, so sweeps over them are separate spec files.
    """

    base_seed: int
    trials: int
    methods: tuple[str, ...] = ("gespar",)
    kind: str = "fourier1d"
    n: tuple[int, ...] = (64,)
    N: tuple[int, ...] = (128,)
    s: tuple[int, ...] = (3,)
    snr_db: tuple[float | None, ...] = (None,)
    tau: float = 1e-4
    iters: int = 6400
    weighting: bool = True
    support_mode: str = "autocorr"
    solver_s: int | None = None
    fienup_max_iters: int = 1000
    fienup_restarts: int = 100

    def cells(self) -> list[dict]:
        out = []
        for method in self.methods:
            for n in self.n:
                for N in self.N:
                    for s in self.s:
                        for snr in self.snr_db:
                            out.append({"method": method, "n": n, "N": N,
                                        "s": s, "snr_db": snr})
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentSpec":
        problems: list[str] = []

        def listy(key, default, cast):
            val = raw.get(key, default)
            if not isinstance(val, (list, tuple)):
                val = [val]
            out = []
            for item in val:
                try:
                    out.append(cast(item))
                except (TypeError, ValueError):
                    problems.append(f"{key}: cannot interpret {item!r}")
            return tuple(out)

        def scalar(key, default, cast):
            try:
                return cast(raw.get(key, default))
            except (TypeError, ValueError):
                problems.append(f"{key}: cannot interpret {raw.get(key)!r}")
                return default

        unknown = set(raw) - {
            "base_seed", "trials", "method", "methods", "kind", "n", "N", "s",
            "snr_db", "tau", "iter", "iters", "weighting", "support_mode",
            "solver_s", "fienup_max_iters", "fienup_restarts"}
        if unknown:
            problems.append(f"unknown keys: {sorted(unknown)}")

        base_seed = scalar("base_seed", 0, int)
        trials = scalar("trials", 0, int)
        if trials < 1:
            problems.append(f"trials: must be >= 1, got {raw.get('trials')!r}")
        methods = listy("methods" if "methods" in raw else "method", ["gespar"], str)
        for m in methods:
            if m not in _METHODS:
                problems.append(f"method: unknown method {m!r} (choose from {_METHODS})")
        kind = scalar("kind", "fourier1d", str)
        if kind not in _KINDS:
            problems.append(f"kind: unknown kind {kind!r} (choose from {_KINDS})")
        ns = listy("n", [64], int)
        Ns = listy("N", [128], int)
        ss = listy("s", [3], int)
        snrs = listy("snr_db", [None], lambda v: None if v is None else float(v))
        tau = scalar("tau", 1e-4, float)
        if tau <= 0:
            problems.append(f"tau: must be positive, got {raw.get('tau')!r}")
        iters = scalar("iter" if "iter" in raw else "iters", 6400, int)
        if iters < 1:
            problems.append(f"iter: must be >= 1, got {iters!r}")
        weighting = bool(raw.get("weighting", True))
        support_mode = scalar("support_mode", "autocorr", str)
        if support_mode not in ("autocorr", "none"):
            problems.append(f"support_mode: must be 'autocorr' or 'none', got {support_mode!r}")
        solver_s = raw.get("solver_s")
        if solver_s is not None:
            solver_s = scalar("solver_s", None, int)
            if solver_s is not None and solver_s < 1:
                problems.append("solver_s: must be >= 1 when given")
        fienup_max_iters = scalar("fienup_max_iters", 1000, int)
        fienup_restarts = scalar("fienup_restarts", 100, int)

        for v in ns + Ns + ss:
            if v < 1:
                problems.append(f"grid values must be positive, got {v}")
                break
        for n in ns:
            for N in Ns:
                if N < n:
                    problems.append(f"N={N} < n={n}: measurements cannot be shorter than the signal")
                if support_mode == "autocorr" and N < 2 * n - 1:
                    problems.append(f"support_mode=autocorr needs N >= 2n-1, got n={n}, N={N}")
                if kind == "fourier2d":
                    if N != n:
                        problems.append(f"fourier2d runs without oversampling (N == n), got n={n}, N={N}")
                    if math.isqrt(n) ** 2 != n:
                        problems.append(f"fourier2d needs a square grid, got n={n}")
        if support_mode == "autocorr" and any(v is not None for v in snrs):
            problems.append("support_mode=autocorr is only valid for noiseless cells "
                            "(autocorrelation zeros are meaningless under noise)")

        if problems:
            raise SpecValidationError("invalid experiment spec:\n  " + "\n  ".join(problems))
        return cls(base_seed, trials, tuple(methods), kind, ns, Ns, ss, snrs,
                   tau, iters, weighting, support_mode, solver_s,
                   fienup_max_iters, fienup_restarts)

    @classmethod
    def from_file(cls, path) -> "ExperimentSpec":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def bundled_spec_path(name: str) -> Path:
    """Path of a spec shipped with the package, e.g. ``fig2_desk``."""
    path = Path(__file__).parent / "specs" / f"{name}.json"
    if not path.exists():
        raise FileNotFoundError(f"no bundled spec named {name!r}")
    return path


def _trial_seed(base_seed: int, kind: str, cell: dict, trial: int) -> int:
    """Stable 63-bit instance seed; identical for every method on the cell."""
    key = json.dumps([base_seed, kind, cell["n"], cell["N"], cell["s"],
                      cell["snr_db"], trial], separators=(",", ":"))
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], "big") >> 1


def _make_ensemble(kind: str, n: int, N: int):
    if kind == "fourier2d":
        m = math.isqrt(n)
        return Fourier2D((m, m))
    return Fourier1D(n, N)


def _run_trial(task: dict) -> TrialRecord:
    n, N, s = task["n"], task["N"], task["s"]
    snr_db, method, kind = task["snr_db"], task["method"], task["kind"]
    seed = task["seed"]
    s_solver = task["solver_s"] or s

    rng_inst = np.random.default_rng(seed)
    truth = generate_truth(n, s, rng_inst, N=N)
    ensemble = _make_ensemble(kind, n, N)
    y = ensemble.forward(truth.values)
    if snr_db is not None:
        y = add_noise(y, snr_db, rng_inst)

    rng_solver = np.random.default_rng([seed, _METHODS.index(method)])
    start = time.perf_counter()
    try:
        if method == "gespar":
            if task["support_mode"] == "autocorr":
                constraints = derive_supports(autocorrelation(y, n), s_solver)
            else:
                constraints = noisy_mode(n, s_solver)
            res = gespar(ensemble, y, constraints, rng_solver, tau=task["tau"],
                         max_swaps=task["iters"], weighting=task["weighting"])
            x_hat, swaps = res.x.values, res.swaps_used
        else:
            cfg = FienupConfig(s_solver, task["fienup_max_iters"], task["fienup_restarts"])
            x_hat, swaps = sparse_fienup(y, n, N, cfg, rng_solver).values, 0
    except InfeasibleSupportError:
        wall = time.perf_counter() - start
        return TrialRecord(seed, n, N, s, snr_db, method,
                           False if snr_db is None else None,
                           float("nan"), 0, wall)
    wall = time.perf_counter() - start

    if kind == "fourier2d":
        m = math.isqrt(n)
        nmse = aligned_nmse_grid(truth.values.reshape(m, m), x_hat.reshape(m, m))
    else:
        pad = np.zeros(N - n)
        nmse = aligned_nmse(np.concatenate([truth.values, pad]),
                            np.concatenate([x_hat, pad]))
    success = (nmse <= SUCCESS_TOL) if snr_db is None else None
    return TrialRecord(seed, n, N, s, snr_db, method, success, float(nmse),
                       int(swaps), wall)


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> list[TrialRecord]:
    """Run every (cell, trial) of the grid; records come back in grid order
    regardless of worker count."""
    tasks = []
    for cell in spec.cells():
        for trial in range(spec.trials):
            tasks.append({**cell,
                          "kind": spec.kind,
                          "seed": _trial_seed(spec.base_seed, spec.kind, cell, trial),
                          "tau": spec.tau,
                          "iters": spec.iters,
                          "weighting": spec.weighting,
                          "support_mode": spec.support_mode,
                          "solver_s": spec.solver_s,
                          "fienup_max_iters": spec.fienup_max_iters,
                          "fienup_restarts": spec.fienup_restarts})
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_trial, tasks, chunksize=1))
    return [_run_trial(t) for t in tasks]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(records, path, mask_time: bool = False) -> None:
    """One record per row in the stable column order.

    ``mask_time`` writes the wall_time column as empty; timing is the one
    field that cannot be byte-reproducible across runs.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for r in records:
            row = [_fmt(r.seed), _fmt(r.n), _fmt(r.N), _fmt(r.s), _fmt(r.snr_db),
                   r.method, _fmt(r.success), _fmt(r.nmse), _fmt(r.swaps),
                   "" if mask_time else f"{r.wall_time:.6f}"]
            fh.write(",".join(row) + "\n")


def summarize(records) -> dict:
    """Per-cell aggregates in first-seen cell order."""
    groups: dict[tuple, list[TrialRecord]] = {}
    for r in records:
        groups.setdefault((r.method, r.n, r.N, r.s, r.snr_db), []).append(r)
    cells = []
    for (method, n, N, s, snr_db), rows in groups.items():
        noisy = snr_db is not None
        cells.append({
            "method": method, "n": n, "N": N, "s": s, "snr_db": snr_db,
            "trials": len(rows),
            "success_rate": None if noisy else float(np.mean([bool(r.success) for r in rows])),
            "mean_nmse": float(np.mean([r.nmse for r in rows])),
            "mean_swaps": float(np.mean([r.swaps for r in rows])),
            "mean_time": float(np.mean([r.wall_time for r in rows])),
        })
    return {"cells": cells}


def write_summary(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summarize(records), fh, indent=2)
        fh.write("\n")

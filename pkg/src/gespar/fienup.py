"""Sparsity-constrained Fienup error reduction, used as a comparison baseline.

Classic alternating projections: impose the measured Fourier magnitudes,
inverse transform, take the real part, then project onto the constraint set
(support inside the native window, at most s nonzeros, keeping the largest
magnitudes).  Restarted from random initial points; the restart with the
smallest unweighted objective wins.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signals import SparseSignal

__all__ = ["FienupConfig", "sparse_fienup"]

FIXED_POINT_TOL = 1e-8


@dataclass(frozen=True)
class FienupConfig:
    """Sparsity budget, per-restart iteration cap, and restart count."""

    s: int
    max_iters: int = 1000
    restarts: int = 100

    def __post_init__(self):
        if self.s < 1 or self.max_iters < 1 or self.restarts < 1:
            raise ValueError("s, max_iters, and restarts must be positive")


def _project(v: np.ndarray, n: int, s: int) -> np.ndarray:
    """Zero everything outside the native window, keep the s largest magnitudes."""
    out = np.zeros_like(v)
    head = v[:n]
    if s < n:
        keep = np.argsort(-np.abs(head), kind="stable")[:s]
    else:
        keep = np.arange(n)
    out[keep] = head[keep]
    return out


def sparse_fienup(y, n: int, N: int, config: FienupConfig, rng) -> SparseSignal:
    """Recover an s-sparse signal from Fourier magnitude-squared measurements.

    Negative (noisy) measurement entries are treated as zero magnitude.
    Each restart runs until a fixed point or ``max_iters``; the result with
    the minimal sum of squared measurement residuals is returned.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (N,):
        raise ValueError(f"y has shape {y.shape}, expected ({N},)")
    if N < n:
        raise ValueError(f"N={N} must be >= n={n}")
    root = np.sqrt(np.maximum(y, 0.0))

    best_x = None
    best_f = np.inf
    for _ in range(config.restarts):
        x = np.zeros(N)
        x[:n] = rng.standard_normal(n)
        x = _project(x, n, config.s)
        for _ in range(config.max_iters):
            fx = np.fft.fft(x)
            # impose measured magnitudes, keep phases (phase of 0 is 1)
            x_new = _project(np.fft.ifft(root * np.exp(1j * np.angle(fx))).real, n, config.s)
            delta = float(np.linalg.norm(x_new - x))
            x = x_new
            if delta < FIXED_POINT_TOL:
                break
        r = np.abs(np.fft.fft(x)) ** 2 - y
        f = float(np.dot(r, r))
        if f < best_f:
            best_f = f
            best_x = x
    return SparseSignal(best_x[:n], n, N)

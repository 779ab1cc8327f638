"""Autocorrelation of the signal from its Fourier magnitudes, and the
support constraint sets it implies.

With N >= 2n-1 measurements the inverse DFT of y recovers the (circularly
arranged) autocorrelation sequence g_m = sum_i x_i x_{i+m}.  Assuming no
support cancellations (true with probability 1 for random amplitudes), the
zero pattern of g pins down two constraint sets: indices forced into the
support (index 1 by the shift convention, plus the index matching the last
nonzero lag) and the candidate indices k with g_{k-1} != 0.  All indices are
1-based.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Autocorrelation",
    "InfeasibleSupportError",
    "SupportConstraints",
    "UndersampledError",
    "autocorrelation",
    "derive_supports",
    "noisy_mode",
]

DEFAULT_ZERO_TOL = 1e-8


class UndersampledError(ValueError):
    """Raised when N < 2n-1, too few measurements for the autocorrelation."""


class InfeasibleSupportError(ValueError):
    """Raised when no support of the requested sparsity satisfies the constraints."""


@dataclass(frozen=True)
class SupportConstraints:
    """Constraint sets for the support search.

    ``forced`` (J1) must be contained in every candidate support, ``candidates``
    (J2) must contain it, and ``s`` is the sparsity budget.  Indices are
    1-based; |forced| <= s <= |candidates| is enforced at construction.
    """

    forced: tuple[int, ...]
    candidates: tuple[int, ...]
    s: int

    def __post_init__(self):
        forced = tuple(sorted(set(int(k) for k in self.forced)))
        candidates = tuple(sorted(set(int(k) for k in self.candidates)))
        object.__setattr__(self, "forced", forced)
        object.__setattr__(self, "candidates", candidates)
        if forced and forced[0] < 1:
            raise ValueError("support indices are 1-based")
        if not set(forced) <= set(candidates):
            raise ValueError(f"forced set {forced} is not contained in candidates {candidates}")
        if not (len(forced) <= self.s <= len(candidates)):
            raise InfeasibleSupportError(
                f"sparsity s={self.s} infeasible for |forced|={len(forced)}, "
                f"|candidates|={len(candidates)}")


@dataclass(frozen=True)
class Autocorrelation:
    """One-sided autocorrelation lags g_0..g_{n-1} (g_{-m} = g_m by symmetry).

    ``zero_tol`` classifies entries as zero relative to max|g|.
    """

    lags: np.ndarray
    zero_tol: float = DEFAULT_ZERO_TOL

    def __post_init__(self):
        object.__setattr__(self, "lags", np.asarray(self.lags, dtype=float))
        if self.zero_tol < 0:
            raise ValueError("zero_tol must be nonnegative")

    def nonzero_mask(self) -> np.ndarray:
        scale = float(np.max(np.abs(self.lags))) if self.lags.size else 0.0
        return np.abs(self.lags) > self.zero_tol * scale

    def symmetric(self) -> np.ndarray:
        """Lag-symmetric arrangement g_{-(n-1)}..g_{n-1} (length 2n-1)."""
        return np.concatenate([self.lags[::-1], self.lags[1:]])


def autocorrelation(y, n: int, zero_tol: float = DEFAULT_ZERO_TOL) -> Autocorrelation:
    """Autocorrelation lags 0..n-1 read off the inverse DFT of ``y``.

    Requires N >= 2n-1 so that the circular autocorrelation of the padded
    signal agrees with the linear one at the retained lags; extra lags beyond
    n-1 are ignored.
    """
    y = np.asarray(y, dtype=float)
    N = y.shape[0]
    if N < 2 * n - 1:
        raise UndersampledError(
            f"N={N} < 2n-1={2 * n - 1}: too few measurements for the autocorrelation")
    g = np.fft.ifft(y).real[:n]
    return Autocorrelation(g, zero_tol)


def derive_supports(acf: Autocorrelation, s: int) -> SupportConstraints:
    """Forced and candidate support sets from the autocorrelation zero pattern.

    Index 1 is assumed in the support (removes the shift degeneracy), hence the
    index 1 + argmax{m : g_m != 0} is forced in as well.  Candidates are all k
    with g_{k-1} != 0.  Noiseless regime only; with noise use :func:`noisy_mode`.
    """
    mask = acf.nonzero_mask()
    if not mask.any():
        raise ValueError("autocorrelation is identically zero (zero signal)")
    last = int(np.flatnonzero(mask)[-1])
    forced = (1, 1 + last)
    candidates = tuple(int(k) + 1 for k in np.flatnonzero(mask))
    return SupportConstraints(forced, candidates, s)


def noisy_mode(n: int, s: int) -> SupportConstraints:
    """Constraints that ignore autocorrelation information: only index 1 forced."""
    if n < 1:
        raise ValueError("n must be positive")
    return SupportConstraints((1,), tuple(range(1, n + 1)), s)

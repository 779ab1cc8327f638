"""Signal and measurement containers plus their JSON file formats.

Signals are real vectors with ``n`` native samples that enter the measurement
model after zero-padding to length ``N``.  Measurement vectors are plain
1-D float arrays of squared transform magnitudes; noisy measurements may
contain negative entries and are accepted unchanged.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SparseSignal",
    "load_measurements",
    "load_signal",
    "save_measurements",
    "save_signal",
]


@dataclass(frozen=True)
class SparseSignal:
    """Real vector of native length ``n``, zero-padded to length ``N >= n``.

    Instances are immutable after construction and safe to share across
    concurrent workers.
    """

    values: np.ndarray
    n: int
    N: int

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1:
            raise ValueError("signal values must be a one-dimensional real vector")
        if not np.all(np.isfinite(vals)):
            raise ValueError("signal values must be finite")
        if self.n != vals.shape[0]:
            raise ValueError(f"n={self.n} does not match len(values)={vals.shape[0]}")
        if self.N < self.n:
            raise ValueError(f"padded length N={self.N} must be >= n={self.n}")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_values(cls, values, N: int | None = None) -> "SparseSignal":
        vals = np.asarray(values, dtype=float)
        n = vals.shape[0]
        return cls(vals, n, n if N is None else int(N))

    def padded(self) -> np.ndarray:
        """The length-``N`` embedding with zeros beyond the native part."""
        out = np.zeros(self.N)
        out[: self.n] = self.values
        return out

    def nnz(self, tol: float = 0.0) -> int:
        return int(np.count_nonzero(np.abs(self.values) > tol))

    def support(self, tol: float = 0.0) -> tuple[int, ...]:
        """1-based indices of entries with magnitude above ``tol``."""
        return tuple(int(k) + 1 for k in np.flatnonzero(np.abs(self.values) > tol))


def save_signal(path, signal: SparseSignal) -> None:
    """Write a signal as ``{"n": ..., "N": ..., "values": [...]}``."""
    payload = {"n": signal.n, "N": signal.N, "values": [float(v) for v in signal.values]}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_signal(path) -> SparseSignal:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    try:
        return SparseSignal(np.asarray(payload["values"], dtype=float),
                            int(payload["n"]), int(payload["N"]))
    except KeyError as exc:
        raise ValueError(f"signal file {path} is missing key {exc}") from exc


def save_measurements(path, y) -> None:
    """Write measurements as ``{"N": ..., "y": [...]}``."""
    y = np.asarray(y, dtype=float)
    payload = {"N": int(y.shape[0]), "y": [float(v) for v in y]}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_measurements(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    try:
        y = np.asarray(payload["y"], dtype=float)
        declared = int(payload["N"])
    except KeyError as exc:
        raise ValueError(f"measurement file {path} is missing key {exc}") from exc
    if y.ndim != 1 or y.shape[0] != declared:
        raise ValueError(f"measurement file {path}: N={declared} does not match len(y)={y.shape[0]}")
    return y

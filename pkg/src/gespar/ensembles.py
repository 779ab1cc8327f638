"""Measurement ensembles: quadratic maps y_i = x^T A_i x and their objectives.

Four ensemble kinds are provided:

* ``fourier1d`` -- squared magnitudes of an N-point DFT of the zero-padded
  signal.  A_i is never materialized; forward map, objective, and gradient go
  through the FFT.
* ``fourier2d`` -- same on a 2-D grid (signals stored flattened row-major).
* ``dictionary`` -- sensing vectors composed with a sparsity basis,
  A_i = D^T phi_i phi_i^T D, applied through the effective sensing matrix.
* ``matrices`` -- explicit symmetric matrices, dense, for desk-scale use and
  as the independent oracle path for the FFT implementations.

Every ensemble exposes ``forward``, ``objective`` (optionally weighted),
``gradient``, and ``restricted(support)``, which produces the
support-restricted view consumed by the Gauss-Newton solver.  Support sets
use 1-based indices throughout.
"""

from __future__ import annotations

import numpy as np

from .signals import SparseSignal

__all__ = [
    "DictionaryEnsemble",
    "ExplicitMatrices",
    "Fourier1D",
    "Fourier2D",
    "Rank2Restricted",
    "DenseRestricted",
    "embed",
    "fourier_magnitudes",
    "fourier_matrices",
    "quadratic_forward",
]


def _as_vector(x, n: int, name: str = "x") -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.shape != (n,):
        raise ValueError(f"{name} has shape {arr.shape}, expected ({n},)")
    return arr


def _check_weights(w, N: int):
    if w is None:
        return None
    w = np.asarray(w, dtype=float)
    if w.shape != (N,):
        raise ValueError(f"weights have shape {w.shape}, expected ({N},)")
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    return w


def _support_indices(support, n: int) -> np.ndarray:
    """Validate a 1-based support set; return sorted 0-based indices."""
    idx = sorted(set(int(k) for k in support))
    if not idx:
        raise ValueError("support set is empty")
    if idx[0] < 1 or idx[-1] > n:
        raise ValueError(f"support indices must lie in 1..{n}, got {idx}")
    return np.asarray(idx, dtype=np.intp) - 1


def embed(z, support, n: int) -> np.ndarray:
    """Embed restricted values ``z`` at 1-based ``support`` into a length-``n`` vector."""
    idx = _support_indices(support, n)
    z = np.asarray(z, dtype=float)
    if z.shape != (idx.shape[0],):
        raise ValueError(f"z has shape {z.shape}, expected ({idx.shape[0]},)")
    x = np.zeros(n)
    x[idx] = z
    return x


class Rank2Restricted:
    """Support-restricted quadratic map in factored form.

    Stores real factors C, D (N x s) with z^T B_i z = (Cz)_i^2 + (Dz)_i^2,
    i.e. B_i = C_i^T C_i + D_i^T D_i.  This covers every ensemble whose A_i
    come from (possibly complex) sensing rows; it is the representation the
    compiled kernel consumes.
    """

    rank2 = True

    def __init__(self, C: np.ndarray, D: np.ndarray, support):
        self.C = np.ascontiguousarray(C, dtype=float)
        self.D = np.ascontiguousarray(D, dtype=float)
        if self.C.shape != self.D.shape or self.C.ndim != 2:
            raise ValueError("C and D must be equal-shape 2-D arrays")
        self.support = tuple(int(k) for k in support)
        self.N, self.size = self.C.shape

    def quad(self, z) -> np.ndarray:
        """z^T B_i z for every measurement i."""
        cz = self.C @ z
        dz = self.D @ z
        return cz * cz + dz * dz

    def jacobian(self, z) -> np.ndarray:
        """Rows 2 (B_i z)^T of the residual Jacobian."""
        cz = self.C @ z
        dz = self.D @ z
        return 2.0 * (self.C * cz[:, None] + self.D * dz[:, None])

    def b_matrices(self) -> np.ndarray:
        """Materialize the B_i stack (tests/oracles only)."""
        return (np.einsum("ij,ik->ijk", self.C, self.C)
                + np.einsum("ij,ik->ijk", self.D, self.D))


class DenseRestricted:
    """Support-restricted quadratic map with explicit s x s matrices."""

    rank2 = False

    def __init__(self, B: np.ndarray, support):
        self.B = np.asarray(B, dtype=float)
        if self.B.ndim != 3 or self.B.shape[1] != self.B.shape[2]:
            raise ValueError("B must be a stack of square matrices")
        self.support = tuple(int(k) for k in support)
        self.N = self.B.shape[0]
        self.size = self.B.shape[1]

    def quad(self, z) -> np.ndarray:
        return np.einsum("ijk,j,k->i", self.B, z, z)

    def jacobian(self, z) -> np.ndarray:
        return 2.0 * np.einsum("ijk,k->ij", self.B, z)

    def b_matrices(self) -> np.ndarray:
        return self.B.copy()


class _QuadraticEnsemble:
    """Shared objective/gradient plumbing; subclasses provide the transforms."""

    kind = "abstract"
    n = 0
    N = 0

    def forward(self, x) -> np.ndarray:
        raise NotImplementedError

    def gradient(self, x, y, w=None) -> np.ndarray:
        raise NotImplementedError

    def restricted(self, support):
        raise NotImplementedError

    def objective(self, x, y, w=None) -> float:
        """Weighted sum of squared residuals sum_i w_i (x^T A_i x - y_i)^2."""
        y = _as_vector(y, self.N, "y")
        w = _check_weights(w, self.N)
        r = self.forward(x) - y
        if w is None:
            return float(np.dot(r, r))
        return float(np.dot(w * r, r))

    def _check_xy(self, x, y, w):
        return (_as_vector(x, self.n),
                _as_vector(y, self.N, "y"),
                _check_weights(w, self.N))


class Fourier1D(_QuadraticEnsemble):
    """Squared magnitudes of the unnormalized N-point DFT of the padded signal."""

    kind = "fourier1d"

    def __init__(self, n: int, N: int | None = None):
        n = int(n)
        N = n if N is None else int(N)
        if n < 1:
            raise ValueError("n must be positive")
        if N < n:
            raise ValueError(f"N={N} must be >= n={n}")
        self.n = n
        self.N = N

    def forward(self, x) -> np.ndarray:
        x = _as_vector(x, self.n)
        fx = np.fft.fft(x, n=self.N)
        return np.abs(fx) ** 2

    def gradient(self, x, y, w=None) -> np.ndarray:
        x, y, w = self._check_xy(x, y, w)
        fx = np.fft.fft(x, n=self.N)
        r = np.abs(fx) ** 2 - y
        if w is not None:
            r = w * r
        g = 4.0 * self.N * np.fft.ifft(r * fx).real
        return g[: self.n]

    def restricted(self, support) -> Rank2Restricted:
        idx = _support_indices(support, self.n)
        ang = (-2.0 * np.pi / self.N) * np.outer(np.arange(self.N), idx)
        return Rank2Restricted(np.cos(ang), np.sin(ang), np.asarray(idx) + 1)


class Fourier2D(_QuadraticEnsemble):
    """Squared magnitudes of a 2-D DFT; signals are flattened row-major."""

    kind = "fourier2d"

    def __init__(self, grid_shape, fft_shape=None):
        m1, m2 = (int(v) for v in grid_shape)
        M1, M2 = (m1, m2) if fft_shape is None else (int(fft_shape[0]), int(fft_shape[1]))
        if m1 < 1 or m2 < 1:
            raise ValueError("grid_shape must be positive")
        if M1 < m1 or M2 < m2:
            raise ValueError("fft_shape must cover grid_shape on both axes")
        self.grid_shape = (m1, m2)
        self.fft_shape = (M1, M2)
        self.n = m1 * m2
        self.N = M1 * M2

    def forward(self, x) -> np.ndarray:
        x = _as_vector(x, self.n)
        FX = np.fft.fft2(x.reshape(self.grid_shape), s=self.fft_shape)
        return (np.abs(FX) ** 2).ravel()

    def gradient(self, x, y, w=None) -> np.ndarray:
        x, y, w = self._check_xy(x, y, w)
        FX = np.fft.fft2(x.reshape(self.grid_shape), s=self.fft_shape)
        R = np.abs(FX) ** 2 - y.reshape(self.fft_shape)
        if w is not None:
            R = w.reshape(self.fft_shape) * R
        G = 4.0 * self.N * np.fft.ifft2(R * FX).real
        m1, m2 = self.grid_shape
        return G[:m1, :m2].ravel()

    def restricted(self, support) -> Rank2Restricted:
        idx = _support_indices(support, self.n)
        m2 = self.grid_shape[1]
        M1, M2 = self.fft_shape
        u = np.arange(M1)
        v = np.arange(M2)
        cols = np.empty((self.N, idx.shape[0]), dtype=complex)
        for j, k0 in enumerate(idx):
            p, q = divmod(int(k0), m2)
            col = np.exp(-2j * np.pi * (u * p) / M1)[:, None] * np.exp(-2j * np.pi * (v * q) / M2)[None, :]
            cols[:, j] = col.ravel()
        return Rank2Restricted(cols.real, cols.imag, np.asarray(idx) + 1)


class DictionaryEnsemble(_QuadraticEnsemble):
    """Magnitude measurements |<phi_i, D z>|^2 of a basis-sparse signal.

    ``basis`` is the n x b dictionary D (``None`` for the identity) and
    ``vectors`` the N x n stack of sensing rows phi_i (real or complex).
    The unknown is the length-b coefficient vector; A_i = D^T phi_i phi_i^T D
    is applied through the effective sensing matrix phi @ D, never formed.
    """

    kind = "dictionary"

    def __init__(self, basis, vectors):
        vectors = np.asarray(vectors)
        if vectors.ndim != 2:
            raise ValueError("vectors must be a 2-D stack of sensing rows")
        if basis is None:
            eff = vectors
        else:
            basis = np.asarray(basis, dtype=float)
            if basis.ndim != 2 or basis.shape[0] != vectors.shape[1]:
                raise ValueError("basis shape is incompatible with the sensing rows")
            eff = vectors @ basis
        self._E = np.ascontiguousarray(eff, dtype=complex)
        self.N, self.n = self._E.shape

    @classmethod
    def from_vectors(cls, vectors) -> "DictionaryEnsemble":
        return cls(None, vectors)

    def forward(self, x) -> np.ndarray:
        x = _as_vector(x, self.n)
        return np.abs(self._E @ x) ** 2

    def gradient(self, x, y, w=None) -> np.ndarray:
        x, y, w = self._check_xy(x, y, w)
        ex = self._E @ x
        r = np.abs(ex) ** 2 - y
        if w is not None:
            r = w * r
        return 4.0 * np.real(self._E.conj().T @ (r * ex))

    def restricted(self, support) -> Rank2Restricted:
        idx = _support_indices(support, self.n)
        cols = self._E[:, idx]
        return Rank2Restricted(cols.real, cols.imag, np.asarray(idx) + 1)


class ExplicitMatrices(_QuadraticEnsemble):
    """Dense symmetric matrices A_i over the native indices (desk scale)."""

    kind = "matrices"

    def __init__(self, matrices):
        A = np.asarray(matrices, dtype=float)
        if A.ndim != 3 or A.shape[1] != A.shape[2]:
            raise ValueError("matrices must be a stack of square matrices")
        if not np.array_equal(A, A.transpose(0, 2, 1)):
            raise ValueError("every A_i must be symmetric")
        self._A = A
        self.N = A.shape[0]
        self.n = A.shape[1]

    @property
    def matrices(self) -> np.ndarray:
        return self._A

    def forward(self, x) -> np.ndarray:
        x = _as_vector(x, self.n)
        return np.einsum("ijk,j,k->i", self._A, x, x)

    def gradient(self, x, y, w=None) -> np.ndarray:
        x, y, w = self._check_xy(x, y, w)
        Ax = self._A @ x
        r = np.einsum("ij,j->i", Ax, x) - y
        if w is not None:
            r = w * r
        return 4.0 * (r @ Ax)

    def restricted(self, support) -> DenseRestricted:
        idx = _support_indices(support, self.n)
        B = self._A[np.ix_(np.arange(self.N), idx, idx)]
        return DenseRestricted(B, np.asarray(idx) + 1)


def fourier_magnitudes(signal: SparseSignal) -> np.ndarray:
    """Squared magnitudes of the N-point DFT of the zero-padded signal."""
    return Fourier1D(signal.n, signal.N).forward(signal.values)


def quadratic_forward(x, ensemble) -> np.ndarray:
    """y_i = x^T A_i x for every measurement of the ensemble."""
    return ensemble.forward(x)


def fourier_matrices(n: int, N: int) -> np.ndarray:
    """Explicit A_i built from DFT rows, restricted to the native n columns.

    A_i = Re(F_i)^T Re(F_i) + Im(F_i)^T Im(F_i); exactly symmetric by
    construction.  Oracle path for the FFT implementations.
    """
    F = np.exp(-2j * np.pi * np.outer(np.arange(N), np.arange(n)) / N)
    return (np.einsum("ij,ik->ijk", F.real, F.real)
            + np.einsum("ij,ik->ijk", F.imag, F.imag))

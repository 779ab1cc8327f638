"""Damped Gauss-Newton minimization of the support-restricted objective.

Minimizes g(z) = sum_i w_i (z^T B_i z - y_i)^2 over the restricted variable z.
Each iteration solves the linearized least-squares problem for the
Gauss-Newton direction (rank-revealing LAPACK solve with minimum-norm
fallback, rcond=1e-10), then backtracks from a doubling warm start until the
sufficient-decrease inequality

    g(z - t d) < g(z) - (t/2) grad g(z)^T d

holds.  Stops when the step norm falls below epsilon or the iteration cap is
reached.  Weights enter as fixed sqrt(w_i) row scalings of the Jacobian and
right-hand side.

Two interchangeable kernels run the loop: this module's NumPy implementation
and the compiled twin in ``gespar._core`` (rank-2 factored ensembles only),
selected through ``gespar.backend``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import backend

__all__ = [
    "DgnConfig",
    "DgnTrace",
    "backtrack",
    "dgn_solve",
    "dump_trace",
    "gn_direction",
]

LS_RCOND = 1e-10
LS_MAX_HALVINGS = 60

_REASONS = ("step_tol", "max_iters", "line_search_stall", "stationary")


@dataclass(frozen=True)
class DgnConfig:
    """Stopping parameters: step-norm threshold, iteration cap, stepsize memory."""

    epsilon: float = 1e-4
    max_iters: int = 100
    t0: float = 0.5

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not 0 < self.t0 <= 1:
            raise ValueError("t0 must lie in (0, 1]")


@dataclass
class DgnTrace:
    """Per-iteration diagnostics of one solve.

    Arrays hold one entry per accepted iteration: the objective after the
    step, the gradient norm and grad.d at the step's start point, the accepted
    stepsize, the step norm, the iterate norm, and the smallest singular value
    of the (weighted) Jacobian.  ``g_before(k)`` chains the objectives so the
    sufficient-decrease inequality can be re-verified verbatim.
    """

    g0: float
    g: np.ndarray = field(default_factory=lambda: np.empty(0))
    grad_norm: np.ndarray = field(default_factory=lambda: np.empty(0))
    grad_dot_d: np.ndarray = field(default_factory=lambda: np.empty(0))
    t: np.ndarray = field(default_factory=lambda: np.empty(0))
    step_norm: np.ndarray = field(default_factory=lambda: np.empty(0))
    z_norm: np.ndarray = field(default_factory=lambda: np.empty(0))
    min_singular: np.ndarray = field(default_factory=lambda: np.empty(0))
    reason: str = "max_iters"

    @property
    def iterations(self) -> int:
        return int(self.g.shape[0])

    def g_before(self, k: int) -> float:
        """Objective at the start of (0-based) iteration ``k``."""
        return float(self.g0 if k == 0 else self.g[k - 1])

    def g_final(self) -> float:
        return float(self.g[-1]) if self.iterations else float(self.g0)


def dump_trace(trace: DgnTrace, fh) -> None:
    """Write one JSON line per iteration (k, g, grad_norm, t) to ``fh``."""
    for k in range(trace.iterations):
        fh.write(json.dumps({
            "k": k + 1,
            "g": float(trace.g[k]),
            "grad_norm": float(trace.grad_norm[k]),
            "t": float(trace.t[k]),
        }))
        fh.write("\n")


def _direction_pieces(restricted, z, y, sqrt_w):
    """Gauss-Newton pieces at z: direction, gradient, g(z), smallest sing. value."""
    q = restricted.quad(z)
    h = q - y
    J = restricted.jacobian(z)
    if sqrt_w is not None:
        J = J * sqrt_w[:, None]
        hw = sqrt_w * h
        b = sqrt_w * (q + y)
    else:
        hw = h
        b = q + y
    grad = 2.0 * (J.T @ hw)
    zt, _, _, sv = np.linalg.lstsq(J, b, rcond=LS_RCOND)
    d = z - zt
    smin = float(sv[-1]) if sv.size else 0.0
    return d, grad, float(np.dot(hw, hw)), smin


def gn_direction(restricted, z, y, w=None) -> np.ndarray:
    """Gauss-Newton direction d = z - argmin ||J ztilde - b||_2.

    J has rows sqrt(w_i) 2 (B_i z)^T and b entries sqrt(w_i) (y_i + z^T B_i z);
    when J^T J is singular the minimum-norm solution is taken.
    """
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    sqrt_w = None if w is None else np.sqrt(np.asarray(w, dtype=float))
    d, _, _, _ = _direction_pieces(restricted, z, y, sqrt_w)
    return d


def backtrack(g_eval, z, d, grad, t_prev, g_z=None, max_halvings=LS_MAX_HALVINGS):
    """Backtracking stepsize with doubling warm start u = min(2 t_prev, 1).

    Halves t until g(z - t d) < g(z) - (t/2) grad.d.  Returns
    (t, z_new, g_new); t is None when ``max_halvings`` halvings all fail
    (stepsize below machine granularity).
    """
    gdd = float(np.dot(grad, d))
    if g_z is None:
        g_z = float(g_eval(z))
    u = min(2.0 * t_prev, 1.0)
    t = u
    for _ in range(max_halvings + 1):
        z_new = z - t * d
        g_new = float(g_eval(z_new))
        if g_new < g_z - 0.5 * t * gdd:
            return t, z_new, g_new
        t *= 0.5
    return None, None, None


def _weighted_g(restricted, y, w):
    if w is None:
        def g_eval(z):
            r = restricted.quad(z) - y
            return float(np.dot(r, r))
    else:
        def g_eval(z):
            r = restricted.quad(z) - y
            return float(np.dot(w * r, r))
    return g_eval


def _solve_python(restricted, y, w, cfg):
    sqrt_w = None if w is None else np.sqrt(w)
    g_eval = _weighted_g(restricted, y, w)

    def loop(z0):
        z = z0.copy()
        g_z = g_eval(z)
        g0 = g_z
        t_prev = cfg.t0
        cols = [[] for _ in range(7)]
        reason = "max_iters"
        for _ in range(cfg.max_iters):
            d, grad, _, smin = _direction_pieces(restricted, z, y, sqrt_w)
            gdd = float(np.dot(grad, d))
            if not gdd > 0.0:
                reason = "stationary"
                break
            t, z_new, g_new = backtrack(g_eval, z, d, grad, t_prev, g_z=g_z)
            if t is None:
                reason = "line_search_stall"
                break
            step = float(np.linalg.norm(z_new - z))
            for col, val in zip(cols, (g_new, float(np.linalg.norm(grad)), gdd, t,
                                       step, float(np.linalg.norm(z_new)), smin)):
                col.append(val)
            z = z_new
            g_z = g_new
            t_prev = t
            if step < cfg.epsilon:
                reason = "step_tol"
                break
        trace = DgnTrace(g0, *(np.asarray(c) for c in cols), reason=reason)
        return z, trace

    return loop


def dgn_solve(restricted, y, w=None, config: DgnConfig | None = None,
              rng=None, z0=None, trace_file=None):
    """Minimize the weighted restricted objective from a random Gaussian start.

    ``restricted`` is a support-restricted ensemble view; ``z0`` defaults to a
    standard-normal draw from ``rng``.  Returns ``(z, DgnTrace)``.  When
    ``trace_file`` is given, per-iteration diagnostics are appended to it as
    JSON lines.
    """
    cfg = config if config is not None else DgnConfig()
    y = np.ascontiguousarray(y, dtype=float)
    if y.shape != (restricted.N,):
        raise ValueError(f"y has shape {y.shape}, expected ({restricted.N},)")
    if w is not None:
        w = np.ascontiguousarray(w, dtype=float)
        if w.shape != (restricted.N,):
            raise ValueError(f"weights have shape {w.shape}, expected ({restricted.N},)")
    if z0 is None:
        if rng is None:
            raise ValueError("dgn_solve needs an rng when z0 is not given")
        z0 = rng.standard_normal(restricted.size)
    z0 = np.ascontiguousarray(z0, dtype=float)
    if z0.shape != (restricted.size,):
        raise ValueError(f"z0 has shape {z0.shape}, expected ({restricted.size},)")

    if getattr(restricted, "rank2", False) and backend.use_compiled():
        z, trace = _solve_compiled(restricted, y, w, cfg, z0)
    else:
        z, trace = _solve_python(restricted, y, w, cfg)(z0)

    if trace_file is not None:
        dump_trace(trace, trace_file)
    return z, trace


def _solve_compiled(restricted, y, w, cfg, z0):
    core = backend.compiled_module()
    sw = np.ones(restricted.N) if w is None else np.sqrt(w)
    bufs = [np.empty(cfg.max_iters) for _ in range(7)]
    z, g0, iters, code = core.run_rank2(
        restricted.C, restricted.D, y, sw, z0,
        cfg.epsilon, cfg.max_iters, cfg.t0, LS_RCOND, LS_MAX_HALVINGS, *bufs)
    trace = DgnTrace(float(g0), *(b[:iters].copy() for b in bufs), reason=_REASONS[code])
    return z, trace

"""Greedy sparse phase retrieval: 2-opt support search with restarts.

One 2-opt run starts from a random feasible support, fits values with the
damped Gauss-Newton solver, then repeatedly swaps the in-support index with
the smallest absolute value against the off-support candidate with the
largest absolute gradient entry, keeping the swap only if the (weighted)
objective improves, and stopping at the first non-improving swap.

The restarted driver keeps invoking 2-opt runs with fresh random supports
until the unweighted objective drops below the success threshold or the
total swap budget is exhausted, and returns the best iterate seen.  Random
measurement weights w_i in {1, 2}, redrawn at every inner-solver invocation,
de-sharpen local minima.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dgn import DgnConfig, dgn_solve
from .ensembles import embed
from .signals import SparseSignal
from .support import SupportConstraints

__all__ = [
    "SolveResult",
    "TwoOptRun",
    "draw_weights",
    "gespar",
    "random_support",
    "two_opt",
]


@dataclass(frozen=True)
class SolveResult:
    """Outcome of a restarted search.

    ``objective_unweighted`` is the plain sum of squared residuals of ``x``;
    ``success`` means it fell below the threshold.  ``swaps_used`` counts
    every attempted swap (one inner solve each) across all restarts.
    """

    x: SparseSignal
    objective_unweighted: float
    swaps_used: int
    restarts: int
    success: bool


@dataclass
class TwoOptRun:
    """One 2-opt run: final iterate, its support, and swap accounting.

    ``comparisons`` records each attempted swap's (old, new) weighted
    objectives under the weights current at the attempt; ``stop`` is one of
    ``no_improvement``, ``budget``, ``no_swap_available``.
    """

    x: np.ndarray
    support: tuple[int, ...]
    swaps: int
    comparisons: list[tuple[float, float]]
    stop: str


def random_support(constraints: SupportConstraints, rng) -> tuple[int, ...]:
    """Uniform random support: forced indices plus a draw from the free candidates."""
    forced = constraints.forced
    free = sorted(set(constraints.candidates) - set(forced))
    k = constraints.s - len(forced)
    if k > len(free):
        # unreachable for validated constraints; kept as a guard
        raise ValueError("support constraints are infeasible")
    picked = rng.choice(len(free), size=k, replace=False) if k else []
    return tuple(sorted(list(forced) + [free[int(i)] for i in picked]))


def draw_weights(N: int, rng) -> np.ndarray:
    """Measurement weights, each 1 or 2 with equal probability."""
    if N < 1:
        raise ValueError("N must be positive")
    return rng.integers(1, 3, size=N).astype(float)


def two_opt(ensemble, y, constraints: SupportConstraints, rng, *,
            weighting: bool = True, swap_budget: int | None = None,
            dgn_config: DgnConfig | None = None) -> TwoOptRun:
    """Single 2-opt local search run under the given support constraints.

    Weights are redrawn at every inner-solver invocation when ``weighting``
    is on, and each swap's accept test compares old and new iterates under
    the same (current) weights.  ``swap_budget`` bounds the number of
    attempted swaps; the run reports early abort through ``stop``.
    """
    y = np.asarray(y, dtype=float)
    n = ensemble.n
    if constraints.candidates[-1] > n:
        raise ValueError(f"candidate index {constraints.candidates[-1]} exceeds n={n}")
    forced = set(constraints.forced)
    candidates = set(constraints.candidates)

    def solve_on(sup, w):
        z, _ = dgn_solve(ensemble.restricted(sup), y, w, config=dgn_config, rng=rng)
        return embed(z, sup, n)

    S = random_support(constraints, rng)
    w = draw_weights(ensemble.N, rng) if weighting else None
    x = solve_on(S, w)
    f_cur = ensemble.objective(x, y, w)

    swaps = 0
    comparisons: list[tuple[float, float]] = []
    while True:
        if swap_budget is not None and swaps >= swap_budget:
            return TwoOptRun(x, S, swaps, comparisons, "budget")
        removable = sorted(set(S) - forced)
        addable = sorted(candidates - set(S))
        if not removable or not addable:
            return TwoOptRun(x, S, swaps, comparisons, "no_swap_available")

        # out: smallest-magnitude free support entry; in: largest-|gradient|
        # off-support candidate; ties break to the smallest index
        vals = np.abs(x[np.asarray(removable) - 1])
        i_out = removable[int(np.argmin(vals))]
        grad = ensemble.gradient(x, y, w)
        gvals = np.abs(grad[np.asarray(addable) - 1])
        j_in = addable[int(np.argmax(gvals))]

        S_new = tuple(sorted((set(S) - {i_out}) | {j_in}))
        w_new = draw_weights(ensemble.N, rng) if weighting else None
        x_new = solve_on(S_new, w_new)
        swaps += 1
        f_new = ensemble.objective(x_new, y, w_new)
        f_old = ensemble.objective(x, y, w_new)
        comparisons.append((f_old, f_new))
        if f_new < f_old:
            S, x, w, f_cur = S_new, x_new, w_new, f_new
        else:
            return TwoOptRun(x, S, swaps, comparisons, "no_improvement")


def gespar(ensemble, y, constraints: SupportConstraints, rng, *,
           tau: float = 1e-4, max_swaps: int = 6400, weighting: bool = True,
           dgn_config: DgnConfig | None = None) -> SolveResult:
    """Restarted 2-opt search.

    Runs 2-opt with fresh random supports, accumulating attempted swaps, until
    the unweighted objective of some run drops below ``tau`` (success) or the
    swap budget ``max_swaps`` is spent (failure).  Returns the iterate with the
    smallest unweighted objective over all restarts.  Restarts are additionally
    capped at max(64, max_swaps) to bound runs whose 2-opt cannot attempt any
    swap (unique feasible support).
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    if max_swaps < 1:
        raise ValueError("max_swaps must be at least 1")
    y = np.asarray(y, dtype=float)

    used = 0
    restarts = 0
    best_x = None
    best_f = np.inf
    max_restarts = max(64, max_swaps)
    while True:
        run = two_opt(ensemble, y, constraints, rng, weighting=weighting,
                      swap_budget=max_swaps - used, dgn_config=dgn_config)
        restarts += 1
        used += run.swaps
        f_u = ensemble.objective(run.x, y, None)
        if f_u < best_f:
            best_f = f_u
            best_x = run.x
        if best_f < tau:
            break
        if used >= max_swaps:
            break
        if run.stop == "no_swap_available" and restarts >= max_restarts:
            break
    return SolveResult(SparseSignal(best_x, ensemble.n, ensemble.N),
                       float(best_f), used, restarts, bool(best_f < tau))

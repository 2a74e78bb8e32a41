"""Exact linear assignment, maximization form.

The core is scipy's ``linear_sum_assignment`` (a shortest augmenting path
solver of the Jonker-Volgenant family), wrapped with input checks and
support for partially fixed assignments.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InfeasibleFixing, NonFiniteEntry, NonSquare

__all__ = [
    "solve_lap_max",
    "solve_lap_max_constrained",
    "assignment_value",
    "complete_rectangular",
]


def _check_cost(cost) -> np.ndarray:
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise NonSquare(f"cost matrix must be square, got shape {cost.shape}")
    if not np.all(np.isfinite(cost)):
        raise NonFiniteEntry("cost matrix has non-finite entries")
    return cost


def assignment_value(cost, perm) -> float:
    """``tr(cost^T P)`` for the permutation ``perm``."""
    cost = np.asarray(cost)
    return float(cost[np.arange(len(perm)), perm].sum())


def solve_lap_max(cost) -> np.ndarray:
    """Permutation ``perm`` maximizing ``sum_u cost[u, perm[u]]``."""
    cost = _check_cost(cost)
    # Negating turns the maximization into scipy's minimization form.
    rows, cols = linear_sum_assignment(-cost)
    perm = np.empty(cost.shape[0], dtype=int)
    perm[rows] = cols
    return perm


def solve_lap_max_constrained(cost, fixed) -> np.ndarray:
    """Like :func:`solve_lap_max` but optimal among permutations with
    ``perm[u] == fixed[u]`` for every key ``u`` of ``fixed``.
    """
    cost = _check_cost(cost)
    n = cost.shape[0]
    fixed = {int(u): int(v) for u, v in dict(fixed or {}).items()}
    _check_fixing(fixed, n)
    if not fixed:
        return solve_lap_max(cost)
    free_rows = np.setdiff1d(np.arange(n), list(fixed))
    free_cols = np.setdiff1d(np.arange(n), list(fixed.values()))
    perm = np.empty(n, dtype=int)
    for u, v in fixed.items():
        perm[u] = v
    if free_rows.size:
        sub = solve_lap_max(cost[np.ix_(free_rows, free_cols)])
        perm[free_rows] = free_cols[sub]
    return perm


def _check_fixing(fixed: dict, n: int) -> None:
    for u, v in fixed.items():
        if not (0 <= u < n and 0 <= v < n):
            raise InfeasibleFixing(f"fixed pair ({u}, {v}) outside range {n}")
    if len(set(fixed.values())) != len(fixed):
        raise InfeasibleFixing("fixed assignment is not injective")


def complete_rectangular(cost_rows, n: int, fixed=None) -> np.ndarray:
    """Exact maximizer for an ``n x n`` cost whose rows past
    ``cost_rows.shape[0]`` are identically zero.

    The nonzero block is solved as a rectangular assignment; the zero rows
    take the leftover columns in increasing order, which costs nothing.
    """
    cost_rows = np.asarray(cost_rows, dtype=float)
    m = cost_rows.shape[0]
    fixed = {int(u): int(v) for u, v in dict(fixed or {}).items()}
    _check_fixing(fixed, n)
    perm = np.full(n, -1, dtype=int)
    used = np.zeros(n, dtype=bool)
    for u, v in fixed.items():
        perm[u] = v
        used[v] = True
    rows = np.array([u for u in range(m) if u not in fixed], dtype=int)
    cols = np.flatnonzero(~used)
    if rows.size:
        r, c = linear_sum_assignment(-cost_rows[np.ix_(rows, cols)])
        perm[rows[r]] = cols[c]
        used[cols[c]] = True
    rest_rows = np.flatnonzero(perm < 0)
    perm[rest_rows] = np.flatnonzero(~used)
    return perm

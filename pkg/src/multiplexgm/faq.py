"""Multiplex FAQ: Frank-Wolfe over the doubly stochastic polytope.

The solver maximizes the relaxed trace objective

    f(P) = sum_i l_i tr((G_i (+) 0) P H_i P^T)

which, at permutation matrices, equals ``(const - objective) / 2`` where
``objective`` is :func:`multiplexgm.multiplex.objective`. Template matrices
are kept at their own order ``m``; since ``G_i (+) 0`` vanishes outside the
leading ``m x m`` block, only the first ``m`` rows of an iterate enter any
product.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assignment import complete_rectangular, solve_lap_max_constrained
from .errors import (
    DimensionMismatch,
    InfeasibleFixing,
    InfeasibleSeedInitialization,
    NonStochasticRows,
    ValidationError,
)
from .multiplex import PaddedMultiplex, channel_weights, perm_matrix

__all__ = [
    "SolverConfig",
    "SeedSpec",
    "SolveTrace",
    "is_doubly_stochastic",
    "trace_objective",
    "relaxed_objective",
    "gradient",
    "segment_coefficients",
    "line_search_alpha",
    "mfaq",
    "random_ds_start",
    "flat_start",
    "seeded_start",
    "impose_hard_seeds",
    "sinkhorn",
    "soft_seed_start",
]

DS_TOL = 1e-9


@dataclass(frozen=True)
class SolverConfig:
    """``epsilon=None`` means ``1e-4 * n`` for background order ``n``."""

    epsilon: float | None = None
    max_iters: int = 30
    weights: tuple | None = None

    def __post_init__(self):
        if self.epsilon is not None and not self.epsilon > 0:
            raise ValidationError("epsilon must be positive")
        if self.max_iters < 1:
            raise ValidationError("max_iters must be at least 1")

    def tolerance(self, n: int) -> float:
        return 1e-4 * n if self.epsilon is None else self.epsilon


@dataclass(frozen=True)
class SeedSpec:
    """Hard seeds (template label -> background label) and an optional
    ``m x n`` row-stochastic soft-seed prior."""

    hard: dict = field(default_factory=dict)
    soft: np.ndarray | None = None

    def __post_init__(self):
        hard = {int(u): int(v) for u, v in dict(self.hard).items()}
        if len(set(hard.values())) != len(hard):
            raise InfeasibleFixing("hard seed map is not injective")
        object.__setattr__(self, "hard", hard)
        if self.soft is not None:
            S = np.asarray(self.soft, dtype=float)
            _check_row_stochastic(S)
            object.__setattr__(self, "soft", S)


@dataclass
class SolveTrace:
    objective_per_iteration: list = field(default_factory=list)
    trace_objective: list = field(default_factory=list)
    alpha_history: list = field(default_factory=list)
    step_norms: list = field(default_factory=list)
    iterations_used: int = 0
    converged: bool = False

    @property
    def final_alpha_history(self) -> list:
        return self.alpha_history


def is_doubly_stochastic(P, tol: float = DS_TOL) -> bool:
    P = np.asarray(P)
    return bool(
        P.ndim == 2 and P.shape[0] == P.shape[1]
        and np.all(P >= -tol)
        and np.allclose(P.sum(axis=0), 1.0, rtol=0, atol=tol)
        and np.allclose(P.sum(axis=1), 1.0, rtol=0, atol=tol))


def _check_dims(P, tpl: PaddedMultiplex, bg: PaddedMultiplex):
    if tpl.c != bg.c:
        raise DimensionMismatch(f"template has {tpl.c} channels, background {bg.c}")
    if tpl.order > bg.order:
        raise DimensionMismatch("template order exceeds background order")
    if P is not None and np.shape(P) != (bg.order, bg.order):
        raise DimensionMismatch(f"iterate shape {np.shape(P)} != ({bg.order}, {bg.order})")


def trace_objective(P, tpl, bg, weights=None) -> float:
    _check_dims(P, tpl, bg)
    lam = channel_weights(weights, tpl.c)
    Pm = np.asarray(P)[: tpl.order]
    return float(sum(lam[i] * np.sum((tpl.matrices[i] @ Pm @ bg.matrices[i]) * Pm)
                     for i in range(tpl.c)))


def _norm_constant(tpl, bg, lam) -> float:
    return float(np.dot(lam, tpl.sq_norms + bg.sq_norms))


def _weighted_product(tpl, bg, lam, Pm) -> np.ndarray:
    """``sum_i l_i G_i Pm H_i`` for the leading ``m`` rows ``Pm``."""
    out = np.zeros(Pm.shape)
    for i in range(tpl.c):  # fixed channel order keeps the sum reproducible
        out += lam[i] * (tpl.matrices[i] @ Pm @ bg.matrices[i])
    return out


def _vertex_product(tpl, bg, lam, q) -> np.ndarray:
    """``sum_i l_i G_i Qm H_i`` for the permutation matrix of ``q``; the rows
    of ``Qm H_i`` are just rows ``q[:m]`` of ``H_i``."""
    rows = q[: tpl.order]
    out = np.zeros((tpl.order, bg.order))
    for i in range(tpl.c):
        out += lam[i] * (tpl.matrices[i] @ bg.matrices[i][rows])
    return out


def relaxed_objective(P, tpl, bg, weights=None) -> float:
    """``const - 2 f(P)``; equals the Frobenius objective at permutations."""
    lam = channel_weights(weights, tpl.c)
    return _norm_constant(tpl, bg, lam) - 2.0 * trace_objective(P, tpl, bg, weights)


def gradient(P, tpl: PaddedMultiplex, bg: PaddedMultiplex, weights=None) -> np.ndarray:
    """Gradient of :func:`trace_objective` at ``P``.

    With symmetric channel matrices the two terms
    ``(G (+) 0)^T P H + (G (+) 0) P H^T`` coincide, giving
    ``2 sum_i l_i (G_i (+) 0) P H_i``; rows past the template order are zero.
    """
    _check_dims(P, tpl, bg)
    lam = channel_weights(weights, tpl.c)
    P = np.asarray(P, dtype=float)
    m = tpl.order
    grad = np.zeros_like(P)
    grad[:m] = 2.0 * _weighted_product(tpl, bg, lam, P[:m])
    return grad


def segment_coefficients(P, Q, tpl, bg, weights=None):
    """Coefficients ``(a, b)`` with ``f(a P + (1-a) Q) = f(Q) + b*al + a*al**2``."""
    lam = channel_weights(weights, tpl.c)
    m = tpl.order
    D = (np.asarray(P) - np.asarray(Q))[:m]
    Qm = np.asarray(Q)[:m]
    a = b = 0.0
    for i in range(tpl.c):
        GDH = tpl.matrices[i] @ D @ bg.matrices[i]
        a += lam[i] * np.sum(GDH * D)
        b += 2.0 * lam[i] * np.sum(GDH * Qm)
    return float(a), float(b)


def _best_alpha(a: float, b: float) -> float:
    if a < 0:
        x = -b / (2.0 * a)
        if 0.0 < x < 1.0:
            return x
    # Endpoints: alpha=1 keeps the current iterate and wins ties.
    return 1.0 if a + b >= 0 else 0.0


def line_search_alpha(P, Q, tpl, bg, weights=None) -> float:
    """Exact maximizer over ``[0, 1]`` of the trace objective along
    ``alpha P + (1 - alpha) Q``."""
    _check_dims(P, tpl, bg)
    return _best_alpha(*segment_coefficients(P, Q, tpl, bg, weights))


def mfaq(tpl: PaddedMultiplex, bg: PaddedMultiplex, p0, cfg: SolverConfig | None = None,
         seeds: SeedSpec | None = None, *, keep_iterates: bool = False):
    """Frank-Wolfe solve of the relaxed multiplex matching problem.

    Parameters
    ----------
    tpl, bg : PaddedMultiplex
        Padded template (order ``m``) and background (order ``n >= m``).
    p0 : (n, n) array
        Doubly stochastic start; rows of hard-seeded template labels must be
        indicator rows.
    cfg : SolverConfig
    seeds : SeedSpec
        Only the hard seeds are used here; soft seeds enter through ``p0``.

    Returns
    -------
    perm : ndarray
        Full permutation of the background labels (``perm[u]`` matches
        template label ``u``), extending the hard seeds.
    trace : SolveTrace
        Per-iteration diagnostics. With ``keep_iterates`` the iterates are
        attached as ``trace.iterates``.
    """
    cfg = cfg or SolverConfig()
    seeds = seeds or SeedSpec()
    _check_dims(p0, tpl, bg)
    n, m = bg.order, tpl.order
    hard = seeds.hard
    for u, v in hard.items():
        if not (0 <= u < m and 0 <= v < n):
            raise InfeasibleFixing(f"hard seed ({u}, {v}) out of range")
    P = np.array(p0, dtype=float)
    if not is_doubly_stochastic(P, 1e-6):
        raise InfeasibleSeedInitialization("initial matrix is not doubly stochastic")
    for u, v in hard.items():
        if abs(P[u, v] - 1.0) > 1e-9:
            raise InfeasibleSeedInitialization(f"start row {u} is not the seed indicator for {v}")

    lam = channel_weights(cfg.weights, tpl.c)
    const = _norm_constant(tpl, bg, lam)
    eps = cfg.tolerance(n)
    trace = SolveTrace()
    # The product S = sum_i l_i G_i P H_i is linear in P, so it follows the
    # iterate along each Frank-Wolfe segment without new dense products.
    S = _weighted_product(tpl, bg, lam, P[:m])
    f = float(np.sum(S * P[:m]))
    trace.trace_objective.append(f)
    trace.objective_per_iteration.append(const - 2.0 * f)
    iterates = [P.copy()] if keep_iterates else None
    rows = np.arange(m)

    for _ in range(cfg.max_iters):
        q = complete_rectangular(S, n, fixed=hard)  # gradient is 2 S
        SQ = _vertex_product(tpl, bg, lam, q)
        SD = S - SQ
        Q = perm_matrix(q)
        D = P - Q
        a = float(np.sum(SD * D[:m]))
        b = float(2.0 * np.sum(SD[rows, q[:m]]))
        alpha = _best_alpha(a, b)
        P = Q + alpha * D
        S = SQ + alpha * SD
        step = (1.0 - alpha) * float(np.linalg.norm(D))
        f = float(np.sum(S * P[:m]))
        trace.iterations_used += 1
        trace.alpha_history.append(alpha)
        trace.step_norms.append(step)
        trace.trace_objective.append(f)
        trace.objective_per_iteration.append(const - 2.0 * f)
        if keep_iterates:
            iterates.append(P.copy())
        if step <= eps:
            trace.converged = True
            break

    perm = solve_lap_max_constrained(P, hard)
    trace.final_matrix = P
    if keep_iterates:
        trace.iterates = iterates
    return perm, trace


def flat_start(n: int) -> np.ndarray:
    return np.full((n, n), 1.0 / n)


def random_ds_start(n: int, rng: np.random.Generator, alpha: float | None = None) -> np.ndarray:
    """``alpha * ones/n + (1 - alpha) * P`` with ``P`` a uniform random
    permutation matrix and ``alpha ~ Unif[0, 1]`` unless given."""
    if n < 1:
        raise ValidationError("n must be positive")
    if alpha is None:
        alpha = rng.uniform()
    perm = rng.permutation(n)
    return alpha * flat_start(n) + (1.0 - alpha) * perm_matrix(perm)


def seeded_start(n: int, hard: dict, free_block) -> np.ndarray:
    """Embed a doubly stochastic block on the unseeded rows/columns (in
    increasing label order) next to the hard-seed indicator rows."""
    P = np.zeros((n, n))
    rows = np.setdiff1d(np.arange(n), list(hard))
    cols = np.setdiff1d(np.arange(n), list(hard.values()))
    if np.shape(free_block) != (rows.size, cols.size):
        raise DimensionMismatch(f"free block must be {rows.size} x {cols.size}")
    for u, v in hard.items():
        P[u, v] = 1.0
    P[np.ix_(rows, cols)] = free_block
    return P


def impose_hard_seeds(P, hard: dict) -> np.ndarray:
    """Replace seeded rows/columns of ``P`` by indicators and rebalance the
    rest so the result stays doubly stochastic."""
    if not hard:
        return np.asarray(P, dtype=float)
    n = P.shape[0]
    rows = np.setdiff1d(np.arange(n), list(hard))
    cols = np.setdiff1d(np.arange(n), list(hard.values()))
    block = sinkhorn(np.asarray(P)[np.ix_(rows, cols)])
    return seeded_start(n, hard, block)


def _sinkhorn_sweeps(M, tol, max_sweeps):
    M = M.copy()
    for _ in range(max_sweeps):
        M /= M.sum(axis=1, keepdims=True)
        M /= M.sum(axis=0, keepdims=True)
        if np.max(np.abs(M.sum(axis=1) - 1.0)) <= tol:
            return M, True
    return M, False


def sinkhorn(M, tol: float = DS_TOL, max_sweeps: int = 1000) -> np.ndarray:
    """Alternating row/column normalization to a doubly stochastic matrix.

    Matrices without total support never converge; for those the input is
    blended with a growing share of the flat matrix until it does.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch("sinkhorn needs a square matrix")
    if np.any(M < 0):
        raise ValidationError("sinkhorn needs a nonnegative matrix")
    n = M.shape[0]
    if n == 0:
        return M
    for eta in (0.0, 1e-6, 1e-4, 1e-2, 1e-1):
        X = (1.0 - eta) * M + eta / n
        if np.any(X.sum(axis=1) == 0) or np.any(X.sum(axis=0) == 0):
            continue
        X, ok = _sinkhorn_sweeps(X, tol, max_sweeps)
        if ok:
            return X
    return flat_start(n)


def _check_row_stochastic(S):
    if S.ndim != 2 or np.any(S < 0) or not np.all(np.isfinite(S)):
        raise NonStochasticRows("soft seeds must be a nonnegative finite matrix")
    if not np.allclose(S.sum(axis=1), 1.0, rtol=0, atol=DS_TOL):
        raise NonStochasticRows("soft seed rows must sum to 1")
    if S.shape[0] > S.shape[1]:
        raise NonStochasticRows("soft seed matrix has more template rows than background columns")


def soft_seed_start(soft, jitter: float = 0.0, rng: np.random.Generator | None = None,
                    hard: dict | None = None) -> np.ndarray:
    """Doubly stochastic start built from an ``m x n`` soft-seed prior.

    The prior fills the first ``m`` rows. The remaining rows share the
    leftover column mass ``1 - colsum`` evenly, which is already doubly
    stochastic whenever no column is over-subscribed. Nonnegative noise of
    size at most ``jitter`` is then added and the matrix is rebalanced.
    """
    S = np.asarray(soft, dtype=float)
    _check_row_stochastic(S)
    if jitter < 0:
        raise ValidationError("jitter must be nonnegative")
    m, n = S.shape
    M = np.zeros((n, n))
    M[:m] = S
    if m < n:
        M[m:] = np.clip(1.0 - S.sum(axis=0), 0.0, None) / (n - m)
    if jitter > 0:
        if rng is None:
            raise ValidationError("a random generator is required when jitter > 0")
        M += jitter * rng.uniform(size=M.shape)
    if not is_doubly_stochastic(M):
        M = sinkhorn(M)
    return impose_hard_seeds(M, hard or {})

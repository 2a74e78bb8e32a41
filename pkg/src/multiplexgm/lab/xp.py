"""The X_P statistic, the pair sets it is built from, and its expectation
under the MS and ME error models.

``perm`` arguments are full permutations (or injections defined at least on
the template labels); ``sigma = perm[:m]``. The pair set ``Delta_P`` holds
the template pairs ``{j, l}`` with ``{sigma(j), sigma(l)} != {j, l}``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, MissingSources, ValidationError
from ..multiplex import PaddedMultiplex, embed_oplus_zero, perm_matrix

__all__ = [
    "DeltaCounts",
    "delta_pairs",
    "delta_counts",
    "xp_frobenius",
    "xp_trace",
    "xp_delta_sum",
    "xp_statistic",
    "expected_xp_ms",
    "expected_xp_me",
]


@dataclass(frozen=True)
class DeltaCounts:
    total: int
    per_channel: tuple  # (|D0|, |D1|, |D2|, |D3|) per channel
    me_counts: tuple | None = None  # (|D1|, |D2|, |D3|, |D4|, |e_P|, |n_P|)


def _stack(x) -> np.ndarray:
    if isinstance(x, PaddedMultiplex):
        return x.matrices
    arr = np.asarray(x, dtype=float)
    return arr[None] if arr.ndim == 2 else arr


def delta_pairs(perm, m: int) -> np.ndarray:
    """``(K, 2)`` array of the pairs ``j < l`` in ``Delta_P``."""
    sig = np.asarray(perm, dtype=int)[:m]
    j, l = np.triu_indices(m, 1)
    sj, sl = sig[j], sig[l]
    keep = ~(((sj == j) & (sl == l)) | ((sj == l) & (sl == j)))
    return np.stack([j[keep], l[keep]], axis=1)


def delta_counts(tpl_src, bg_src, perm, model: str = "MS", sources=None) -> DeltaCounts:
    """Sizes of the pair sets partitioning ``Delta_P``.

    ``tpl_src``/``bg_src`` are the centered source matrices (the channel
    stacks before filtering). For ``model="ME"`` the monoplex 0/1 sources
    ``(T, W)`` must also be given.
    """
    C, D = _stack(tpl_src), _stack(bg_src)
    if C.shape[0] != D.shape[0]:
        raise DimensionMismatch("source stacks have different channel counts")
    m = C.shape[1]
    pairs = delta_pairs(perm, m)
    sig = np.asarray(perm, dtype=int)[:m]
    j, l = pairs[:, 0], pairs[:, 1]
    per = []
    for Ci, Di in zip(C, D):
        cv = Ci[j, l]
        dv = Di[sig[j], sig[l]]
        nz = cv != 0
        d1 = int(np.sum(nz & (dv != 0) & (cv != dv)))
        d2 = int(np.sum(nz & (dv == 0)))
        d3 = int(np.sum(nz & (cv == dv)))
        per.append((int(np.sum(nz)), d1, d2, d3))
    me = None
    if str(model).upper() == "ME":
        if sources is None:
            raise MissingSources("ME counts need the source graphs (T, W)")
        T, W = (np.asarray(x) for x in sources)
        tv = T[j, l] > 0
        wv = W[sig[j], sig[l]] > 0
        me = (int(np.sum(tv & ~wv)), int(np.sum(~tv & wv)), int(np.sum(tv & wv)),
              int(np.sum(~tv & ~wv)), int(np.sum(tv)), int(np.sum(~tv)))
    elif str(model).upper() != "MS":
        raise ValidationError(f"unknown model {model!r}")
    return DeltaCounts(len(pairs), tuple(per), me)


def _pair(A, B):
    A, B = _stack(A), _stack(B)
    if A.shape[0] != B.shape[0] or A.shape[1] > B.shape[1]:
        raise DimensionMismatch(f"incompatible stacks {A.shape} and {B.shape}")
    return A, B


def xp_frobenius(A, B, perm) -> float:
    """Quarter of the Frobenius-objective gap between ``perm`` and the identity."""
    A, B = _pair(A, B)
    n = B.shape[1]
    P = perm_matrix(_full(perm, n), n)
    total = 0.0
    for Ai, Bi in zip(A, B):
        Ae = embed_oplus_zero(Ai, n)
        total += np.sum((Ae - P @ Bi @ P.T) ** 2) - np.sum((Ae - Bi) ** 2)
    return float(total / 4.0)


def xp_trace(A, B, perm) -> float:
    A, B = _pair(A, B)
    n = B.shape[1]
    P = perm_matrix(_full(perm, n), n)
    total = 0.0
    for Ai, Bi in zip(A, B):
        Ae = embed_oplus_zero(Ai, n)
        total += 0.5 * (np.trace(Ae @ Bi) - np.trace(Ae @ P @ Bi @ P.T))
    return float(total)


def xp_delta_sum(A, B, perm) -> float:
    A, B = _pair(A, B)
    m = A.shape[1]
    sig = np.asarray(perm, dtype=int)[:m]
    total = 0.0
    for j, l in delta_pairs(perm, m):
        for Ai, Bi in zip(A, B):
            total += Ai[j, l] * (Bi[j, l] - Bi[sig[j], sig[l]])
    return float(total)


def _full(perm, n):
    perm = np.asarray(perm, dtype=int)
    if len(perm) == n:
        return perm
    rest = np.setdiff1d(np.arange(n), perm)
    return np.concatenate([perm, rest])


def xp_statistic(A, B, perm) -> float:
    """X_P for centered padded observations ``A`` (template) and ``B``."""
    return xp_frobenius(A, B, perm)


def expected_xp_ms(counts: DeltaCounts, s, q) -> float:
    """``sum_i (2|D1_i| + |D2_i|)(1 - 2 s_i)(1 - 2 q_i)``."""
    s, q = np.asarray(s, dtype=float), np.asarray(q, dtype=float)
    c = len(counts.per_channel)
    s, q = np.broadcast_to(s, c), np.broadcast_to(q, c)
    return float(sum((2 * d1 + d2) * (1 - 2 * s[i]) * (1 - 2 * q[i])
                     for i, (_, d1, d2, _) in enumerate(counts.per_channel)))


def expected_xp_me(counts: DeltaCounts, s, q, r, t) -> float:
    """``|D1| sum_i 2(1-2s_i)(1-r_i-t_i) + |D2| sum_i 2(1-2q_i)(1-r_i-t_i)``.

    ``s, q`` are the template filter's edge/non-edge flip rates and ``r, t``
    the background filter's.
    """
    if counts.me_counts is None:
        raise MissingSources("ME counts are required")
    d1, d2 = counts.me_counts[:2]
    s, q, r, t = (np.atleast_1d(np.asarray(x, dtype=float)) for x in (s, q, r, t))
    g = 1 - r - t
    return float(d1 * np.sum(2 * (1 - 2 * s) * g) + d2 * np.sum(2 * (1 - 2 * q) * g))

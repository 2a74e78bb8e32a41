"""Random instances: errorful channels, correlated ER pairs, MS/ME models,
and planted templates.

All samplers take a ``numpy.random.Generator`` and draw each unordered
vertex pair once (upper triangle), so outputs are symmetric and hollow.
Ground truth is returned as an array ``truth`` with ``truth[u]`` the
background label of template label ``u``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InfeasibleRho, ValidationError
from .multiplex import MultiplexGraph, from_adjacency, validate_multiplex

__all__ = [
    "ErrorFilter",
    "MsModelSpec",
    "MeModelSpec",
    "CorrelatedErSpec",
    "er_adjacency",
    "apply_error_channel",
    "centered_from_adjacency",
    "adjacency_from_centered",
    "gen_correlated_er_pair",
    "gen_ms_instance",
    "gen_me_instance",
    "plant_template",
    "shuffle_background",
]


def _broadcast(x, c, name):
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.size == 1:
        arr = np.full(c, arr[0])
    if arr.size != c:
        raise ValidationError(f"{name}: expected {c} values, got {arr.size}")
    return arr


def _check_rates(arr, name):
    if np.any(arr < 0) or np.any(arr > 1):
        raise ValidationError(f"{name} must lie in [0, 1]")


@dataclass(frozen=True)
class ErrorFilter:
    """Per-channel symmetric hollow flip-probability matrices."""

    per_channel: tuple

    def __post_init__(self):
        for E in self.per_channel:
            E = np.asarray(E)
            if np.any(E < 0) or np.any(E > 1):
                raise ValidationError("flip probabilities must lie in [0, 1]")
            if not np.allclose(E, E.T) or np.any(np.diag(E) != 0):
                raise ValidationError("flip matrices must be symmetric and hollow")


@dataclass(frozen=True)
class MsModelSpec:
    n: int
    m: int
    c: int
    p: tuple
    s: tuple  # template flip rate per channel
    q: tuple  # background flip rate per channel

    def __post_init__(self):
        if not 1 <= self.m <= self.n:
            raise ValidationError("need 1 <= m <= n")
        for name in ("p", "s", "q"):
            arr = _broadcast(getattr(self, name), self.c, name)
            _check_rates(arr, name)
            object.__setattr__(self, name, tuple(arr))


@dataclass(frozen=True)
class MeModelSpec:
    """Single ER(n, p) source seen through per-channel filters.

    The template filter flips source edges with probability ``s`` and
    non-edges with probability ``q``; the background filter flips edges with
    probability ``r`` and non-edges with probability ``t``.
    """

    n: int
    m: int
    c: int
    p: float
    s: tuple
    q: tuple
    r: tuple
    t: tuple

    def __post_init__(self):
        if not 1 <= self.m <= self.n:
            raise ValidationError("need 1 <= m <= n")
        _check_rates(np.asarray(self.p), "p")
        for name in ("s", "q", "r", "t"):
            arr = _broadcast(getattr(self, name), self.c, name)
            _check_rates(arr, name)
            object.__setattr__(self, name, tuple(arr))


@dataclass(frozen=True)
class CorrelatedErSpec:
    n: int
    p: float
    rho: tuple
    c: int = 1

    def __post_init__(self):
        rho = _broadcast(self.rho, self.c, "rho")
        _check_rates(np.asarray(self.p), "p")
        for r in rho:
            hi, lo = self.p + r * (1 - self.p), self.p * (1 - r)
            if not (0 <= hi <= 1 and 0 <= lo <= 1):
                raise InfeasibleRho(f"rho={r} infeasible at p={self.p}")
        object.__setattr__(self, "rho", tuple(rho))


def er_adjacency(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    iu = np.triu_indices(n, 1)
    A = np.zeros((n, n))
    A[iu] = rng.random(iu[0].size) < p
    return A + A.T


def centered_from_adjacency(A, members=None) -> np.ndarray:
    """Centered padding of a 0/1 adjacency matrix (all labels present unless
    ``members`` masks some out)."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    mask = np.ones(n) if members is None else np.asarray(members, dtype=float)
    C = (2.0 * A - 1.0) * np.outer(mask, mask)
    np.fill_diagonal(C, 0.0)
    return C


def adjacency_from_centered(C) -> np.ndarray:
    return (np.asarray(C) > 0).astype(float)


def apply_error_channel(C, E, rng: np.random.Generator) -> np.ndarray:
    """Pass a centered padded matrix through an errorful channel.

    Each unordered pair's entry is multiplied by ``1 - 2X`` with
    ``X ~ Bern(E[u, v])``; zero entries stay zero.
    """
    C = np.asarray(C, dtype=float)
    E = np.broadcast_to(np.asarray(E, dtype=float), C.shape)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got {C.shape}")
    iu = np.triu_indices(C.shape[0], 1)
    flips = rng.random(iu[0].size) < E[iu]
    out = C.copy()
    out[iu] = np.where(flips, -C[iu], C[iu])
    out.T[iu] = out[iu]
    return out


def _graph_from_centered(mats, members=None) -> MultiplexGraph:
    n = mats[0].shape[0]
    raw = []
    for i, C in enumerate(mats):
        iu, ju = np.nonzero(np.triu(C > 0, 1))
        verts = range(n) if members is None else np.flatnonzero(members[i]).tolist()
        raw.append((verts, zip(iu.tolist(), ju.tolist())))
    return validate_multiplex(n, raw)


def gen_correlated_er_pair(spec: CorrelatedErSpec, rng: np.random.Generator):
    """Channelwise ``rho``-correlated ER(n, p) pairs aligned by the identity.

    Returns ``(G, H, truth)``.
    """
    n, p = spec.n, spec.p
    iu = np.triu_indices(n, 1)
    G_mats, H_mats = [], []
    for rho in spec.rho:
        g = rng.random(iu[0].size) < p
        cond = np.where(g, p + rho * (1 - p), p * (1 - rho))
        h = rng.random(iu[0].size) < cond
        G, H = np.zeros((n, n)), np.zeros((n, n))
        G[iu], H[iu] = g, h
        G_mats.append(G + G.T)
        H_mats.append(H + H.T)
    return from_adjacency(G_mats), from_adjacency(H_mats), np.arange(n)


def gen_ms_instance(spec: MsModelSpec, rng: np.random.Generator, *, return_sources=False):
    """MS model: per-channel sources ``W_i ~ ER(n, p_i)``, ``T_i = W_i[:m]``,
    template flips at rate ``s_i`` and background flips at rate ``q_i``.

    Returns ``(template, background, truth)``; with ``return_sources`` also
    the centered source stacks ``(C, D)``.
    """
    n, m = spec.n, spec.m
    C_src, D_src, A_obs, B_obs = [], [], [], []
    for i in range(spec.c):
        D = centered_from_adjacency(er_adjacency(n, spec.p[i], rng))
        C = D[:m, :m].copy()
        C_src.append(C)
        D_src.append(D)
    # Filters act after all sources are drawn, template then background.
    for i in range(spec.c):
        A_obs.append(apply_error_channel(C_src[i], spec.s[i], rng))
        B_obs.append(apply_error_channel(D_src[i], spec.q[i], rng))
    out = (_graph_from_centered(A_obs), _graph_from_centered(B_obs), np.arange(m))
    if return_sources:
        return out + ((np.array(C_src), np.array(D_src)),)
    return out


def _me_filter(C, edge_rate, non_edge_rate):
    E = np.where(C > 0, edge_rate, non_edge_rate)
    np.fill_diagonal(E, 0.0)
    return E


def gen_me_instance(spec: MeModelSpec, rng: np.random.Generator, *, return_sources=False):
    """ME model: one source ``W ~ ER(n, p)`` with ``T = W[:m]``.

    Channel ``i`` of the template is ``T`` with edges flipped at rate
    ``s_i`` and non-edges at ``q_i``; channel ``i`` of the background is
    ``W`` with edges flipped at ``r_i`` and non-edges at ``t_i``.
    """
    n, m = spec.n, spec.m
    W = er_adjacency(n, spec.p, rng)
    T = W[:m, :m].copy()
    D, C = centered_from_adjacency(W), centered_from_adjacency(T)
    A_obs, B_obs = [], []
    for i in range(spec.c):
        A_obs.append(apply_error_channel(C, _me_filter(C, spec.s[i], spec.q[i]), rng))
        B_obs.append(apply_error_channel(D, _me_filter(D, spec.r[i], spec.t[i]), rng))
    out = (_graph_from_centered(A_obs), _graph_from_centered(B_obs), np.arange(m))
    if return_sources:
        return out + ((T, W),)
    return out


def shuffle_background(bg: MultiplexGraph, truth, rng: np.random.Generator):
    """Relabel the background by a uniform permutation; returns the new
    background and the correspondingly updated truth."""
    pi = rng.permutation(bg.n_total)
    return bg.relabel(pi), pi[np.asarray(truth)]


def plant_template(n: int, m: int, c: int, rng: np.random.Generator, *,
                   bg_density=0.02, tpl_density=0.15, noise=0.05,
                   drop_vertices: float = 0.0, shuffle: bool = True):
    """Plant a dense multiplex block in a sparse ER background.

    The background's ``[:m]`` block is overwritten channelwise by an
    ``ER(m, tpl_density)`` graph; the template is that block with every
    pair flipped at rate ``noise``. With ``drop_vertices > 0`` each template
    channel loses that fraction of its vertices (one common vertex is always
    kept). With ``shuffle`` the background labels are randomly permuted.

    Returns ``(template, background, truth)``.
    """
    if not 1 <= m <= n:
        raise ValidationError("need 1 <= m <= n")
    bg_density = _broadcast(bg_density, c, "bg_density")
    tpl_density = _broadcast(tpl_density, c, "tpl_density")
    noise = _broadcast(noise, c, "noise")
    for name, arr in (("bg_density", bg_density), ("tpl_density", tpl_density), ("noise", noise)):
        _check_rates(arr, name)
    B_mats, A_mats = [], []
    for i in range(c):
        B = er_adjacency(n, bg_density[i], rng)
        block = er_adjacency(m, tpl_density[i], rng)
        B[:m, :m] = block
        B_mats.append(B)
        flipped = apply_error_channel(centered_from_adjacency(block), noise[i], rng)
        A_mats.append(adjacency_from_centered(flipped))
    members = None
    if drop_vertices > 0:
        keep = rng.integers(m)
        members = []
        for i in range(c):
            mask = rng.random(m) >= drop_vertices
            mask[keep] = True
            members.append(mask)
        # Every template label must stay in some channel.
        orphan = ~np.any(members, axis=0)
        members[0][orphan] = True
        A_mats = [a * np.outer(mk, mk) for a, mk in zip(A_mats, members)]
    vsets = None if members is None else [np.flatnonzero(mk).tolist() for mk in members]
    tpl = from_adjacency(A_mats, vsets)
    bg = from_adjacency(B_mats)
    truth = np.arange(m)
    if shuffle:
        bg, truth = shuffle_background(bg, truth, rng)
    return tpl, bg, truth

"""Multiplex graphs, padding schemes and the multiplex matching objective.

Labels are 0-based integers in ``range(n_total)`` everywhere in the library;
the text file format in :mod:`multiplexgm.io` is 1-based.

A permutation is stored as an integer array ``perm`` with ``perm[u]`` the
background label matched to template label ``u``; the corresponding
permutation matrix has ``P[u, perm[u]] = 1`` so that
``(P @ B @ P.T)[u, v] == B[perm[u], perm[v]]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ChannelCountMismatch,
    EmptyChannelIntersection,
    LabelOutOfRange,
    OrderMismatch,
    SelfLoop,
    TargetOrderTooSmall,
    UnionIncomplete,
    ValidationError,
)

__all__ = [
    "Channel",
    "MultiplexGraph",
    "validate_multiplex",
    "from_adjacency",
    "PaddingKind",
    "PaddingScheme",
    "NAIVE",
    "CENTERED",
    "Role",
    "PaddedMultiplex",
    "pad",
    "embed_oplus_zero",
    "channel_weights",
    "objective",
    "perm_matrix",
]


@dataclass(frozen=True)
class Channel:
    vertices: frozenset
    edges: frozenset  # of (u, v) with u < v


@dataclass(frozen=True)
class MultiplexGraph:
    """``c`` node-aligned undirected channels over the labels ``range(n_total)``.

    Construct through :func:`validate_multiplex`; the constructor itself does
    not check the invariants.
    """

    n_total: int
    channels: tuple

    @property
    def c(self) -> int:
        return len(self.channels)

    def adjacency(self, i: int) -> np.ndarray:
        """0/1 adjacency matrix of channel ``i`` (``n_total x n_total``)."""
        A = np.zeros((self.n_total, self.n_total))
        e = self.channels[i].edges
        if e:
            idx = np.array(sorted(e))
            A[idx[:, 0], idx[:, 1]] = 1.0
            A[idx[:, 1], idx[:, 0]] = 1.0
        return A

    def membership(self, i: int) -> np.ndarray:
        mask = np.zeros(self.n_total, dtype=bool)
        mask[list(self.channels[i].vertices)] = True
        return mask

    def n_edges(self) -> list:
        return [len(ch.edges) for ch in self.channels]

    def relabel(self, perm: Sequence[int]) -> "MultiplexGraph":
        """Return the graph with label ``u`` renamed ``perm[u]``."""
        perm = np.asarray(perm)
        chans = []
        for ch in self.channels:
            verts = frozenset(int(perm[v]) for v in ch.vertices)
            edges = frozenset(_norm_edge(perm[u], perm[v]) for u, v in ch.edges)
            chans.append(Channel(verts, edges))
        return MultiplexGraph(self.n_total, tuple(chans))


def _norm_edge(u, v):
    u, v = int(u), int(v)
    return (u, v) if u < v else (v, u)


def validate_multiplex(n_total: int, channels: Iterable) -> MultiplexGraph:
    """Validate raw channel data and build a :class:`MultiplexGraph`.

    Parameters
    ----------
    n_total : int
        Size of the global label space ``range(n_total)``.
    channels : iterable of (vertex_set, edges)
        ``vertex_set`` is an iterable of labels (may be ``None``); ``edges``
        an iterable of label pairs. Edge endpoints are added to the channel's
        vertex set.

    Raises
    ------
    LabelOutOfRange, SelfLoop, UnionIncomplete, EmptyChannelIntersection
    """
    n_total = int(n_total)
    if n_total < 1:
        raise ValidationError(f"n_total must be positive, got {n_total}")
    chans = []
    for ci, (verts, edges) in enumerate(channels):
        vset = set()
        for v in verts or ():
            v = int(v)
            if not 0 <= v < n_total:
                raise LabelOutOfRange(f"channel {ci}: label {v} outside [0, {n_total})")
            vset.add(v)
        eset = set()
        for e in edges or ():
            if len(e) != 2:
                raise ValidationError(
                    f"channel {ci}: edge {tuple(e)!r} is not a label pair; "
                    "weighted/attributed edges are not supported")
            u, v = int(e[0]), int(e[1])
            for x in (u, v):
                if not 0 <= x < n_total:
                    raise LabelOutOfRange(
                        f"channel {ci}: label {x} outside [0, {n_total})")
            if u == v:
                raise SelfLoop(f"channel {ci}: self-loop at {u}")
            eset.add(_norm_edge(u, v))
            vset.update((u, v))
        chans.append(Channel(frozenset(vset), frozenset(eset)))
    if not chans:
        raise ValidationError("a multiplex graph needs at least one channel")
    union = set().union(*(ch.vertices for ch in chans))
    if len(union) != n_total:
        missing = sorted(set(range(n_total)) - union)[:5]
        raise UnionIncomplete(f"labels {missing}... appear in no channel")
    common = set(chans[0].vertices).intersection(*(ch.vertices for ch in chans[1:]))
    if not common:
        raise EmptyChannelIntersection("no label is present in every channel")
    return MultiplexGraph(n_total, tuple(chans))


def from_adjacency(mats, vertex_sets=None) -> MultiplexGraph:
    """Build a validated multiplex graph from 0/1 adjacency matrices."""
    mats = [np.asarray(a) for a in mats]
    n = mats[0].shape[0]
    raw = []
    for i, a in enumerate(mats):
        iu, ju = np.nonzero(np.triu(a, 1))
        verts = range(n) if vertex_sets is None else vertex_sets[i]
        raw.append((verts, zip(iu.tolist(), ju.tolist())))
    return validate_multiplex(n, raw)


class PaddingKind(str, Enum):
    NAIVE = "naive"
    CENTERED = "centered"
    GENERALIZED = "generalized"


class Role(str, Enum):
    TEMPLATE = "template"
    BACKGROUND = "background"


@dataclass(frozen=True)
class PaddingScheme:
    """Padding regime. ``w`` is only meaningful for the generalized scheme."""

    kind: PaddingKind
    w: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", PaddingKind(self.kind))
        if not 0.0 <= self.w <= 1.0:
            raise ValidationError(f"padding weight w must lie in [0, 1], got {self.w}")

    @classmethod
    def generalized(cls, w: float) -> "PaddingScheme":
        return cls(PaddingKind.GENERALIZED, float(w))

    def non_edge_value(self, role: Role) -> float:
        if self.kind is PaddingKind.NAIVE:
            return 0.0
        if self.kind is PaddingKind.CENTERED or Role(role) is Role.BACKGROUND:
            return -1.0
        return -self.w

    def __str__(self):
        if self.kind is PaddingKind.GENERALIZED:
            return f"generalized(w={self.w:g})"
        return self.kind.value


NAIVE = PaddingScheme(PaddingKind.NAIVE)
CENTERED = PaddingScheme(PaddingKind.CENTERED)


@dataclass(frozen=True)
class PaddedMultiplex:
    """Stack of ``c`` symmetric hollow ``order x order`` weighted matrices."""

    matrices: np.ndarray = field(repr=False)
    scheme: PaddingScheme
    role: Role

    @property
    def order(self) -> int:
        return self.matrices.shape[1]

    @property
    def c(self) -> int:
        return self.matrices.shape[0]

    @cached_property
    def sq_norms(self) -> np.ndarray:
        """Per-channel squared Frobenius norms."""
        return np.einsum("ijk,ijk->i", self.matrices, self.matrices)

    @classmethod
    def from_matrices(cls, mats, scheme=CENTERED, role=Role.TEMPLATE):
        arr = np.array(mats, dtype=float)
        if arr.ndim == 2:
            arr = arr[None]
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise OrderMismatch(f"expected a stack of square matrices, got shape {arr.shape}")
        arr.setflags(write=False)
        return cls(arr, scheme, Role(role))


def pad(g: MultiplexGraph, target_order: int, scheme: PaddingScheme = CENTERED,
        role: Role = Role.TEMPLATE) -> PaddedMultiplex:
    """Weighted adjacency matrices of ``g`` under a padding scheme.

    Edges become 1, non-edges between two channel members become the
    scheme's non-edge value, and every entry touching a label absent from the
    channel (including the labels ``n_total..target_order-1``) is 0.
    """
    if target_order < g.n_total:
        raise TargetOrderTooSmall(f"target order {target_order} < n_total {g.n_total}")
    role = Role(role)
    nev = scheme.non_edge_value(role)
    out = np.zeros((g.c, target_order, target_order))
    for i in range(g.c):
        mask = np.zeros(target_order)
        mask[list(g.channels[i].vertices)] = 1.0
        M = out[i]
        if nev != 0.0:
            M[:] = nev * np.outer(mask, mask)
        e = g.channels[i].edges
        if e:
            idx = np.array(sorted(e))
            M[idx[:, 0], idx[:, 1]] = 1.0
            M[idx[:, 1], idx[:, 0]] = 1.0
        np.fill_diagonal(M, 0.0)
    out.setflags(write=False)
    return PaddedMultiplex(out, scheme, role)


def embed_oplus_zero(m: np.ndarray, target_order: int) -> np.ndarray:
    """Direct sum ``m (+) 0`` padded with zeros up to ``target_order``."""
    m = np.asarray(m)
    k = m.shape[0]
    if target_order < k:
        raise TargetOrderTooSmall(f"target order {target_order} < matrix side {k}")
    out = np.zeros((target_order, target_order), dtype=np.result_type(m, float))
    out[:k, :k] = m
    return out


def channel_weights(weights, c: int) -> np.ndarray:
    """Channel weights as an array; ``None`` means all ones."""
    if weights is None:
        return np.ones(c)
    lam = np.asarray(weights, dtype=float).reshape(-1)
    if lam.size == 1 and c > 1:
        lam = np.full(c, lam[0])
    if lam.size != c:
        raise ChannelCountMismatch(f"{lam.size} weights for {c} channels")
    if not np.all(lam > 0) or not np.all(np.isfinite(lam)):
        raise ValidationError("channel weights must be finite and strictly positive")
    return lam


def perm_matrix(perm: Sequence[int], n: int | None = None) -> np.ndarray:
    """Permutation matrix with ``P[u, perm[u]] = 1``."""
    perm = np.asarray(perm, dtype=int)
    n = len(perm) if n is None else n
    P = np.zeros((len(perm), n))
    P[np.arange(len(perm)), perm] = 1.0
    return P


def _check_pair(tpl: PaddedMultiplex, bg: PaddedMultiplex):
    if tpl.c != bg.c:
        raise ChannelCountMismatch(f"template has {tpl.c} channels, background {bg.c}")
    if tpl.order > bg.order:
        raise OrderMismatch(f"template order {tpl.order} exceeds background order {bg.order}")


def objective(tpl: PaddedMultiplex, bg: PaddedMultiplex, perm: Sequence[int],
              weights=None) -> float:
    """Weighted multiplex matching objective ``sum_i l_i ||(A_i (+) 0) P - P B_i||_F^2``.

    ``perm`` may be a full permutation of the background labels or just its
    restriction to the template labels; the value depends only on the latter.
    """
    _check_pair(tpl, bg)
    lam = channel_weights(weights, tpl.c)
    perm = np.asarray(perm, dtype=int)
    m, n = tpl.order, bg.order
    if perm.ndim != 1 or not m <= len(perm) <= n:
        raise OrderMismatch(f"permutation of length {len(perm)} for orders ({m}, {n})")
    sig = perm[:m]
    total = 0.0
    for i in range(tpl.c):
        B = bg.matrices[i]
        Bsig = B[np.ix_(sig, sig)]
        inside = np.sum((tpl.matrices[i] - Bsig) ** 2)
        # Entries of P B P^T outside the template block meet zeros of A (+) 0.
        outside = bg.sq_norms[i] - np.sum(Bsig * Bsig)
        total += lam[i] * (inside + outside)
    return float(total)

"""Exhaustive-enumeration oracles for small instances.

Two permutations are equivalent when they agree on the template labels;
the objective and X_P are class functions, so enumerating one
representative per class (an injection of the template labels into the
background labels) is enough.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..errors import OrderTooLargeForEnumeration, ValidationError
from ..generators import MsModelSpec, gen_ms_instance
from ..multiplex import CENTERED, PaddedMultiplex, Role, channel_weights, objective, pad

__all__ = [
    "MAX_ENUM_ORDER",
    "injections",
    "complete_injection",
    "enumerate_perm_classes",
    "BruteForceResult",
    "brute_force_global_min",
    "full_enumeration_min",
    "objective_all_injections",
    "has_trivial_automorphism_group",
    "MatchabilityTally",
    "ms_matchability_frequency",
]

MAX_ENUM_ORDER = 8


def _guard(n):
    if n > MAX_ENUM_ORDER:
        raise OrderTooLargeForEnumeration(f"order {n} exceeds the enumeration limit {MAX_ENUM_ORDER}")


def injections(n: int, m: int) -> np.ndarray:
    """All ``n!/(n-m)!`` injections of ``range(m)`` into ``range(n)``."""
    _guard(n)
    if not 0 <= m <= n:
        raise ValidationError("need 0 <= m <= n")
    arr = np.array(list(itertools.permutations(range(n), m)), dtype=int)
    return arr.reshape(-1, m)


def complete_injection(inj, n: int) -> np.ndarray:
    """Canonical full permutation extending ``inj``: leftover labels fill
    the positions ``m..n-1`` in increasing order."""
    inj = np.asarray(inj, dtype=int)
    return np.concatenate([inj, np.setdiff1d(np.arange(n), inj)])


def enumerate_perm_classes(n: int, m: int, k: int):
    """Yield one full permutation per class of permutations moving exactly
    ``k`` of the template labels ``range(m)``."""
    _guard(n)
    if not 0 <= k <= m <= n:
        raise ValidationError("need 0 <= k <= m <= n")
    ident = np.arange(m)
    for inj in itertools.permutations(range(n), m):
        inj = np.array(inj, dtype=int)
        if int(np.sum(inj != ident)) == k:
            yield complete_injection(inj, n)


@dataclass(frozen=True)
class BruteForceResult:
    min_objective: float
    minimizers_mod_equiv: list  # arrays of length m
    in_target_set: bool
    n_classes: int


def objective_all_injections(tpl: PaddedMultiplex, bg: PaddedMultiplex, weights=None,
                             inj: np.ndarray | None = None) -> tuple:
    """Objective value of every injection; returns ``(injections, values)``."""
    m, n = tpl.order, bg.order
    if inj is None:
        inj = injections(n, m)
    lam = channel_weights(weights, tpl.c)
    vals = np.zeros(len(inj))
    rows, cols = inj[:, :, None], inj[:, None, :]
    for i in range(tpl.c):
        A, B = tpl.matrices[i], bg.matrices[i]
        Bsub = B[rows, cols]
        inside = np.sum((A[None] - Bsub) ** 2, axis=(1, 2))
        outside = np.sum(B * B) - np.sum(Bsub * Bsub, axis=(1, 2))
        vals += lam[i] * (inside + outside)
    return inj, vals


def brute_force_global_min(tpl: PaddedMultiplex, bg: PaddedMultiplex, weights=None,
                           rtol: float = 1e-12) -> BruteForceResult:
    """Exact minimum of the multiplex objective by enumerating every class.

    ``in_target_set`` is true when every minimizer fixes each template label.
    """
    _guard(bg.order)
    inj, vals = objective_all_injections(tpl, bg, weights)
    best = float(vals.min())
    tol = rtol * max(1.0, abs(best))
    idx = np.flatnonzero(vals <= best + tol)
    minimizers = [inj[i].copy() for i in idx]
    ident = np.arange(tpl.order)
    in_target = all(np.array_equal(x, ident) for x in minimizers)
    return BruteForceResult(best, minimizers, in_target, len(inj))


def full_enumeration_min(tpl: PaddedMultiplex, bg: PaddedMultiplex, weights=None) -> float:
    """Minimum over all ``n!`` full permutations using the plain objective."""
    _guard(bg.order)
    return min(objective(tpl, bg, np.array(p), weights)
               for p in itertools.permutations(range(bg.order)))


def has_trivial_automorphism_group(mats) -> bool:
    """True when no non-identity relabeling of ``range(m)`` fixes every
    channel matrix simultaneously."""
    mats = np.asarray(mats)
    if mats.ndim == 2:
        mats = mats[None]
    m = mats.shape[1]
    _guard(m)
    ident = tuple(range(m))
    for p in itertools.permutations(range(m)):
        if p == ident:
            continue
        p = np.array(p)
        if all(np.array_equal(M[np.ix_(p, p)], M) for M in mats):
            return False
    return True


def n_classes(n: int, m: int) -> int:
    return math.perm(n, m)


@dataclass(frozen=True)
class MatchabilityTally:
    """Outcome counts over replicates.

    ``strict`` counts replicates where every global minimizer fixes the
    template labels; ``weak`` counts those where the identity is at least
    one of the minimizers.
    """

    replicates: int
    strict: int
    weak: int
    redraws: int

    @property
    def strict_frequency(self) -> float:
        return self.strict / self.replicates

    @property
    def weak_frequency(self) -> float:
        return self.weak / self.replicates


def ms_matchability_frequency(spec: MsModelSpec, replicates: int, rng: np.random.Generator,
                              *, screen: bool = True) -> MatchabilityTally:
    """Brute-force matchability frequency over MS instances.

    With ``screen``, sources whose template block has a non-trivial
    automorphism group are redrawn, since such a symmetry makes a second
    minimizer for reasons unrelated to noise. Screening is skipped when every
    template channel is pure noise (``s_i = 1/2``): the observations are then
    independent of the sources and no source can be ruled out.
    """
    _guard(spec.n)
    screen = screen and any(si < 0.5 for si in spec.s)
    ident = np.arange(spec.m)
    strict = weak = redraws = 0
    for _ in range(replicates):
        while True:
            tpl, bg, _, (C, _) = gen_ms_instance(spec, rng, return_sources=True)
            if not screen or has_trivial_automorphism_group(C):
                break
            redraws += 1
        res = brute_force_global_min(pad(tpl, spec.m, CENTERED),
                                     pad(bg, spec.n, CENTERED, Role.BACKGROUND))
        strict += res.in_target_set
        weak += any(np.array_equal(x, ident) for x in res.minimizers_mod_equiv)
    return MatchabilityTally(replicates, strict, weak, redraws)

"""Numeric evaluators for the matchability conditions of the MS and ME
models. Nothing here asserts the asymptotic statements; each function just
evaluates one inequality and reports both sides."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from .xp import DeltaCounts

__all__ = [
    "ConditionParams",
    "ConditionResult",
    "bad_channels",
    "check_condition_ms",
    "check_condition_me",
    "mcdiarmid_xp_tail",
    "delta1_concentration_prob",
    "me_delta_concentration_prob",
]


@dataclass(frozen=True)
class ConditionParams:
    alpha: float
    beta: float
    gamma: float | None = None
    xi: float | None = None
    model: str = "MS"

    def __post_init__(self):
        if self.alpha > 1:
            raise ValidationError("alpha must be <= 1")
        if not self.beta > 0:
            raise ValidationError("beta must be positive")
        for name in ("gamma", "xi"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValidationError(f"{name} must be positive")


@dataclass(frozen=True)
class ConditionResult:
    satisfied: bool
    lhs: float
    rhs: float
    strict: bool = False


def _ge(lhs, rhs):
    return ConditionResult(bool(lhs >= rhs), float(lhs), float(rhs), False)


def _gt(lhs, rhs):
    return ConditionResult(bool(lhs > rhs), float(lhs), float(rhs), True)


def bad_channels(s, q) -> set:
    """Channels whose template or background flip rate is exactly 1/2."""
    return {i for i, (si, qi) in enumerate(zip(s, q)) if si == 0.5 or qi == 0.5}


def _need_gamma(params):
    if params.gamma is None:
        raise ValidationError("this form needs gamma")
    return params.gamma


def check_condition_ms(params: ConditionParams, form: str = "counts", *, m: int, c: int | None = None,
                       k: int | None = None, counts: DeltaCounts | None = None, s=None, q=None,
                       p=None, bad=None, c1: int | None = None, c2: int | None = None) -> ConditionResult:
    """Evaluate an MS matchability condition.

    Forms
    -----
    ``"counts"``
        ``sum_{i not bad} (2|D1_i| + |D2_i|)(1-2s_i)(1-2q_i) >= k sqrt(672 m^(1+alpha) c / beta)``
    ``"er"``
        ``sum_{i not bad} p_i (1-2s_i)(1-2q_i) >= sqrt(6048 m^(alpha-1) c / beta)``
    ``"theorem"``
        ``(1/2-s)(1/2-q)(c1-c2) > gamma sqrt(m^(alpha-1) c)`` with scalar ``s, q``
    ``"good_only"``
        ``(1/2-s)(1/2-q) sqrt(c) > gamma sqrt(m^(alpha-1))``
    """
    a, b = params.alpha, params.beta
    if form == "counts":
        if counts is None or k is None:
            raise ValidationError("counts form needs counts and k")
        c = len(counts.per_channel) if c is None else c
        s, q = np.broadcast_to(s, c), np.broadcast_to(q, c)
        bad = bad_channels(s, q) if bad is None else set(bad)
        lhs = sum((2 * d1 + d2) * (1 - 2 * s[i]) * (1 - 2 * q[i])
                  for i, (_, d1, d2, _) in enumerate(counts.per_channel) if i not in bad)
        return _ge(lhs, k * math.sqrt(672 * m ** (1 + a) * c / b))
    if form == "er":
        s, q = np.atleast_1d(np.asarray(s, dtype=float)), np.atleast_1d(np.asarray(q, dtype=float))
        c = len(s) if c is None else c
        s, q, p = np.broadcast_to(s, c), np.broadcast_to(q, c), np.broadcast_to(p, c)
        bad = bad_channels(s, q) if bad is None else set(bad)
        lhs = sum(p[i] * (1 - 2 * s[i]) * (1 - 2 * q[i]) for i in range(c) if i not in bad)
        return _ge(lhs, math.sqrt(6048 * m ** (a - 1) * c / b))
    if form == "theorem":
        g = _need_gamma(params)
        if c is None:
            c = c1 + c2 + len(bad or ())
        return _gt((0.5 - s) * (0.5 - q) * (c1 - c2), g * math.sqrt(m ** (a - 1) * c))
    if form == "good_only":
        g = _need_gamma(params)
        return _gt((0.5 - s) * (0.5 - q) * math.sqrt(c), g * math.sqrt(m ** (a - 1)))
    raise ValidationError(f"unknown MS condition form {form!r}")


def check_condition_me(params: ConditionParams, form: str = "counts", *, m: int, c: int | None = None,
                       k: int | None = None, counts: DeltaCounts | None = None, s=None, q=None,
                       r=None, t=None, p: float | None = None, e1: float | None = None,
                       e2: float | None = None, c1=0, c2=0, c3=0, c4=0) -> ConditionResult:
    """Evaluate an ME matchability condition.

    Forms
    -----
    ``"counts"``
        ``|D1| sum 2(1-2s)(1-r-t) + |D2| sum 2(1-2q)(1-r-t) >= k sqrt(672 m^(1+alpha) c / beta)``
    ``"er"``
        ``p sum (1-s-q)(1-r-t) >= sqrt(6048 m^(alpha-1) c / beta)``
    ``"theorem"``
        ``p e1 e2 (c3 + c4 - c1 - c2) > gamma sqrt(m^(alpha-1) c)``
    """
    a, b = params.alpha, params.beta
    if form == "counts":
        if counts is None or counts.me_counts is None or k is None:
            raise ValidationError("counts form needs ME counts and k")
        s, q, r, t = (np.atleast_1d(np.asarray(x, dtype=float)) for x in (s, q, r, t))
        c = len(s) if c is None else c
        d1, d2 = counts.me_counts[:2]
        g = 1 - r - t
        lhs = d1 * np.sum(2 * (1 - 2 * s) * g) + d2 * np.sum(2 * (1 - 2 * q) * g)
        return _ge(lhs, k * math.sqrt(672 * m ** (1 + a) * c / b))
    if form == "er":
        s, q, r, t = (np.atleast_1d(np.asarray(x, dtype=float)) for x in (s, q, r, t))
        c = len(s) if c is None else c
        lhs = p * np.sum((1 - s - q) * (1 - r - t))
        return _ge(lhs, math.sqrt(6048 * m ** (a - 1) * c / b))
    if form == "theorem":
        g = _need_gamma(params)
        c = c1 + c2 + c3 + c4 if c is None else c
        return _gt(p * e1 * e2 * (c3 + c4 - c1 - c2), g * math.sqrt(m ** (a - 1) * c))
    raise ValidationError(f"unknown ME condition form {form!r}")


def mcdiarmid_xp_tail(t: float, c: int, m: int, k: int) -> float:
    """Bound on ``P(|X_P - E X_P| >= t)`` for ``P`` moving ``k`` template labels."""
    return min(1.0, 2 * math.exp(-2 * t * t / (192 * c * m * k)))


def delta1_concentration_prob(delta_size: int, p: float) -> float:
    """Lower bound on ``P(|D1| in (|D| p(1-p), 3|D| p(1-p)))`` in the ER MS setting."""
    return 1 - 2 * math.exp(-2 * delta_size * p * p * (1 - p) ** 2 / 8)


def me_delta_concentration_prob(delta_size: int, p: float) -> float:
    """ME analogue, for ``|D_j|`` in ``(|D| p(1-p)/2, 3|D| p(1-p)/2)``."""
    return 1 - 2 * math.exp(-2 * delta_size * p * p * (1 - p) ** 2 / 32)

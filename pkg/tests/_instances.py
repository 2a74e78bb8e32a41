"""Small random padded instances shared by the solver and lab tests."""

import numpy as np

from multiplexgm.multiplex import PaddedMultiplex, Role


def sym_pm1(rng, c, n, absent=0.0):
    """Random symmetric hollow stack with entries in {-1, 1} (some rows
    zeroed with probability ``absent``)."""
    X = np.triu(rng.choice([-1.0, 1.0], (c, n, n)), 1)
    X = X + X.transpose(0, 2, 1)
    if absent:
        for i in range(c):
            keep = (rng.random(n) >= absent).astype(float)
            X[i] *= np.outer(keep, keep)
    return X


def random_pair(rng, n, m=None, c=2, absent=0.0):
    m = n if m is None else m
    tpl = PaddedMultiplex.from_matrices(sym_pm1(rng, c, m, absent))
    bg = PaddedMultiplex.from_matrices(sym_pm1(rng, c, n, absent), role=Role.BACKGROUND)
    return tpl, bg


def random_ds(rng, n):
    """Convex combination of a few random permutation matrices."""
    w = rng.dirichlet(np.ones(4))
    P = np.zeros((n, n))
    for wk in w:
        P[np.arange(n), rng.permutation(n)] += wk
    return P

"""Multiplex graph matching matched filter (M-GMMF).

Pads template and background, runs M-FAQ from many random doubly
stochastic starts and ranks the resulting matchings by the padded
multiplex objective.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from ._parallel import master_seed, pmap, substream
from .errors import ChannelCountMismatch, NonInjectiveMatch, OrderMismatch
from .faq import (
    SeedSpec,
    SolverConfig,
    mfaq,
    random_ds_start,
    seeded_start,
    soft_seed_start,
)
from .multiplex import (
    CENTERED,
    MultiplexGraph,
    PaddingScheme,
    Role,
    objective,
    pad,
)

__all__ = [
    "MatchEntry",
    "MatchRanking",
    "mgmmf",
    "restart_start",
    "recovered_signal_stats",
    "induced_match_quality",
    "dedup_matchings",
]


@dataclass(frozen=True)
class MatchEntry:
    match: tuple  # background label per template label (0-based)
    objective: float
    restart_id: int
    recovery: tuple
    multiplicity: int = 1
    iterations: int = 0


@dataclass
class MatchRanking:
    entries: list = field(default_factory=list)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, k):
        return self.entries[k]

    @property
    def best(self) -> MatchEntry:
        return self.entries[0]

    def best_by_recovery(self) -> MatchEntry:
        """Entry with the highest channel-averaged edge recovery (ties go to
        the better objective)."""
        return max(self.entries, key=lambda e: (float(np.mean(e.recovery)), -e.objective, -e.restart_id))

    def to_records(self) -> list:
        return [
            {
                "rank": k + 1,
                "restart_id": e.restart_id,
                "multiplicity": e.multiplicity,
                "objective": e.objective,
                "match": [int(b) + 1 for b in e.match],
                "recovery": list(e.recovery),
            }
            for k, e in enumerate(self.entries)
        ]

    def to_json(self) -> str:
        return json.dumps(self.to_records(), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "MatchRanking":
        entries = [
            MatchEntry(
                match=tuple(int(b) - 1 for b in r["match"]),
                objective=float(r["objective"]),
                restart_id=int(r["restart_id"]),
                recovery=tuple(float(x) for x in r["recovery"]),
                multiplicity=int(r["multiplicity"]),
            )
            for r in sorted(json.loads(text), key=lambda r: r["rank"])
        ]
        return cls(entries)


def _check_match(match, m, n):
    match = np.asarray(match, dtype=int)
    if match.shape != (m,):
        raise NonInjectiveMatch(f"match must have length {m}")
    if np.any(match < 0) or np.any(match >= n) or np.unique(match).size != m:
        raise NonInjectiveMatch("match must be an injection into the background labels")
    return match


def recovered_signal_stats(tpl: MultiplexGraph, bg: MultiplexGraph, match) -> list:
    """Per-channel fraction of template edges whose image is a background
    edge in the same channel (1.0 for channels without template edges)."""
    if tpl.c != bg.c:
        raise ChannelCountMismatch(f"{tpl.c} vs {bg.c} channels")
    match = _check_match(match, tpl.n_total, bg.n_total)
    out = []
    for ct, cb in zip(tpl.channels, bg.channels):
        if not ct.edges:
            out.append(1.0)
            continue
        hit = 0
        for u, v in ct.edges:
            a, b = match[u], match[v]
            if (min(a, b), max(a, b)) in cb.edges:
                hit += 1
        out.append(hit / len(ct.edges))
    return out


def induced_match_quality(tpl: MultiplexGraph, bg: MultiplexGraph, match) -> list:
    """Per-channel fraction of template vertex pairs (both in the channel)
    whose edge/non-edge status agrees with the background at the image."""
    match = _check_match(match, tpl.n_total, bg.n_total)
    out = []
    for i, ct in enumerate(tpl.channels):
        verts = np.array(sorted(ct.vertices))
        if verts.size < 2:
            out.append(1.0)
            continue
        A = tpl.adjacency(i)[np.ix_(verts, verts)]
        B = bg.adjacency(i)[np.ix_(match[verts], match[verts])]
        iu = np.triu_indices(verts.size, 1)
        out.append(float(np.mean(A[iu] == B[iu])))
    return out


def restart_start(n: int, seeds: SeedSpec, rng: np.random.Generator, jitter: float = 0.1):
    """Random start for one restart, respecting hard and soft seeds."""
    if seeds.soft is not None:
        S = seeds.soft
        if S.shape[1] != n:
            raise OrderMismatch(f"soft seeds have {S.shape[1]} columns, background order is {n}")
        return soft_seed_start(S, jitter, rng, seeds.hard)
    free = random_ds_start(n - len(seeds.hard), rng)
    return seeded_start(n, seeds.hard, free)


def mgmmf(tpl: MultiplexGraph, bg: MultiplexGraph, scheme: PaddingScheme = CENTERED,
          cfg: SolverConfig | None = None, n_restarts: int = 100, seeds: SeedSpec | None = None,
          seed=0, *, threads=1, jitter: float = 0.1, return_traces: bool = False):
    """Run the matched filter.

    Parameters
    ----------
    tpl, bg : MultiplexGraph
        Template (``m`` labels) and background (``n >= m`` labels) with the
        same number of channels.
    scheme : PaddingScheme
        Padding used both for solving and for ranking.
    cfg : SolverConfig
    n_restarts : int
    seeds : SeedSpec, optional
    seed : int or numpy Generator
        Master seed; restart ``k`` draws from an independent substream keyed
        by ``k``.
    threads : int or "auto"
    jitter : float
        Perturbation size for soft-seeded starts.

    Returns
    -------
    MatchRanking
        Entries sorted by ``(objective, restart_id)``.
    """
    if tpl.c != bg.c:
        raise ChannelCountMismatch(f"template has {tpl.c} channels, background {bg.c}")
    if tpl.n_total > bg.n_total:
        raise OrderMismatch("template has more labels than the background")
    if n_restarts < 1:
        raise ValueError("n_restarts must be at least 1")
    cfg = cfg or SolverConfig()
    seeds = seeds or SeedSpec()
    base = master_seed(seed)
    n = bg.n_total
    A = pad(tpl, tpl.n_total, scheme, Role.TEMPLATE)
    B = pad(bg, n, scheme, Role.BACKGROUND)

    def one(k):
        rng = substream(base, k)
        p0 = restart_start(n, seeds, rng, jitter)
        perm, tr = mfaq(A, B, p0, cfg, seeds)
        match = perm[: tpl.n_total]
        entry = MatchEntry(
            match=tuple(int(x) for x in match),
            objective=objective(A, B, match, cfg.weights),
            restart_id=k,
            recovery=tuple(recovered_signal_stats(tpl, bg, match)),
            iterations=tr.iterations_used,
        )
        return entry, tr

    results = pmap(one, range(n_restarts), threads)
    entries = sorted((e for e, _ in results), key=lambda e: (e.objective, e.restart_id))
    ranking = MatchRanking(entries)
    if return_traces:
        return ranking, [tr for _, tr in results]
    return ranking


def dedup_matchings(r: MatchRanking) -> MatchRanking:
    """Collapse entries equal on the template labels, keeping the one with
    the lowest objective and summing multiplicities."""
    groups = {}
    order = []
    for e in sorted(r.entries, key=lambda e: (e.objective, e.restart_id)):
        key = tuple(e.match)
        if key in groups:
            groups[key] = replace(groups[key], multiplicity=groups[key].multiplicity + e.multiplicity)
        else:
            groups[key] = e
            order.append(key)
    return MatchRanking([groups[k] for k in order])

"""Monte Carlo harnesses for the correlated-ER multiplex experiments.

Every replicate draws from its own substream keyed by the channel
correlation profile and the replicate number, so a cell's results do not
depend on the rest of the grid, on the thread count, or on resuming a
partially written output. In particular a figure-2 cell with no
anti-correlated channels reproduces the figure-1 cell with the same
profile exactly.
"""

from __future__ import annotations

import csv
import time
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .._parallel import pmap, substream
from ..faq import SeedSpec, SolverConfig, flat_start, mfaq, seeded_start
from ..generators import CorrelatedErSpec, gen_correlated_er_pair, shuffle_background
from ..multiplex import CENTERED, Role, objective, pad

__all__ = [
    "ROW_FIELDS",
    "SUMMARY_FIELDS",
    "Cell",
    "rho_profile",
    "figure1_cells",
    "figure2_cells",
    "run_replicate",
    "run_cells",
    "run_figure1_experiment",
    "run_figure2_experiment",
    "summarize",
    "write_rows_csv",
    "read_rows_csv",
    "write_summary_csv",
]

ROW_FIELDS = ["experiment", "c", "rho_profile", "c_b", "replicate", "seed_count",
              "accuracy_nonseed", "accuracy_all", "objective", "wall_time_ms"]
SUMMARY_FIELDS = ["experiment", "c", "rho_profile", "c_b", "replicates",
                  "mean_accuracy_nonseed", "std_accuracy_nonseed",
                  "mean_accuracy_all", "std_accuracy_all"]


def rho_profile(rhos) -> str:
    """Run-length string such as ``+0.5*8,-0.5*2``."""
    parts, prev, run = [], None, 0
    for r in list(rhos) + [None]:
        if r == prev:
            run += 1
            continue
        if prev is not None:
            parts.append(f"{prev:+g}*{run}")
        prev, run = r, 1
    return ",".join(parts)


@dataclass(frozen=True)
class Cell:
    experiment: str
    rhos: tuple
    c_b: int = 0

    @property
    def c(self) -> int:
        return len(self.rhos)

    @property
    def profile(self) -> str:
        return rho_profile(self.rhos)

    @property
    def key(self) -> int:
        return zlib.crc32(self.profile.encode())


def figure1_cells(c_values, rho_values) -> list:
    return [Cell("figure1", (float(rho),) * int(c)) for rho in rho_values for c in c_values]


def figure2_cells(r_values, cb_values, c: int = 10) -> list:
    cells = []
    for r in r_values:
        for cb in cb_values:
            cb = int(cb)
            if not 0 <= cb <= c:
                raise ValueError(f"c_b={cb} outside 0..{c}")
            rhos = (float(r),) * (c - cb) + (-float(r),) * cb
            cells.append(Cell("figure2", rhos, cb))
    return cells


def run_replicate(cell: Cell, replicate: int, *, seed: int, n: int = 100, p: float = 0.5,
                  n_seeds: int = 10, cfg: SolverConfig | None = None,
                  record_time: bool = False) -> dict:
    """One Monte Carlo replicate: draw a correlated pair, hide the alignment
    behind a random relabeling, solve seeded M-FAQ from the barycenter of the
    unseeded block, and score the recovered alignment."""
    t0 = time.perf_counter()
    rng = substream(seed, cell.key, replicate)
    G, H, truth = gen_correlated_er_pair(CorrelatedErSpec(n, p, cell.rhos, cell.c), rng)
    H, truth = shuffle_background(H, truth, rng)
    hard = {u: int(truth[u]) for u in range(n_seeds)}
    seeds = SeedSpec(hard=hard)
    A = pad(G, n, CENTERED, Role.TEMPLATE)
    B = pad(H, n, CENTERED, Role.BACKGROUND)
    p0 = seeded_start(n, hard, flat_start(n - n_seeds))
    perm, _ = mfaq(A, B, p0, cfg or SolverConfig(), seeds)
    correct = perm[:n] == truth
    free = slice(n_seeds, n)
    elapsed = (time.perf_counter() - t0) * 1000.0
    return {
        "experiment": cell.experiment,
        "c": cell.c,
        "rho_profile": cell.profile,
        "c_b": cell.c_b,
        "replicate": replicate,
        "seed_count": n_seeds,
        "accuracy_nonseed": float(np.mean(correct[free])) if n > n_seeds else 1.0,
        "accuracy_all": float(np.mean(correct)),
        "objective": objective(A, B, perm),
        "wall_time_ms": f"{elapsed:.1f}" if record_time else "",
    }


def _row_key(row) -> tuple:
    return (row["experiment"], int(row["c"]), row["rho_profile"], int(row["c_b"]), int(row["replicate"]))


def run_cells(cells, replicates: int, *, seed: int = 0, threads=1, done=None, **kw) -> list:
    """Run every (cell, replicate) not already in ``done``; returns all rows
    (old and new) in grid order."""
    done = {_row_key(r): r for r in (done or [])}
    jobs = []
    for cell in cells:
        for rep in range(replicates):
            key = (cell.experiment, cell.c, cell.profile, cell.c_b, rep)
            if key not in done:
                jobs.append((cell, rep))
    new = pmap(lambda job: run_replicate(job[0], job[1], seed=seed, **kw), jobs, threads)
    for row in new:
        done[_row_key(row)] = row
    order = {(c.experiment, c.c, c.profile, c.c_b): i for i, c in enumerate(cells)}
    rows = list(done.values())
    rows.sort(key=lambda r: (order.get(_row_key(r)[:4], len(order)), _row_key(r)))
    return rows


def run_figure1_experiment(c_values=range(1, 11), rho_values=(0.1, 0.2, 0.3, 0.4, 0.5), *,
                           replicates: int = 100, seed: int = 0, n: int = 100, p: float = 0.5,
                           n_seeds: int = 10, threads=1, cfg=None, done=None,
                           record_time: bool = False) -> list:
    """Accuracy of seeded M-FAQ versus channel count at fixed correlation."""
    cells = figure1_cells(c_values, rho_values)
    return run_cells(cells, replicates, seed=seed, threads=threads, done=done, n=n, p=p,
                     n_seeds=n_seeds, cfg=cfg, record_time=record_time)


def run_figure2_experiment(r_values=(0.1, 0.2, 0.3, 0.4, 0.5), cb_values=range(0, 10), *,
                           c: int = 10, replicates: int = 100, seed: int = 0, n: int = 100,
                           p: float = 0.5, n_seeds: int = 10, threads=1, cfg=None, done=None,
                           record_time: bool = False) -> list:
    """Accuracy versus the number ``c_b`` of anti-correlated channels."""
    cells = figure2_cells(r_values, cb_values, c)
    return run_cells(cells, replicates, seed=seed, threads=threads, done=done, n=n, p=p,
                     n_seeds=n_seeds, cfg=cfg, record_time=record_time)


def summarize(rows) -> list:
    groups = {}
    for r in rows:
        groups.setdefault(_row_key(r)[:4], []).append(r)
    out = []
    for (exp, c, prof, cb), rs in groups.items():
        a = np.array([float(r["accuracy_nonseed"]) for r in rs])
        b = np.array([float(r["accuracy_all"]) for r in rs])
        out.append({
            "experiment": exp, "c": c, "rho_profile": prof, "c_b": cb, "replicates": len(rs),
            "mean_accuracy_nonseed": float(a.mean()),
            "std_accuracy_nonseed": float(a.std(ddof=1)) if len(a) > 1 else 0.0,
            "mean_accuracy_all": float(b.mean()),
            "std_accuracy_all": float(b.std(ddof=1)) if len(b) > 1 else 0.0,
        })
    return out


def _write(path, fields, rows):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})


def write_rows_csv(rows, path) -> None:
    _write(path, ROW_FIELDS, rows)


def write_summary_csv(summary, path) -> None:
    _write(path, SUMMARY_FIELDS, summary)


def read_rows_csv(path) -> list:
    path = Path(path)
    if not path.exists():
        return []
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        for k in ("c", "c_b", "replicate", "seed_count"):
            r[k] = int(r[k])
        for k in ("accuracy_nonseed", "accuracy_all", "objective"):
            r[k] = float(r[k])
    return rows

"""Text formats: multiplex edge lists, truth sidecars, seed files.

Multiplex edge list (``.mx``)::

    # comment
    n_total c
    V channel label        # declare membership of an isolated vertex
    channel src dst        # undirected edge

All labels and channel indices are 1-based on disk.
"""

from __future__ import annotations

import csv
import io as _io
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError
from .multiplex import MultiplexGraph, validate_multiplex

__all__ = [
    "parse_mx",
    "read_mx",
    "format_mx",
    "write_mx",
    "read_truth",
    "write_truth",
    "read_hard_seeds",
    "read_soft_seeds",
]


def _lines(text):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def parse_mx(text: str) -> MultiplexGraph:
    it = _lines(text)
    try:
        lineno, head = next(it)
    except StopIteration:
        raise ParseError("empty multiplex file") from None
    if len(head) != 2:
        raise ParseError(f"line {lineno}: header must be 'n_total c'")
    try:
        n_total, c = int(head[0]), int(head[1])
    except ValueError:
        raise ParseError(f"line {lineno}: non-integer header") from None
    if c < 1:
        raise ParseError(f"line {lineno}: channel count must be positive")
    verts = [set() for _ in range(c)]
    edges = [set() for _ in range(c)]
    for lineno, tok in it:
        if len(tok) != 3:
            raise ParseError(f"line {lineno}: expected 3 fields, got {len(tok)}")
        try:
            if tok[0] in ("V", "v"):
                ch, lab = int(tok[1]), int(tok[2])
                _check_channel(ch, c, lineno)
                verts[ch - 1].add(lab - 1)
            else:
                ch, u, v = (int(t) for t in tok)
                _check_channel(ch, c, lineno)
                edges[ch - 1].add((u - 1, v - 1))
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer field") from None
    return validate_multiplex(n_total, zip(verts, edges))


def _check_channel(ch, c, lineno):
    if not 1 <= ch <= c:
        raise ParseError(f"line {lineno}: channel {ch} outside 1..{c}")


def read_mx(path) -> MultiplexGraph:
    return parse_mx(Path(path).read_text())


def format_mx(g: MultiplexGraph) -> str:
    out = [f"{g.n_total} {g.c}"]
    for i, ch in enumerate(g.channels, 1):
        touched = {x for e in ch.edges for x in e}
        out.extend(f"V {i} {v + 1}" for v in sorted(ch.vertices - touched))
        out.extend(f"{i} {u + 1} {v + 1}" for u, v in sorted(ch.edges))
    return "\n".join(out) + "\n"


def write_mx(g: MultiplexGraph, path) -> None:
    Path(path).write_text(format_mx(g))


def write_truth(truth, path) -> None:
    """``template_label background_label`` per line, 1-based."""
    lines = ["# template_label background_label"]
    lines += [f"{u + 1} {int(b) + 1}" for u, b in enumerate(truth)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_truth(path) -> np.ndarray:
    pairs = []
    for lineno, tok in _lines(Path(path).read_text()):
        if len(tok) != 2:
            raise ParseError(f"line {lineno}: expected 'template background'")
        pairs.append((int(tok[0]) - 1, int(tok[1]) - 1))
    pairs.sort()
    if [u for u, _ in pairs] != list(range(len(pairs))):
        raise ParseError("truth file must list every template label exactly once")
    return np.array([b for _, b in pairs], dtype=int)


def read_hard_seeds(path) -> dict:
    seeds = {}
    for lineno, tok in _lines(Path(path).read_text()):
        if len(tok) != 2:
            raise ParseError(f"line {lineno}: expected 'template background'")
        u, b = int(tok[0]) - 1, int(tok[1]) - 1
        if u in seeds:
            raise ParseError(f"line {lineno}: template label {u + 1} seeded twice")
        seeds[u] = b
    return seeds


def read_soft_seeds(path, m: int, n: int) -> np.ndarray:
    """Read ``template_label,background_label,weight`` triples into an
    ``m x n`` row-stochastic matrix. Template rows without any triple are
    flat; other rows are normalized to sum to one.
    """
    S = np.zeros((m, n))
    text = Path(path).read_text()
    rows = csv.reader(l for l in _io.StringIO(text) if l.strip() and not l.lstrip().startswith("#"))
    for k, row in enumerate(rows, 1):
        if len(row) != 3:
            raise ParseError(f"soft seed row {k}: expected 3 fields")
        try:
            u, b, wgt = int(row[0]) - 1, int(row[1]) - 1, float(row[2])
        except ValueError:
            if k == 1:
                continue  # header
            raise ParseError(f"soft seed row {k}: malformed") from None
        if not (0 <= u < m and 0 <= b < n):
            raise ParseError(f"soft seed row {k}: label out of range")
        if wgt < 0 or not np.isfinite(wgt):
            raise ValidationError(f"soft seed row {k}: weight must be nonnegative")
        S[u, b] += wgt
    sums = S.sum(axis=1)
    empty = sums == 0
    S[empty] = 1.0 / n
    S[~empty] /= sums[~empty, None]
    return S

"""Exact (r, s)-robustness by exhaustive enumeration of disjoint subset pairs.

A pair of disjoint subsets is encoded as a ternary labeling of the vertices
(0 = outside, 1 = in S1, 2 = in S2) with index ``sum(label[v] * 3**v)``.
Labelings are scanned in increasing index; a labeling counts as a pair only
when both sides are non-empty and the lowest labeled vertex sits in S1, so
each unordered pair is seen exactly once.

Per-subset quantities (``|X^r(S)|`` and whether ``X^r(S) == S``) are tabulated
once for all ``2**n`` subsets, after which each chunk of ``3**12`` labelings
is checked with a handful of vectorized lookups.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import DomainError
from .graph import CommGraph

DEFAULT_CAP = 16
_CHUNK_DIGITS = 12


class GraphTooLarge(DomainError):
    pass


class InvalidSubset(DomainError):
    pass


@dataclass(frozen=True)
class SubsetPair:
    s1: frozenset
    s2: frozenset

    def __post_init__(self):
        object.__setattr__(self, "s1", frozenset(self.s1))
        object.__setattr__(self, "s2", frozenset(self.s2))
        if not self.s1 or not self.s2:
            raise InvalidSubset("both subsets must be non-empty")
        if self.s1 & self.s2:
            raise InvalidSubset("subsets must be disjoint")


@dataclass(frozen=True)
class RobustnessReport:
    r: int
    s: int
    robust: bool
    witness: SubsetPair | None
    pairs_checked: int

    def to_record(self) -> dict:
        return {
            "r": self.r,
            "s": self.s,
            "robust": self.robust,
            "witness": None if self.witness is None else {
                "s1": sorted(self.witness.s1),
                "s2": sorted(self.witness.s2),
            },
            "pairs_checked": self.pairs_checked,
        }


def total_pairs(n: int) -> int:
    """Number of unordered pairs of non-empty disjoint subsets of n vertices."""
    return (3 ** n - 2 ** (n + 1) + 1) // 2


def x_set(g: CommGraph, subset: Iterable[int], r: int) -> frozenset:
    """Vertices of ``subset`` with at least ``r`` neighbors outside it."""
    sub = frozenset(subset)
    if any(not isinstance(v, (int, np.integer)) or not 0 <= v < g.n for v in sub):
        raise InvalidSubset(f"subset {sorted(sub)} not contained in [0, {g.n})")
    if r < 0:
        raise DomainError(f"r must be >= 0, got {r}")
    return frozenset(v for v in sub if len(g.adjacency[v] - sub) >= r)


def violates(g: CommGraph, pair: SubsetPair, r: int, s: int) -> bool:
    """True when ``pair`` breaks all three robustness conditions."""
    x1, x2 = x_set(g, pair.s1, r), x_set(g, pair.s2, r)
    return len(x1) < len(pair.s1) and len(x2) < len(pair.s2) and len(x1) + len(x2) < s


def _check_args(g, r, s, cap):
    if r < 1 or s < 1:
        raise DomainError(f"r and s must be >= 1, got r={r}, s={s}")
    if g.n < 1:
        raise DomainError("graph has no vertices")
    if g.n > cap:
        raise GraphTooLarge(
            f"n={g.n} exceeds the enumeration cap {cap}; 3^{g.n} labelings would be "
            f"checked. Raise the cap explicitly if this is intended.")


def _subset_tables(g: CommGraph, r: int):
    n = g.n
    masks = np.arange(1 << n, dtype=np.int64)
    popcount = np.zeros(1 << n, dtype=np.int64)
    for v in range(n):
        popcount += (masks >> v) & 1
    xcount = np.zeros(1 << n, dtype=np.int64)
    universe = (1 << n) - 1
    for v, adj in enumerate(g.adjacency_masks):
        inside = (masks >> v) & 1
        outside_nbrs = popcount[adj & (universe ^ masks)]
        xcount += inside & (outside_nbrs >= r)
    return xcount, xcount == popcount


def _low_labelings(c):
    s1 = np.zeros(1, dtype=np.int64)
    s2 = np.zeros(1, dtype=np.int64)
    for v in range(c):
        bit = np.int64(1 << v)
        s1 = np.concatenate([s1, s1 | bit, s1])
        s2 = np.concatenate([s2, s2, s2 | bit])
    return s1, s2


def _high_masks(h, c, n):
    h1 = h2 = 0
    for v in range(c, n):
        h, d = divmod(h, 3)
        if d == 1:
            h1 |= 1 << v
        elif d == 2:
            h2 |= 1 << v
    return h1, h2


def is_rs_robust(g: CommGraph, r: int, s: int, *, cap: int = DEFAULT_CAP,
                 audit: bool = False, workers: int = 1) -> RobustnessReport:
    """Decide (r, s)-robustness exactly.

    On failure the witness is the violating pair with the smallest labeling
    index, which is what a sequential scan would stop at. ``pairs_checked``
    counts pairs scanned up to and including the witness, or every pair when
    the graph is robust or ``audit`` is set.
    """
    _check_args(g, r, s, cap)
    n = g.n
    xcount, full = _subset_tables(g, r)
    c = min(n, _CHUNK_DIGITS)
    low1, low2 = _low_labelings(c)
    chunk = 3 ** c
    n_high = 3 ** (n - c)

    def scan(h):
        h1, h2 = _high_masks(h, c, n)
        s1, s2 = low1 | h1, low2 | h2
        valid = (s1 != 0) & (s2 != 0) & ((s1 & -s1) < (s2 & -s2))
        bad = valid & ~full[s1] & ~full[s2] & (xcount[s1] + xcount[s2] < s)
        hits = np.flatnonzero(bad)
        if hits.size == 0:
            return int(np.count_nonzero(valid)), None
        first = int(hits[0])
        upto = int(np.count_nonzero(valid[:first + 1]))
        return int(np.count_nonzero(valid)), (first, upto, int(s1[first]), int(s2[first]))

    checked = 0
    witness = None
    batch = max(1, int(workers))
    pool = ThreadPoolExecutor(batch) if batch > 1 else None
    try:
        for start in range(0, n_high, batch):
            hs = range(start, min(start + batch, n_high))
            results = list(pool.map(scan, hs)) if pool else [scan(h) for h in hs]
            for count, hit in results:
                if witness is None and hit is not None:
                    _, upto, m1, m2 = hit
                    witness = (m1, m2)
                    if not audit:
                        checked += upto
                        break
                checked += count
            if witness is not None and not audit:
                break
    finally:
        if pool:
            pool.shutdown()

    if witness is None:
        return RobustnessReport(r, s, True, None, checked)
    m1, m2 = witness
    pair = SubsetPair(frozenset(v for v in range(n) if m1 >> v & 1),
                      frozenset(v for v in range(n) if m2 >> v & 1))
    return RobustnessReport(r, s, False, pair, checked)


def is_r_robust(g: CommGraph, r: int, *, cap: int = DEFAULT_CAP) -> bool:
    return is_rs_robust(g, r, 1, cap=cap).robust


def max_equal_rs(g: CommGraph, *, cap: int = DEFAULT_CAP, workers: int = 1) -> int:
    """Largest r with the graph (r, r)-robust, searching down from ceil(n/2).

    Returns 0 when the graph is not even (1, 1)-robust.
    """
    _check_args(g, 1, 1, cap)
    for r in range(math.ceil(g.n / 2), 0, -1):
        if is_rs_robust(g, r, r, cap=cap, workers=workers).robust:
            return r
    return 0

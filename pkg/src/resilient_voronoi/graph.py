"""Communication graphs built from a triangulation and their k-hop extensions."""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np

from .errors import DomainError, FormatError, InvalidVertex
from .geometry import Triangulation, delaunay


class NotBaseGraph(DomainError):
    pass


class DisconnectedDeltaGraph(DomainError):
    pass


def _normalize(edges, n):
    out = set()
    for u, v in edges:
        u, v = int(u), int(v)
        if u == v:
            raise DomainError(f"self-loop at vertex {u}")
        if not (0 <= u < n and 0 <= v < n):
            raise InvalidVertex(f"edge ({u}, {v}) outside [0, {n})")
        out.add((u, v) if u < v else (v, u))
    return frozenset(out)


@dataclass(frozen=True)
class CommGraph:
    """Undirected communication graph.

    ``delta_edges`` are the edges of the base triangulation graph and
    ``ext_edges`` the edges added by k-hop extension; the two sets are
    disjoint. ``k`` is the extension level, 1 for the base graph.
    """
    n: int
    delta_edges: frozenset
    ext_edges: frozenset = field(default=frozenset())
    k: int = 1

    def __post_init__(self):
        object.__setattr__(self, "delta_edges", _normalize(self.delta_edges, self.n))
        object.__setattr__(self, "ext_edges", _normalize(self.ext_edges, self.n))
        if self.k < 1:
            raise DomainError(f"extension level must be >= 1, got {self.k}")
        if self.delta_edges & self.ext_edges:
            raise DomainError("delta and extension edges overlap")
        if self.k == 1 and self.ext_edges:
            raise DomainError("a k=1 graph cannot carry extension edges")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable) -> "CommGraph":
        """Base graph with the given edges treated as Delta-edges."""
        return cls(n, frozenset(edges))

    @classmethod
    def complete(cls, n: int) -> "CommGraph":
        return cls(n, frozenset((u, v) for u in range(n) for v in range(u + 1, n)))

    @property
    def edges(self) -> frozenset:
        return self.delta_edges | self.ext_edges

    @property
    def n_edges(self) -> int:
        return len(self.delta_edges) + len(self.ext_edges)

    @property
    def is_complete(self) -> bool:
        return self.n_edges == self.n * (self.n - 1) // 2

    @cached_property
    def adjacency(self) -> tuple:
        nbrs = [set() for _ in range(self.n)]
        for u, v in self.edges:
            nbrs[u].add(v)
            nbrs[v].add(u)
        return tuple(frozenset(s) for s in nbrs)

    @cached_property
    def delta_adjacency(self) -> tuple:
        nbrs = [set() for _ in range(self.n)]
        for u, v in self.delta_edges:
            nbrs[u].add(v)
            nbrs[v].add(u)
        return tuple(frozenset(s) for s in nbrs)

    @cached_property
    def adjacency_masks(self) -> tuple:
        """Neighbor sets as integer bitmasks, bit ``j`` set for neighbor ``j``."""
        return tuple(sum(1 << j for j in nb) for nb in self.adjacency)

    def neighbors(self, v: int) -> frozenset:
        if not isinstance(v, (int, np.integer)) or not 0 <= v < self.n:
            raise InvalidVertex(f"vertex {v!r} not in [0, {self.n})")
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.neighbors(v))

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        seen = {0}
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for w in self.adjacency[u]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen) == self.n


def from_triangulation(tri: Triangulation) -> CommGraph:
    return CommGraph(tri.n_points, frozenset(tri.edges))


def delta_distance_matrix(g: CommGraph) -> np.ndarray:
    """All-pairs hop counts over Delta-edges only, by breadth-first search."""
    n = g.n
    dist = np.full((n, n), -1, dtype=int)
    for s in range(n):
        dist[s, s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in g.delta_adjacency[u]:
                if dist[s, w] < 0:
                    dist[s, w] = dist[s, u] + 1
                    queue.append(w)
    if (dist < 0).any():
        raise DisconnectedDeltaGraph("Delta-graph is not connected")
    return dist


def k_hop_extend(g: CommGraph, K: int) -> CommGraph:
    """Connect every pair of vertices within ``K`` hops in the Delta-graph.

    Reachability is accumulated with boolean matrix products, so this path
    shares no code with :func:`delta_distance_matrix`.
    """
    if g.k != 1 or g.ext_edges:
        raise NotBaseGraph(f"expected a base graph (k=1), got k={g.k}")
    if int(K) != K or K < 1:
        raise DomainError(f"K must be a positive integer, got {K!r}")
    K = int(K)
    if K == 1:
        return g
    n = g.n
    adj = np.zeros((n, n), dtype=bool)
    for u, v in g.delta_edges:
        adj[u, v] = adj[v, u] = True
    step = adj | np.eye(n, dtype=bool)
    reach = step.copy()
    for _ in range(K - 1):
        grown = (reach.astype(np.int64) @ step.astype(np.int64)) > 0
        if np.array_equal(grown, reach):
            break
        reach = grown
    us, vs = np.nonzero(np.triu(reach, 1))
    ext = frozenset(zip(us.tolist(), vs.tolist())) - g.delta_edges
    return CommGraph(n, g.delta_edges, ext, K)


def graph_from_positions(points, K: int = 1, tie_break: str = "min") -> CommGraph:
    return k_hop_extend(from_triangulation(delaunay(points, tie_break)), K)


_HEADER = re.compile(r"#\s*commgraph\s+n=(\d+)\s+k=(\d+)\s*$")


def write_edge_list(path, g: CommGraph):
    """Write ``g`` as ``u,v,kind`` rows under a ``# commgraph n=.. k=..`` header."""
    with open(path, "w") as fh:
        fh.write(f"# commgraph n={g.n} k={g.k}\n")
        fh.write("u,v,kind\n")
        for u, v in sorted(g.edges):
            kind = "delta" if (u, v) in g.delta_edges else "ext"
            fh.write(f"{u},{v},{kind}\n")


def read_edge_list(path) -> CommGraph:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FormatError("empty edge list", line=1, path=path)
    m = _HEADER.match(lines[0].strip())
    if not m:
        raise FormatError("expected header '# commgraph n=<n> k=<k>'", line=1, path=path)
    n, k = int(m.group(1)), int(m.group(2))
    delta, ext = set(), set()
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("#") or line.replace(" ", "") == "u,v,kind":
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3 or parts[2] not in ("delta", "ext"):
            raise FormatError(f"expected 'u,v,delta|ext', got {raw!r}", line=lineno, path=path)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise FormatError(f"non-integer vertex in {raw!r}", line=lineno, path=path) from None
        if u == v or not (0 <= u < n and 0 <= v < n):
            raise FormatError(f"invalid edge ({u}, {v}) for n={n}", line=lineno, path=path)
        (delta if parts[2] == "delta" else ext).add((min(u, v), max(u, v)))
    try:
        return CommGraph(n, frozenset(delta), frozenset(ext), k)
    except DomainError as exc:
        raise FormatError(str(exc), path=path) from exc

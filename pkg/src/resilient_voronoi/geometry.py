"""Planar Delaunay triangulation of agent positions.

Points are inserted in lexicographic order, which makes every new point a
vertex of the growing convex hull, so point location reduces to finding the
hull edges it can see. The resulting triangulation is then legalized with
Lawson edge flips until every interior edge passes the incircle test.

Cocircular quadrilaterals (square grids, circle formations) are decided by a
deterministic tie-break on vertex indices, so the same input always produces
the same triangle set.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import DomainError, FormatError, InvalidVertex

# relative tolerance on the incircle determinant; inside this band a quad is
# treated as cocircular and the diagonal is chosen by vertex index
INCIRCLE_EPS = 1e-9
# relative tolerance on the orientation determinant
ORIENT_EPS = 1e-12
# points closer than this are rejected, never merged
DUPLICATE_TOL = 1e-12

TIE_BREAKS = ("min", "max")


class TooFewPoints(DomainError):
    pass


class CollinearInput(DomainError):
    pass


class DuplicatePoints(DomainError):
    pass


class Point2(NamedTuple):
    x: float
    y: float


class NeighborRing(NamedTuple):
    """Neighbors of a vertex in counter-clockwise angular order.

    ``is_cycle`` is true for interior vertices, where the last neighbor is
    also adjacent to the first.
    """
    vertices: tuple
    is_cycle: bool


@dataclass(frozen=True, eq=False)
class Triangulation:
    points: np.ndarray
    triangles: tuple
    hull: tuple

    @property
    def n_points(self) -> int:
        return len(self.points)

    @cached_property
    def edges(self) -> tuple:
        """Sorted tuple of undirected edges ``(u, v)`` with ``u < v``."""
        out = set()
        for a, b, c in self.triangles:
            for u, v in ((a, b), (b, c), (c, a)):
                out.add((u, v) if u < v else (v, u))
        return tuple(sorted(out))

    @cached_property
    def adjacency(self) -> tuple:
        nbrs = [set() for _ in range(self.n_points)]
        for u, v in self.edges:
            nbrs[u].add(v)
            nbrs[v].add(u)
        return tuple(frozenset(s) for s in nbrs)

    def degree(self, v: int) -> int:
        _check_vertex(v, self.n_points)
        return len(self.adjacency[v])


def _check_vertex(v, n):
    if not isinstance(v, (int, np.integer)) or not 0 <= v < n:
        raise InvalidVertex(f"vertex {v!r} not in [0, {n})")


def orient(a, b, c) -> int:
    """Sign of the turn a -> b -> c: +1 left, -1 right, 0 collinear."""
    t1 = (b[0] - a[0]) * (c[1] - a[1])
    t2 = (b[1] - a[1]) * (c[0] - a[0])
    det = t1 - t2
    if abs(det) <= ORIENT_EPS * (abs(t1) + abs(t2)):
        return 0
    return 1 if det > 0 else -1


def incircle(a, b, c, d) -> int:
    """+1 if d is inside the circumcircle of counter-clockwise (a, b, c),
    -1 if outside, 0 inside the tolerance band."""
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    det = (alift * (bdx * cdy - bdy * cdx)
           + blift * (cdx * ady - cdy * adx)
           + clift * (adx * bdy - ady * bdx))
    permanent = (alift * (abs(bdx * cdy) + abs(bdy * cdx))
                 + blift * (abs(cdx * ady) + abs(cdy * adx))
                 + clift * (abs(adx * bdy) + abs(ady * bdx)))
    if abs(det) <= INCIRCLE_EPS * permanent:
        return 0
    return 1 if det > 0 else -1


def as_points(points) -> np.ndarray:
    """Validate and copy positions into a read-only ``(n, 2)`` float array."""
    pts = np.array(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        if pts.size == 0:
            pts = pts.reshape(0, 2)
        else:
            raise DomainError(f"expected an (n, 2) array of positions, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise DomainError("positions must be finite")
    pts.setflags(write=False)
    return pts


def _check_input(pts):
    n = len(pts)
    if n < 3:
        raise TooFewPoints(f"need at least 3 points, got {n}")
    pairs = cKDTree(pts).query_pairs(DUPLICATE_TOL)
    if pairs:
        i, j = min(pairs)
        raise DuplicatePoints(f"points {i} and {j} coincide within {DUPLICATE_TOL}")


class _Mesh:
    """Mutable triangle soup with directed-edge lookup used while building."""

    def __init__(self, pts):
        self.pts = pts
        self.tris = []
        self.edge_tri = {}

    def add(self, a, b, c):
        t = len(self.tris)
        self.tris.append((a, b, c))
        self._index(t)
        return t

    def _index(self, t):
        a, b, c = self.tris[t]
        self.edge_tri[(a, b)] = t
        self.edge_tri[(b, c)] = t
        self.edge_tri[(c, a)] = t

    def _unindex(self, t):
        a, b, c = self.tris[t]
        for e in ((a, b), (b, c), (c, a)):
            if self.edge_tri.get(e) == t:
                del self.edge_tri[e]

    def third(self, t, u, v):
        for w in self.tris[t]:
            if w != u and w != v:
                return w
        raise AssertionError("degenerate triangle")

    def replace(self, t, a, b, c):
        self._unindex(t)
        self.tris[t] = (a, b, c)
        self._index(t)


def _sweep(pts, order):
    """Initial (non-Delaunay) triangulation by lexicographic hull insertion."""
    o = [int(i) for i in order]
    k = 2
    while k < len(o) and orient(pts[o[0]], pts[o[1]], pts[o[k]]) == 0:
        k += 1
    if k == len(o):
        raise CollinearInput("all points lie on one line")
    mesh = _Mesh(pts)
    line, apex = o[:k], o[k]
    if orient(pts[line[0]], pts[line[1]], pts[apex]) > 0:
        for i in range(k - 1):
            mesh.add(line[i], line[i + 1], apex)
        hull = line + [apex]
    else:
        for i in range(k - 1):
            mesh.add(line[i + 1], line[i], apex)
        hull = [line[0], apex] + line[:0:-1]

    for p in o[k + 1:]:
        h = len(hull)
        visible = [orient(pts[hull[i]], pts[hull[(i + 1) % h]], pts[p]) < 0
                   for i in range(h)]
        start = next(i for i in range(h) if visible[i] and not visible[i - 1])
        hull = hull[start:] + hull[:start]
        visible = visible[start:] + visible[:start]
        m = 0
        while m < h and visible[m]:
            a, b = hull[m], hull[(m + 1) % h]
            mesh.add(b, a, p)
            m += 1
        hull = [hull[0], p] + hull[m:]
    return mesh, hull


def _pair(a, b):
    return (a, b) if a < b else (b, a)


def _legalize(mesh, tie_break):
    pts = mesh.pts
    stack = [e for e in mesh.edge_tri if e[0] < e[1] and (e[1], e[0]) in mesh.edge_tri]
    limit = 50 * max(len(pts), 10) ** 2
    flips = 0
    while stack:
        u, v = stack.pop()
        t1 = mesh.edge_tri.get((u, v))
        t2 = mesh.edge_tri.get((v, u))
        if t1 is None or t2 is None:
            continue
        c = mesh.third(t1, u, v)
        d = mesh.third(t2, v, u)
        test = incircle(pts[u], pts[v], pts[c], pts[d])
        if test < 0:
            continue
        if test == 0:
            current, alternate = _pair(u, v), _pair(c, d)
            if tie_break == "min" and not alternate < current:
                continue
            if tie_break == "max" and not alternate > current:
                continue
        if orient(pts[u], pts[d], pts[c]) <= 0 or orient(pts[d], pts[v], pts[c]) <= 0:
            continue
        mesh.replace(t1, u, d, c)
        mesh.replace(t2, d, v, c)
        stack.extend([_pair(u, d), _pair(d, v), _pair(v, c), _pair(c, u)])
        flips += 1
        if flips > limit:
            raise RuntimeError("edge flipping did not terminate")


def _canonical(tri):
    a, b, c = tri
    m = min(tri)
    if m == b:
        return (b, c, a)
    if m == c:
        return (c, a, b)
    return (a, b, c)


def delaunay(points, tie_break: str = "min") -> Triangulation:
    """Delaunay triangulation of planar points.

    Parameters
    ----------
    points : array_like, shape (n, 2)
        Distinct positions, not all on one line, ``n >= 3``.
    tie_break : {"min", "max"}
        For a cocircular quadrilateral keep the diagonal whose sorted vertex
        pair is lexicographically smallest ("min") or largest ("max").

    Raises
    ------
    TooFewPoints, DuplicatePoints, CollinearInput
    """
    if tie_break not in TIE_BREAKS:
        raise ValueError(f"tie_break must be one of {TIE_BREAKS}")
    pts = as_points(points)
    _check_input(pts)
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    mesh, hull = _sweep(pts, order)
    _legalize(mesh, tie_break)
    triangles = tuple(sorted(_canonical(t) for t in mesh.tris))
    i = hull.index(min(hull))
    return Triangulation(pts, triangles, tuple(hull[i:] + hull[:i]))


def vertex_neighbor_ring(tri: Triangulation, v: int) -> NeighborRing:
    _check_vertex(v, tri.n_points)
    succ = {}
    for t in tri.triangles:
        if v in t:
            k = t.index(v)
            succ[t[(k + 1) % 3]] = t[(k + 2) % 3]
    heads = set(succ) - set(succ.values())
    if heads:
        start, is_cycle = heads.pop(), False
    else:
        start, is_cycle = min(succ), True
    ring = [start]
    while ring[-1] in succ and len(ring) <= len(succ):
        nxt = succ[ring[-1]]
        if nxt == start:
            break
        ring.append(nxt)
    return NeighborRing(tuple(ring), is_cycle)


def read_positions(path):
    """Read agent positions from a CSV file with header ``id,x,y``.

    Returns ``(ids, points)`` where ``ids`` keeps file order and row ``i`` of
    ``points`` belongs to ``ids[i]``.
    """
    ids, rows = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["id", "x", "y"]:
            raise FormatError("expected header 'id,x,y'", line=1, path=path)
        for row in reader:
            line = reader.line_num
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 3:
                raise FormatError(f"expected 3 fields, got {len(row)}", line=line, path=path)
            try:
                x, y = float(row[1]), float(row[2])
            except ValueError:
                raise FormatError(f"non-numeric coordinate in {row!r}", line=line, path=path) from None
            if not (np.isfinite(x) and np.isfinite(y)):
                raise FormatError("coordinates must be finite", line=line, path=path)
            agent = row[0].strip()
            if agent in ids:
                raise FormatError(f"duplicate agent id {agent!r}", line=line, path=path)
            ids.append(agent)
            rows.append((x, y))
    return ids, np.array(rows, dtype=float).reshape(-1, 2)


def write_positions(path, points, ids: Sequence | None = None):
    pts = as_points(points)
    ids = list(range(len(pts))) if ids is None else list(ids)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "x", "y"])
        for agent, (x, y) in zip(ids, pts):
            w.writerow([agent, repr(float(x)), repr(float(y))])


def write_triangles(path, tri: Triangulation):
    """One row per triangle: vertex indices followed by their coordinates."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["triangle", "a", "b", "c", "ax", "ay", "bx", "by", "cx", "cy"])
        for k, t in enumerate(tri.triangles):
            coords = [repr(float(z)) for v in t for z in tri.points[v]]
            w.writerow([k, *t, *coords])

"""Formation generators and batch robustness statistics over G_ΔK."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DomainError
from .geometry import CollinearInput, DuplicatePoints, TooFewPoints, delaunay
from .graph import from_triangulation, k_hop_extend
from .robustness import DEFAULT_CAP, max_equal_rs
from .seeding import substream

MAX_RETRIES = 100


class DegenerateAfterRetries(DomainError):
    pass


@dataclass(frozen=True)
class RandomRect:
    """``n`` points uniform in a rectangle of area ``scale**2`` whose aspect
    ratio is drawn log-uniformly from ``aspect_range``."""
    n: int
    seed: int = 0
    aspect_range: tuple = (1.0, 8.0)
    scale: float = 10.0

    @property
    def label(self):
        return f"random_rect(n={self.n},seed={self.seed})"


@dataclass(frozen=True)
class TwoLines:
    """Zigzag strip: bottom row at (2j, 0), top row at (2j + 1, 1)."""
    n: int
    scale: float = 1.0

    @property
    def label(self):
        return f"two_lines(n={self.n})"


@dataclass(frozen=True)
class Grid:
    rows: int
    cols: int
    scale: float = 1.0

    @property
    def label(self):
        return f"grid({self.rows}x{self.cols})"


@dataclass(frozen=True)
class Circle:
    n: int
    scale: float = 1.0

    @property
    def label(self):
        return f"circle(n={self.n})"


@dataclass(frozen=True)
class HollowSquare:
    """Perimeter of a square lattice with ``side`` points per edge."""
    side: int
    scale: float = 1.0

    @property
    def label(self):
        return f"hollow_square(side={self.side})"


FORMATIONS = {"random_rect": RandomRect, "two_lines": TwoLines, "grid": Grid,
              "circle": Circle, "hollow_square": HollowSquare}


def formation_from_dict(d: dict):
    d = dict(d)
    kind = d.pop("kind")
    if kind not in FORMATIONS:
        raise DomainError(f"unknown formation kind {kind!r}; expected one of {sorted(FORMATIONS)}")
    if "aspect_range" in d:
        d["aspect_range"] = tuple(d["aspect_range"])
    return FORMATIONS[kind](**d)


def _positive(name, value, minimum=1):
    if int(value) != value or value < minimum:
        raise DomainError(f"{name} must be an integer >= {minimum}, got {value!r}")


def _random_rect(spec: RandomRect):
    _positive("n", spec.n, 3)
    lo, hi = spec.aspect_range
    if not 1 <= lo <= hi:
        raise DomainError(f"aspect range must satisfy 1 <= lo <= hi, got {spec.aspect_range}")
    rng = substream(spec.seed, "formation")
    for _ in range(MAX_RETRIES):
        aspect = math.exp(rng.uniform(math.log(lo), math.log(hi)))
        w, h = spec.scale * math.sqrt(aspect), spec.scale / math.sqrt(aspect)
        pts = rng.uniform((0.0, 0.0), (w, h), size=(spec.n, 2))
        try:
            delaunay(pts)
        except (CollinearInput, DuplicatePoints):
            continue
        return pts
    raise DegenerateAfterRetries(f"no valid draw for {spec.label} in {MAX_RETRIES} attempts")


def generate_formation(spec) -> np.ndarray:
    """Positions for ``spec`` as an ``(n, 2)`` array, valid for triangulation."""
    if isinstance(spec, RandomRect):
        return _random_rect(spec)
    if isinstance(spec, TwoLines):
        _positive("n", spec.n, 3)
        j = np.arange(spec.n)
        pts = np.c_[j, j % 2].astype(float)
    elif isinstance(spec, Grid):
        _positive("rows", spec.rows, 2)
        _positive("cols", spec.cols, 2)
        r, c = np.divmod(np.arange(spec.rows * spec.cols), spec.cols)
        pts = np.c_[c, r].astype(float)
    elif isinstance(spec, Circle):
        _positive("n", spec.n, 3)
        t = 2 * np.pi * np.arange(spec.n) / spec.n
        pts = np.c_[np.cos(t), np.sin(t)]
    elif isinstance(spec, HollowSquare):
        _positive("side", spec.side, 2)
        s = spec.side - 1
        edge = np.arange(s)
        pts = np.concatenate([np.c_[edge, np.zeros(s)], np.c_[np.full(s, s), edge],
                              np.c_[s - edge, np.full(s, s)], np.c_[np.zeros(s), s - edge]]).astype(float)
    else:
        raise DomainError(f"unsupported formation {spec!r}")
    return pts * spec.scale


def random_specs(count: int, master_seed: int, n_range=(8, 12), aspect_range=(1.0, 8.0)):
    """``count`` RandomRect specs with n drawn uniformly from ``n_range``."""
    rng = substream(master_seed, "study-sizes")
    ns = rng.integers(n_range[0], n_range[1] + 1, size=count)
    seeds = rng.integers(0, 2 ** 32, size=count)
    return [RandomRect(int(n), int(s), tuple(aspect_range)) for n, s in zip(ns, seeds)]


@dataclass(frozen=True)
class SampleRecord:
    formation: str
    n: int
    K: int
    edges: int
    max_rs: int

    @property
    def complete(self) -> bool:
        return self.edges == self.n * (self.n - 1) // 2


@dataclass
class StudyReport:
    samples: list = field(default_factory=list)

    @property
    def ks(self):
        return sorted({s.K for s in self.samples})

    def by_k(self, K):
        return [s for s in self.samples if s.K == K]

    def percentages(self) -> dict:
        """``{(K, r): percent of K-samples with max r=s >= r}``."""
        out = {}
        for K in self.ks:
            rows = self.by_k(K)
            for r in range(1, max(s.max_rs for s in rows) + 1):
                out[(K, r)] = 100.0 * sum(s.max_rs >= r for s in rows) / len(rows)
        return out

    def complete_percent(self, K) -> float:
        rows = self.by_k(K)
        return 100.0 * sum(s.complete for s in rows) / len(rows)

    def minimum(self, K) -> int:
        return min(s.max_rs for s in self.by_k(K))

    def below_conjecture(self) -> list:
        """Samples with max r=s below K + 1. For K >= 3 this is reported only."""
        return [s for s in self.samples if s.max_rs < s.K + 1]

    def table(self) -> list:
        """Rows mirroring a percentage table: K, then columns r = 2.., then KN."""
        top = max((s.max_rs for s in self.samples), default=1)
        pct = self.percentages()
        header = ["K"] + [f"r={r}" for r in range(2, top + 1)] + ["KN"]
        rows = [header]
        for K in self.ks:
            rows.append([K] + [round(pct.get((K, r), 0.0), 6) for r in range(2, top + 1)]
                        + [round(self.complete_percent(K), 6)])
        return rows

    def to_record(self) -> dict:
        return {
            "samples": [dict(asdict(s), complete=s.complete) for s in self.samples],
            "percentages": [{"K": K, "r": r, "percent": p} for (K, r), p in sorted(self.percentages().items())],
            "complete_percent": {str(K): self.complete_percent(K) for K in self.ks},
            "minimum_rs": {str(K): self.minimum(K) for K in self.ks},
            "below_k_plus_1": [asdict(s) for s in self.below_conjecture()],
        }

    def write(self, out_dir, fmt="csv"):
        """Write ``study_samples`` and ``study_table`` files; returns their paths."""
        from pathlib import Path
        out = Path(out_dir)
        if fmt == "json":
            path = out / "study.json"
            path.write_text(json.dumps(self.to_record(), indent=2, sort_keys=True) + "\n")
            return [path]
        samples, table = out / "study_samples.csv", out / "study_table.csv"
        with open(samples, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["formation", "n", "K", "edges", "max_rs", "complete"])
            for s in self.samples:
                w.writerow([s.formation, s.n, s.K, s.edges, s.max_rs, int(s.complete)])
        with open(table, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(self.table())
        return [samples, table]


def run_robustness_study(specs, k_max: int, *, cap: int = DEFAULT_CAP, workers: int = 1,
                         progress=None) -> StudyReport:
    """Edge counts and maximum r=s for every spec and every K in 1..k_max."""
    _positive("k_max", k_max)
    report = StudyReport()
    for spec in specs:
        pts = generate_formation(spec)
        base = from_triangulation(delaunay(pts))
        for K in range(1, k_max + 1):
            g = k_hop_extend(base, K)
            report.samples.append(SampleRecord(spec.label, g.n, K, g.n_edges,
                                               max_equal_rs(g, cap=cap, workers=workers)))
        if progress:
            progress(spec)
    return report

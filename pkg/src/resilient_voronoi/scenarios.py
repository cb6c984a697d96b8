"""Example systems: static parameter estimation, polygon rendezvous with
per-step re-triangulation, and occupancy-grid map consensus."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import consensus as cs
from .errors import DomainError, FormatError
from .geometry import CollinearInput, delaunay
from .graph import CommGraph, from_triangulation, k_hop_extend


class DegenerateFormation(DomainError):
    def __init__(self, step, cause):
        self.step = step
        super().__init__(f"formation degenerate at step {step}: {cause}")


class StartOnOccupiedCell(DomainError):
    pass


def comm_graph(positions, K: int = 1) -> CommGraph:
    return k_hop_extend(from_triangulation(delaunay(positions)), K)


# -- parameter estimation --------------------------------------------------

@dataclass(eq=False)
class EstimationResult:
    graph: CommGraph
    run: cs.ConsensusRun
    safe: cs.SafeInterval
    inside: list

    @property
    def verdict(self):
        return self.run.verdict

    @property
    def trajectory(self):
        return self.run.trajectory


def run_parameter_estimation(positions, initial_values, adversaries=None, K: int = 1,
                             F: int = 0, cfg: cs.WmsrConfig | None = None) -> EstimationResult:
    """Consensus on a scalar (or vector) parameter among static agents.

    ``adversaries`` maps agent index to a behavior. The graph is built once
    from the positions. ``inside[k]`` tells whether every cooperative value
    at step ``k`` lies in the safe interval.
    """
    cfg = cfg or cs.WmsrConfig()
    cfg = cs.WmsrConfig(F, cfg.convergence_eps, cfg.max_steps)
    g = comm_graph(positions, K)
    behaviors = cs._behaviors(adversaries or {}, g.n)
    state = cs.initial_state(initial_values, behaviors)
    safe = cs.safe_interval(state, behaviors)
    run = cs.run_consensus(state, g, cfg, behaviors)
    coop = [i for i, b in enumerate(behaviors) if cs.is_cooperative(b)]
    inside = [safe.contains(s.values[coop]) for s in run.trajectory]
    return EstimationResult(g, run, safe, inside)


# -- polygon rendezvous ----------------------------------------------------

@dataclass(frozen=True)
class RendezvousConfig:
    radius: float = 1.0
    tau: float = 0.5
    v_max: float = 1.0
    K: int = 1
    F: int = 0
    convergence_eps: float = 1e-6
    max_steps: int = 2_000

    def __post_init__(self):
        if not (self.radius > 0 and self.tau > 0 and self.v_max > 0):
            raise DomainError("radius, tau and v_max must be positive")


def rendezvous_goal(center_estimate, i: int, N: int, radius: float) -> np.ndarray:
    """Corner ``i`` of the regular ``N``-gon of given radius around the center."""
    if N < 1:
        raise DomainError("N must be >= 1")
    angle = 2 * math.pi * i / N
    c = np.asarray(center_estimate, dtype=float)
    return np.array([c[0] + radius * math.cos(angle), c[1] + radius * math.sin(angle)])


def motion_step(p, g, tau: float, v_max: float) -> np.ndarray:
    """Move from ``p`` towards ``g`` at speed ``min(|g - p|, v_max)`` for time ``tau``."""
    if tau <= 0 or v_max <= 0:
        raise DomainError("tau and v_max must be positive")
    p = np.asarray(p, dtype=float)
    delta = np.asarray(g, dtype=float) - p
    dist = math.hypot(delta[0], delta[1])
    if dist == 0:
        return p.copy()
    return p + tau * min(dist, v_max) * delta / dist


def drifting_adversary(rng: np.random.Generator, safe: cs.SafeInterval, delta: float):
    """Adversary that starts at a random point of the safe box and drifts away
    along a fixed random direction by ``delta`` per step."""
    start = rng.uniform(safe.lo, safe.hi)
    theta = rng.uniform(0, 2 * math.pi)
    return cs.DriftingAdversary(tuple(start), (delta * math.cos(theta), delta * math.sin(theta)))


@dataclass(eq=False)
class RendezvousResult:
    positions: np.ndarray
    centers: np.ndarray
    verdict: cs.Verdict
    safe: cs.SafeInterval
    behaviors: list

    @property
    def cooperative(self):
        return [i for i, b in enumerate(self.behaviors) if cs.is_cooperative(b)]

    def centers_inside(self) -> list:
        """Per step, whether every cooperative center estimate is in the safe box."""
        coop = self.cooperative
        return [self.safe.contains(c[coop]) for c in self.centers]


def run_rendezvous(initial_positions, center_initials, adversaries=None,
                   cfg: RendezvousConfig | None = None) -> RendezvousResult:
    """Agents agree on a rendezvous center while moving onto polygon corners.

    Each step re-triangulates the current positions, runs one consensus step
    on the center estimates over the K-hop graph, and moves every agent
    towards its corner around its current estimate. Adversaries move towards
    the corner around the center they broadcast.
    """
    cfg = cfg or RendezvousConfig()
    pos = np.array(initial_positions, dtype=float)
    n = len(pos)
    behaviors = cs._behaviors(adversaries or {}, n)
    coop = [i for i, b in enumerate(behaviors) if cs.is_cooperative(b)]
    state = cs.initial_state(np.asarray(center_initials, dtype=float), behaviors)
    if state.dim != 2:
        raise cs.DimensionMismatch("rendezvous centers must be 2-D")
    safe = cs.safe_interval(state, behaviors)
    wcfg = cs.WmsrConfig(cfg.F, cfg.convergence_eps, cfg.max_steps)
    static = all(cs.is_cooperative(b) or isinstance(b, cs.ConstantAdversary) for b in behaviors)

    positions, centers = [pos.copy()], [state.values.copy()]
    tracker = cs.StallTracker(behaviors)
    frozen = False
    while True:
        goals = np.array([rendezvous_goal(state.values[i], i, n, cfg.radius) for i in range(n)])
        spread = cs.cooperative_spread(state, behaviors)
        gaps = np.hypot(*(goals - pos).T)
        converged = bool(np.all(spread < cfg.convergence_eps)) and gaps[coop].max() < cfg.convergence_eps
        # nothing left to change: estimates frozen and every agent parked
        parked = frozen and gaps.max() < cfg.convergence_eps
        if converged or parked or state.step >= cfg.max_steps:
            break
        try:
            g = comm_graph(pos, cfg.K)
        except DomainError as exc:
            raise DegenerateFormation(state.step, exc) from exc
        nxt, empty = cs._step(state, g, wcfg.F, behaviors)
        tracker.update(g, empty)
        frozen = static and np.array_equal(nxt.values, state.values)
        pos = np.array([motion_step(pos[i], goals[i], cfg.tau, cfg.v_max) for i in range(n)])
        state = nxt
        positions.append(pos.copy())
        centers.append(state.values.copy())

    verdict = cs.make_verdict(converged, state, coop, tracker)
    return RendezvousResult(np.array(positions), np.array(centers), verdict, safe, behaviors)


# -- occupancy-grid map consensus ------------------------------------------

UNKNOWN = np.nan
NEUTRAL = 0.5
_GOLDEN_ANGLE = math.pi * (3 - math.sqrt(5))


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    """Cell occupancies in [0, 1] (0 free, 1 occupied); NaN marks Unknown.

    ``cells`` is indexed ``[row, col]``.
    """
    cells: np.ndarray

    def __post_init__(self):
        c = np.array(self.cells, dtype=float)
        if c.ndim != 2:
            raise DomainError("occupancy grid must be 2-D")
        known = c[~np.isnan(c)]
        if known.size and (known.min() < 0 or known.max() > 1):
            raise DomainError("known occupancies must lie in [0, 1]")
        c.setflags(write=False)
        object.__setattr__(self, "cells", c)

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @classmethod
    def unknown(cls, height, width):
        return cls(np.full((height, width), UNKNOWN))

    def free_mask(self):
        return self.cells < NEUTRAL


def read_grid(path) -> OccupancyGrid:
    """Parse a bitmap where ``#`` is occupied and ``.`` is free."""
    rows = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            bad = set(line) - {"#", "."}
            if bad:
                raise FormatError(f"unexpected characters {sorted(bad)}", line=lineno, path=path)
            if rows and len(line) != len(rows[0]):
                raise FormatError(f"row width {len(line)} != {len(rows[0])}", line=lineno, path=path)
            rows.append([1.0 if ch == "#" else 0.0 for ch in line])
    if not rows:
        raise FormatError("empty grid", path=path)
    return OccupancyGrid(np.array(rows))


def write_grid(path, grid: OccupancyGrid):
    with open(path, "w") as fh:
        for row in grid.cells:
            fh.write("".join("#" if v >= NEUTRAL else "." for v in row) + "\n")


_HALLWAY = """\
########################################
#......................................#
#......................................#
#......................................#
###################..###################
###################..###################
#......................................#
#......................................#
#......................................#
#.....##.......##.......##.......##....#
#.....##.......##.......##.......##....#
#......................................#
#......................................#
#......................................#
#..........####...........####.........#
#..........####...........####.........#
#......................................#
#......................................#
#......................................#
########################################
"""


@dataclass(frozen=True, eq=False)
class MapScenario:
    environment: OccupancyGrid
    starts: tuple
    adversaries: dict
    half_width: int = 2


def hallway_scenario() -> MapScenario:
    """20 x 40 hallway whose top section is reachable only through a narrow
    corridor; one stationary adversary claims the corridor is walled off."""
    env = OccupancyGrid(np.array([[1.0 if ch == "#" else 0.0 for ch in line]
                                  for line in _HALLWAY.splitlines()]))
    starts = ((17, 2), (17, 4), (16, 3), (18, 5), (16, 6), (18, 2), (17, 7), (16, 9), (7, 21))
    claimed = frozenset((r, c) for r in range(1, 6) for c in range(15, 25) if env.cells[r, c] == 0)
    return MapScenario(env, starts, {len(starts) - 1: cs.MapAdversary(claimed)})


def sensor_window(cell, half_width, shape):
    r, c = cell
    return (slice(max(r - half_width, 0), min(r + half_width + 1, shape[0])),
            slice(max(c - half_width, 0), min(c + half_width + 1, shape[1])))


def _neighbors4(cell, shape):
    r, c = cell
    for dr, dc in ((-1, 0), (0, -1), (0, 1), (1, 0)):
        rr, cc = r + dr, c + dc
        if 0 <= rr < shape[0] and 0 <= cc < shape[1]:
            yield rr, cc


def reachable_free(free, starts):
    """Cells 4-connected to any start through ``free`` cells."""
    seen = np.zeros(free.shape, dtype=bool)
    queue = deque()
    for s in starts:
        if free[s] and not seen[s]:
            seen[s] = True
            queue.append(s)
    while queue:
        u = queue.popleft()
        for w in _neighbors4(u, free.shape):
            if free[w] and not seen[w]:
                seen[w] = True
                queue.append(w)
    return seen


def next_move(belief: np.ndarray, cell):
    """First step towards the nearest reachable Unknown cell.

    Paths run through cells believed free (< 0.5). Ties between equally near
    Unknown cells go to the first in row-major order. Returns ``None`` when no
    Unknown cell is reachable.
    """
    unknown = np.isnan(belief)
    free = ~unknown & (belief < NEUTRAL)
    parent = {cell: None}
    frontier = [cell]
    while frontier:
        targets = set()
        nxt = []
        for u in frontier:
            for w in _neighbors4(u, belief.shape):
                if w in parent:
                    continue
                if unknown[w]:
                    targets.add(w)
                    parent.setdefault(w, u)
                elif free[w]:
                    parent[w] = u
                    nxt.append(w)
        if targets:
            t = min(targets)
            while parent[t] != cell and parent[t] is not None:
                t = parent[t]
            return t
        frontier = nxt
    return None


def _map_graph(cells):
    n = len(cells)
    if n == 1:
        return CommGraph(1, frozenset())
    if n == 2:
        return CommGraph(2, frozenset({(0, 1)}))
    # per-agent offsets inside the cell keep co-located agents distinct
    pts = np.array([(c + 0.5 + 0.25 * math.cos(i * _GOLDEN_ANGLE),
                     r + 0.5 + 0.25 * math.sin(i * _GOLDEN_ANGLE))
                    for i, (r, c) in enumerate(cells)])
    try:
        return comm_graph(pts, 1)
    except CollinearInput:
        # collinear agents: each one only neighbors the next along the line
        axis = pts[-1] - pts[0]
        order = np.argsort(pts @ axis, kind="stable")
        return CommGraph(n, frozenset(zip(order[:-1].tolist(), order[1:].tolist())))


@dataclass(frozen=True, eq=False)
class MapAgentState:
    position: tuple
    belief: OccupancyGrid
    sensor_half_width: int

    def __post_init__(self):
        r, c = self.position
        if not (0 <= r < self.belief.height and 0 <= c < self.belief.width):
            raise DomainError(f"position {self.position} outside the belief grid")
        if self.sensor_half_width < 0:
            raise DomainError("sensor half width must be >= 0")


@dataclass(eq=False)
class MapResult:
    """Per-step beliefs ``(steps + 1, n_agents, height, width)`` and positions.

    ``explored_step`` is the first step at which no cooperative agent has a
    reachable Unknown cell left. ``coverage`` is the fraction of reachable free
    cells sensed by at least one cooperative agent.
    """
    beliefs: np.ndarray
    positions: np.ndarray
    behaviors: list
    environment: OccupancyGrid
    sensed: np.ndarray
    reachable: np.ndarray
    explored_step: int | None
    converged: bool
    steps: int
    half_width: int = 2

    @property
    def cooperative(self):
        return [i for i, b in enumerate(self.behaviors) if cs.is_cooperative(b)]

    @property
    def coverage(self) -> float:
        return float(self.sensed[self.reachable].sum() / self.reachable.sum())

    def agent_states(self, step: int = -1) -> list:
        return [MapAgentState(tuple(int(x) for x in self.positions[step][i]),
                              OccupancyGrid(self.beliefs[step][i]), self.half_width)
                for i in range(len(self.behaviors))]

    def beliefs_match_truth(self) -> bool:
        final = self.beliefs[-1][self.cooperative]
        return bool(np.array_equal(final, np.broadcast_to(self.environment.cells, final.shape)))

    def summary(self) -> dict:
        return {
            "steps": self.steps,
            "explored_step": self.explored_step,
            "converged": self.converged,
            "coverage": self.coverage,
            "reachable_free_cells": int(self.reachable.sum()),
            "sensed_reachable_cells": int(self.sensed[self.reachable].sum()),
            "beliefs_match_truth": self.beliefs_match_truth(),
        }


def _adversary_broadcast(env, adv):
    out = np.array(env.cells, dtype=float)
    for cell in adv.claimed:
        out[cell] = 1.0
    return out


def _map_update(own, nbr_vals, nbr_ids, F):
    """Per-cell W-MSR update of one agent's belief (flattened)."""
    known = ~np.isnan(own)
    if len(nbr_ids) == 0:
        return own.copy()
    avail = ~np.isnan(nbr_vals)
    filled = np.where(known, own, NEUTRAL)
    keep = cs.retained_mask(filled, np.where(avail, nbr_vals, NEUTRAL), nbr_ids, F, avail)
    count = keep.sum(axis=0)
    total = np.where(keep, nbr_vals, 0.0).sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        mixed = np.where(known, (np.where(known, own, 0.0) + total) / (count + 1), total / count)
    return np.where(count > 0, mixed, own)


def run_map_consensus(environment: OccupancyGrid, starts, adversaries=None, F: int = 0,
                      steps: int = 200, half_width: int = 2, eps: float = 1e-9) -> MapResult:
    """Explore a grid while agreeing on its occupancy map.

    Every step each cooperative agent senses the true occupancy in a
    ``(2 * half_width + 1)``-square around it, runs one W-MSR consensus step
    per cell over the Delaunay graph of current positions, then moves one cell
    towards its nearest reachable Unknown cell. Adversaries (``MapAdversary``)
    stay put and broadcast 1.0 on claimed cells and the truth elsewhere.
    The run stops once every cooperative agent is done exploring and beliefs
    change by less than ``eps``, or after ``steps`` steps.
    """
    env = environment
    if half_width < 1:
        # agents must see a neighboring cell before stepping into it
        raise DomainError("sensor half width must be >= 1")
    if np.isnan(env.cells).any() or not np.isin(env.cells, (0.0, 1.0)).all():
        raise DomainError("environment cells must be 0 or 1")
    cells = [tuple(int(x) for x in s) for s in starts]
    n = len(cells)
    behaviors = cs._behaviors(adversaries or {}, n)
    for i, (cell, b) in enumerate(zip(cells, behaviors)):
        if not (0 <= cell[0] < env.height and 0 <= cell[1] < env.width):
            raise DomainError(f"agent {i} starts outside the grid at {cell}")
        if env.cells[cell] != 0:
            raise StartOnOccupiedCell(f"agent {i} starts on occupied cell {cell}")
        if not (cs.is_cooperative(b) or isinstance(b, cs.MapAdversary)):
            raise DomainError("map consensus supports only Cooperative and MapAdversary agents")
    coop = [i for i, b in enumerate(behaviors) if cs.is_cooperative(b)]
    if not coop:
        raise cs.NoCooperativeAgents("map consensus needs a cooperative agent")

    shape = env.cells.shape
    beliefs = np.full((n,) + shape, UNKNOWN)
    for i, b in enumerate(behaviors):
        if not cs.is_cooperative(b):
            beliefs[i] = _adversary_broadcast(env, b)
    sensed = np.zeros(shape, dtype=bool)
    reachable = reachable_free(env.cells == 0, [cells[i] for i in coop])
    history, trail = [beliefs.copy()], [np.array(cells)]
    explored_step = None
    converged = False
    k = 0
    while k < steps:
        sent = beliefs.copy()
        for i in coop:
            win = sensor_window(cells[i], half_width, shape)
            sent[i][win] = env.cells[win]
            sensed[win] = True
        g = _map_graph(cells)
        new = sent.copy()
        flat = sent.reshape(n, -1)
        for i in coop:
            nbrs = sorted(g.adjacency[i])
            new[i] = _map_update(flat[i], flat[nbrs], nbrs, F).reshape(shape)
        moves = {i: next_move(new[i], cells[i]) for i in coop}
        for i, m in moves.items():
            if m is not None:
                cells[i] = m
        delta = np.nanmax(np.abs(np.nan_to_num(new[coop], nan=-1.0) - np.nan_to_num(beliefs[coop], nan=-1.0)))
        beliefs = new
        k += 1
        history.append(beliefs.copy())
        trail.append(np.array(cells))
        done = all(m is None for m in moves.values())
        if done and explored_step is None:
            explored_step = k
        if not done:
            explored_step = None
        if done and delta < eps:
            converged = True
            break
    return MapResult(np.array(history), np.array(trail), behaviors, env, sensed,
                     reachable, explored_step, converged, k, half_width)


def write_beliefs(path, result: MapResult, steps=None):
    """Belief snapshots as ``step,agent,row,col,value`` rows; Unknown is empty."""
    steps = range(result.steps + 1) if steps is None else steps
    with open(path, "w") as fh:
        fh.write("step,agent,row,col,value\n")
        for k in steps:
            for i in result.cooperative:
                b = result.beliefs[k][i]
                for (r, c), v in np.ndenumerate(b):
                    fh.write(f"{k},{i},{r},{c},{'' if np.isnan(v) else repr(float(v))}\n")

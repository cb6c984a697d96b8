"""Synchronous linear and W-MSR consensus with non-cooperative agents.

Values are stored as an ``(n_agents, d)`` array. Filtering and averaging act
on each of the ``d`` components independently, with equal weights
``1 / (|retained| + 1)``. ``F = 0`` keeps every neighbor and is exactly
plain linear consensus.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from .errors import DomainError
from .graph import CommGraph


class DimensionMismatch(DomainError):
    pass


class NoCooperativeAgents(DomainError):
    pass


@dataclass(frozen=True)
class WmsrConfig:
    F: int = 0
    convergence_eps: float = 1e-6
    max_steps: int = 10_000

    def __post_init__(self):
        if self.F < 0:
            raise DomainError(f"F must be >= 0, got {self.F}")
        if not self.convergence_eps > 0:
            raise DomainError("convergence_eps must be positive")
        if self.max_steps < 0:
            raise DomainError("max_steps must be >= 0")


@dataclass(frozen=True)
class Cooperative:
    tag = "cooperative"


@dataclass(frozen=True)
class ConstantAdversary:
    value: tuple
    tag = "constant"

    def value_at(self, step):
        return np.asarray(self.value, dtype=float).reshape(-1)


@dataclass(frozen=True)
class DriftingAdversary:
    """Broadcasts ``start + step * drift``."""
    start: tuple
    drift: tuple
    tag = "drifting"

    def value_at(self, step):
        start = np.asarray(self.start, dtype=float).reshape(-1)
        return start + step * np.asarray(self.drift, dtype=float).reshape(-1)


@dataclass(frozen=True)
class MapAdversary:
    """Claims ``claimed`` grid cells are occupied; only meaningful for map consensus."""
    claimed: frozenset
    tag = "map"


AgentBehavior = Union[Cooperative, ConstantAdversary, DriftingAdversary, MapAdversary]
COOPERATIVE = Cooperative()


@dataclass(frozen=True, eq=False)
class ConsensusState:
    values: np.ndarray
    step: int = 0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[1] < 1:
            raise DimensionMismatch(f"values must be (n_agents, d), got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n_agents(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class SafeInterval:
    lo: np.ndarray
    hi: np.ndarray

    def contains(self, values, tol: float = 0.0) -> bool:
        v = np.asarray(values, dtype=float)
        return bool(np.all(v >= self.lo - tol) and np.all(v <= self.hi + tol))


@dataclass(frozen=True, eq=False)
class Verdict:
    """Outcome of a consensus run.

    ``status`` is ``"converged"`` (``value`` holds the cooperative mean),
    ``"stalled"`` or ``"max_steps"``. Stalled ``agents`` are cooperative
    agents whose retained set never held a value different from their own,
    so they never moved.
    """
    status: str
    step: int
    value: np.ndarray | None = None
    agents: tuple = ()

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    def to_record(self) -> dict:
        return {
            "status": self.status,
            "step": self.step,
            "value": None if self.value is None else [float(x) for x in self.value],
            "agents": list(self.agents),
        }


@dataclass(eq=False)
class ConsensusRun:
    trajectory: list
    verdict: Verdict
    stalled: tuple = field(default=())


def is_cooperative(b) -> bool:
    return isinstance(b, Cooperative)


def _behaviors(behaviors, n):
    if isinstance(behaviors, Mapping):
        out = [COOPERATIVE] * n
        for i, b in behaviors.items():
            out[int(i)] = b
        return out
    if behaviors is None:
        return [COOPERATIVE] * n
    out = list(behaviors)
    if len(out) != n:
        raise DimensionMismatch(f"{len(out)} behaviors for {n} agents")
    return out


def wmsr_filter(own: float, neighbor_values, F: int) -> set:
    """Ids of neighbors kept by W-MSR.

    Drops the (up to) ``F`` largest values strictly above ``own`` and the (up
    to) ``F`` smallest strictly below it. Among equal values the larger id is
    dropped first. ``neighbor_values`` is a mapping or ``(id, value)`` pairs.
    """
    items = list(neighbor_values.items() if isinstance(neighbor_values, Mapping) else neighbor_values)
    above = sorted((it for it in items if it[1] > own), key=lambda it: (it[1], it[0]), reverse=True)
    # stable two-pass sort: ascending value, larger id first within ties
    below = sorted((it for it in items if it[1] < own), key=lambda it: it[0], reverse=True)
    below.sort(key=lambda it: it[1])
    removed = {i for i, _ in above[:F]} | {i for i, _ in below[:F]}
    return {i for i, _ in items if i not in removed}


def retained_mask(own, values, ids, F, available=None):
    """Vectorized W-MSR filter over columns.

    ``own`` is ``(d,)``, ``values`` is ``(m, d)`` for neighbors ``ids``.
    ``available`` optionally marks which neighbor entries exist at all; missing
    entries take no part in the ordering and are never retained. Returns an
    ``(m, d)`` boolean mask of retained entries.
    """
    values = np.asarray(values, dtype=float)
    m = values.shape[0]
    if available is None:
        available = np.ones(values.shape, dtype=bool)
    if F == 0 or m == 0:
        return available.copy()
    ids = np.asarray(ids)
    above = available & (values > own)
    below = available & (values < own)
    vj = values[:, None, :]
    vk = values[None, :, :]
    later_id = (ids[None, :] > ids[:, None])[:, :, None]
    # rank[j] = how many entries are removed before j
    ahead_above = above[None, :, :] & ((vk > vj) | ((vk == vj) & later_id))
    ahead_below = below[None, :, :] & ((vk < vj) | ((vk == vj) & later_id))
    drop = (above & (ahead_above.sum(axis=1) < F)) | (below & (ahead_below.sum(axis=1) < F))
    return available & ~drop


def _broadcast(values, behaviors, step):
    out = np.array(values, dtype=float)
    for i, b in enumerate(behaviors):
        if is_cooperative(b):
            continue
        if isinstance(b, MapAdversary):
            raise DomainError("MapAdversary is only supported by map consensus")
        v = b.value_at(step)
        if v.shape != (out.shape[1],):
            raise DimensionMismatch(f"adversary {i} broadcasts dimension {v.size}, expected {out.shape[1]}")
        out[i] = v
    return out


def _step(state, g, F, behaviors):
    n, d = state.values.shape
    if g.n != n:
        raise DimensionMismatch(f"graph has {g.n} vertices, state has {n} agents")
    sent = _broadcast(state.values, behaviors, state.step)
    new = sent.copy()
    empty = np.zeros(n, dtype=bool)
    for i, b in enumerate(behaviors):
        if not is_cooperative(b):
            continue
        nbrs = sorted(g.adjacency[i])
        own = sent[i]
        vals = sent[nbrs] if nbrs else np.zeros((0, d))
        keep = retained_mask(own, vals, nbrs, F)
        acc = own.copy()
        for j in range(len(nbrs)):
            acc += np.where(keep[j], vals[j], 0.0)
        count = keep.sum(axis=0)
        new[i] = acc / (count + 1)
        # neighbors equal to own carry no information
        empty[i] = not (keep & (vals != own)).any()
    nxt = _broadcast(new, behaviors, state.step + 1)
    return ConsensusState(nxt, state.step + 1), empty


def initial_state(values, behaviors=None) -> ConsensusState:
    """State at step 0 with adversary rows set to their step-0 broadcast."""
    values = np.array(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    bs = _behaviors(behaviors, len(values))
    return ConsensusState(_broadcast(values, bs, 0), 0)


def consensus_step(state: ConsensusState, g: CommGraph, cfg: WmsrConfig,
                   behaviors=None) -> ConsensusState:
    bs = _behaviors(behaviors, state.n_agents)
    return _step(state, g, cfg.F, bs)[0]


def safe_interval(initial: ConsensusState, behaviors=None) -> SafeInterval:
    bs = _behaviors(behaviors, initial.n_agents)
    coop = [i for i, b in enumerate(bs) if is_cooperative(b)]
    if not coop:
        raise NoCooperativeAgents("safe interval needs at least one cooperative agent")
    v = initial.values[coop]
    return SafeInterval(v.min(axis=0), v.max(axis=0))


def cooperative_spread(state: ConsensusState, behaviors) -> np.ndarray:
    coop = [i for i, b in enumerate(behaviors) if is_cooperative(b)]
    v = state.values[coop]
    return v.max(axis=0) - v.min(axis=0)


class StallTracker:
    """Tracks cooperative agents that never receive usable neighbor values.

    An agent counts as stalled when its retained set held no value different
    from its own at every step since the communication graph last changed;
    for a fixed graph that is every step of the run.
    """

    def __init__(self, behaviors):
        self._coop = np.array([is_cooperative(b) for b in behaviors])
        self._mask = self._coop.copy()
        self._edges = None
        self.steps = 0

    def update(self, g: CommGraph, empty):
        if g.edges != self._edges:
            self._edges = g.edges
            self._mask = self._coop.copy()
            self.steps = 0
        self._mask &= empty
        self.steps += 1

    @property
    def agents(self) -> tuple:
        if self.steps == 0:
            return ()
        return tuple(int(i) for i in np.flatnonzero(self._mask))


def make_verdict(converged: bool, state: ConsensusState, coop, tracker: StallTracker) -> Verdict:
    if converged:
        return Verdict("converged", state.step, state.values[coop].mean(axis=0))
    if tracker.agents:
        return Verdict("stalled", state.step, None, tracker.agents)
    return Verdict("max_steps", state.step)


def run_consensus(initial: ConsensusState,
                  graph_provider: CommGraph | Callable[[ConsensusState], CommGraph],
                  cfg: WmsrConfig, behaviors=None) -> ConsensusRun:
    """Iterate consensus steps until the cooperative spread drops below
    ``cfg.convergence_eps`` in every component or ``cfg.max_steps`` is hit.

    ``graph_provider`` is either a fixed graph or a callable returning the
    graph for the current state. A static run that reaches a fixed point
    without consensus stops early, since later steps cannot differ.
    """
    bs = _behaviors(behaviors, initial.n_agents)
    coop = [i for i, b in enumerate(bs) if is_cooperative(b)]
    if not coop:
        raise NoCooperativeAgents("consensus needs at least one cooperative agent")
    static = isinstance(graph_provider, CommGraph) and all(
        is_cooperative(b) or isinstance(b, ConstantAdversary) for b in bs)
    state = initial
    trajectory = [state]
    tracker = StallTracker(bs)
    while True:
        converged = bool(np.all(cooperative_spread(state, bs) < cfg.convergence_eps))
        if converged or state.step >= cfg.max_steps:
            break
        g = graph_provider if isinstance(graph_provider, CommGraph) else graph_provider(state)
        nxt, empty = _step(state, g, cfg.F, bs)
        tracker.update(g, empty)
        unchanged = np.array_equal(nxt.values, state.values)
        state = nxt
        trajectory.append(state)
        if static and unchanged:
            break
    verdict = make_verdict(converged, state, coop, tracker)
    return ConsensusRun(trajectory, verdict, tracker.agents)


def write_trajectory(path, trajectory: Sequence[ConsensusState], behaviors=None, fmt: str = "csv"):
    """One record per (step, agent, component) with the agent's behavior tag."""
    n = trajectory[0].n_agents
    bs = _behaviors(behaviors, n)
    rows = ((s.step, i, c, float(s.values[i, c]), bs[i].tag)
            for s in trajectory for i in range(n) for c in range(s.dim))
    with open(path, "w", newline="") as fh:
        if fmt == "csv":
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "agent", "component", "value", "behavior"])
            for step, i, c, v, tag in rows:
                w.writerow([step, i, c, repr(v), tag])
        elif fmt == "json":
            for step, i, c, v, tag in rows:
                fh.write(json.dumps({"step": step, "agent": i, "component": c,
                                     "value": v, "behavior": tag}) + "\n")
        else:
            raise ValueError(f"unknown format {fmt!r}")

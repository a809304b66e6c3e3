"""Per-robot behaviors along a team trace and the synchronization roles they play."""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Mapping, Sequence

from .automata import BuchiAutomaton, Edge, QuadLabel
from .bindings import bindings_of_label
from .models import State, state_name
from .product import ProductAutomaton
from .search import bystander_guard, dwell_minimum


class BehaviorError(RuntimeError):
    pass


@dataclass(frozen=True)
class BehaviorStep:
    state: State
    atoms: frozenset[str]
    index: int          # position of the realized edge in the raw trace
    progress: bool
    cost: float


@dataclass(frozen=True)
class Segment:
    """Dwell steps followed by the progress step of one trace edge."""
    edge: Edge
    dwell: tuple[BehaviorStep, ...]
    step: BehaviorStep

    @property
    def wait_state(self) -> State:
        return self.dwell[-1].state if self.dwell else None


@dataclass(frozen=True)
class Behavior:
    robot: str
    bindings: frozenset[str]
    initial: State
    steps: tuple[BehaviorStep, ...]
    cost: float

    def segments(self, beta_raw: Sequence[Edge]) -> tuple[tuple[Segment, ...], tuple[BehaviorStep, ...]]:
        """Group steps by progress edge; returns (segments, closing dwell steps)."""
        segs, pending = [], []
        for st in self.steps:
            if st.progress:
                segs.append(Segment(beta_raw[st.index], tuple(pending), st))
                pending = []
            else:
                pending.append(st)
        return tuple(segs), tuple(pending)

    def as_dict(self) -> dict:
        return {
            "robot": self.robot,
            "bindings": sorted(self.bindings),
            "cost": self.cost,
            "initial": state_name(self.initial),
            "steps": [{"state": state_name(s.state), "atoms": sorted(s.atoms),
                       "edge": s.index, "kind": "progress" if s.progress else "dwell"}
                      for s in self.steps],
        }


def find_behavior(g: ProductAutomaton, r: frozenset[str], beta_raw: Sequence[Edge],
                  robot: str = "") -> Behavior:
    """Minimum-cost path realizing ``beta_raw`` with bindings ``r``.

    Layered Dijkstra; ties go to fewer steps, then to the smaller state tuple.
    """
    n = len(beta_raw)
    b = g.buchi
    need = [dwell_minimum(b, beta_raw, i, True) if beta_raw[i].is_self else 0 for i in range(n)]
    start = (0, g.model.initial, 0)
    dist = {start: (0.0, 0)}
    prev: dict = {}
    heap = [(0.0, 0, 0, g.model.initial, 0)]
    goal = None
    while heap:
        w, k, i, s, dwelt = heapq.heappop(heap)
        node = (i, s, dwelt)
        if dist.get(node) != (w, k):
            continue
        if i == n:
            goal = node
            break
        e = beta_raw[i]
        moves = []
        if e.is_self:
            if dwelt >= need[i]:
                moves.append(((i + 1, s, 0), 0.0, 0, None))
            for t, ok in g.steps(e, s):
                if r <= ok:
                    moves.append(((i, t, 1), g.model.weight(s, t), 1, t))
        else:
            guard = bystander_guard(beta_raw, i, r)
            for t, ok in g.steps(e, s):
                if r <= ok and (guard is None or r <= g.cache(guard, g.model.label(t))):
                    moves.append(((i + 1, t, 0), g.model.weight(s, t), 1, t))
        for nxt, dw, dk, t in moves:
            cand = (w + dw, k + dk)
            if nxt not in dist or cand < dist[nxt]:
                dist[nxt] = cand
                prev[nxt] = (node, t, i, not e.is_self)
                heapq.heappush(heap, (cand[0], cand[1], nxt[0], nxt[1], nxt[2]))
    if goal is None:
        raise BehaviorError(f"robot {robot or g.model.name} cannot realize the trace "
                            f"with bindings {sorted(r)}")
    steps = []
    node = goal
    while node in prev:
        parent, t, i, is_progress = prev[node]
        if t is not None:
            steps.append(BehaviorStep(t, g.model.label(t), i, is_progress,
                                      g.model.weight(parent[1], t)))
        node = parent
    steps.reverse()
    return Behavior(robot or g.model.name, frozenset(r), g.model.initial, tuple(steps),
                    dist[goal][0])


def sync_participants(sigma: QuadLabel, R: Mapping[str, frozenset[str]]) -> frozenset[str]:
    """Robots whose bindings meet the bindings mentioned by ``sigma``."""
    needed = bindings_of_label(sigma)
    return frozenset(j for j, r in R.items() if r & needed)


def needs_sync(edge: Edge, b: BuchiAutomaton, participants: frozenset[str]) -> bool:
    return edge.dst not in b.intermediate and len(participants) > 1


@dataclass(frozen=True)
class ScheduledSegment:
    edge: Edge
    index: int
    dwell: tuple[BehaviorStep, ...]
    step: BehaviorStep
    synchronized: bool
    participants: frozenset[str]
    fence: bool


@dataclass(frozen=True)
class RobotProgram:
    robot: str
    bindings: frozenset[str]
    initial: State
    initial_atoms: frozenset[str]
    segments: tuple[ScheduledSegment, ...]
    tail: tuple[BehaviorStep, ...]


def execute_segments(behaviors: Mapping[str, Behavior], g: Mapping[str, ProductAutomaton],
                     beta_raw: Sequence[Edge], b: BuchiAutomaton,
                     R: Mapping[str, frozenset[str]]) -> dict[str, RobotProgram]:
    """Attach synchronization roles to every robot's segments.

    Segments that end in an intermediate state run unsynchronized. Segments that end in
    a regular state end with a team-wide fence, and their participants meet at a barrier
    before the progress step when more than one robot is involved.
    """
    out = {}
    for j, beh in sorted(behaviors.items()):
        segs, tail = beh.segments(beta_raw)
        sched = []
        for k, seg in enumerate(segs):
            part = sync_participants(seg.edge.label, R)
            sync = needs_sync(seg.edge, b, part) and j in part
            sched.append(ScheduledSegment(seg.edge, k, seg.dwell, seg.step, sync, part,
                                          seg.edge.dst not in b.intermediate))
        model = g[j].model
        out[j] = RobotProgram(j, beh.bindings, beh.initial, model.label(beh.initial),
                              tuple(sched), tail)
    return out

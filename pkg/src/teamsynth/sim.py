"""Discrete-event execution of robot programs and a runtime monitor."""
from __future__ import annotations

import heapq
import json
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping, Sequence

from .automata import BuchiAutomaton, label_holds_team
from .behavior import BehaviorStep, RobotProgram
from .models import ActionCatalog


class SimulationError(RuntimeError):
    def __init__(self, msg: str, result: "SimResult | None" = None):
        super().__init__(msg)
        self.result = result


class DeadlockError(SimulationError):
    pass


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    latency: float = 0.0
    horizon: int = 100_000
    durations: float | None = None          # override every duration model
    drop_from: frozenset[str] = frozenset()  # fault injection: messages never delivered


@dataclass
class SimResult:
    events: list[dict] = field(default_factory=list)
    snapshots: list[dict[str, frozenset[str]]] = field(default_factory=list)
    times: list[tuple[float, int]] = field(default_factory=list)
    messages: list[dict] = field(default_factory=list)

    def event_log(self) -> str:
        return "".join(json.dumps(e, sort_keys=True) + "\n" for e in self.events)

    def first_time(self, robot: str, atom: str) -> float | None:
        for (t, _), snap in zip(self.times, self.snapshots):
            if atom in snap.get(robot, ()):
                return t
        return None

    def first_index(self, pred: Callable[[dict], bool]) -> int | None:
        for i, snap in enumerate(self.snapshots):
            if pred(snap):
                return i
        return None


@dataclass(frozen=True)
class _Sleep:
    d: float


@dataclass(frozen=True)
class _Wait:
    pred: Callable[[], bool]


class _Engine:
    def __init__(self, programs: Mapping[str, RobotProgram], catalog: ActionCatalog,
                 config: SimConfig):
        self.programs = dict(sorted(programs.items()))
        self.catalog = catalog if config.durations is None else catalog.with_durations(config.durations)
        self.config = config
        self.rng = random.Random(config.seed)
        self.labels = {j: p.initial_atoms for j, p in self.programs.items()}
        self.team = frozenset(self.programs)
        self.ready: dict[int, set[str]] = {}
        self.completed: dict[int, set[str]] = {}
        self.pending_inst: dict[int, dict[str, frozenset[str]]] = {}
        self.applied: set[int] = set()
        self.done: dict[int, set[str]] = {}
        self.result = SimResult()
        self.now = (0.0, 0)
        self.seq = 0
        self.heap: list = []

    # ------------------------------------------------------------ plumbing
    def _push(self, when, item):
        self.seq += 1
        heapq.heappush(self.heap, (when[0], when[1], self.seq, item))

    def _after(self, d: float):
        t, mu = self.now
        return (t + d, 0) if d > 0 else (t, mu + 1)

    def _event(self, robot, kind, **extra):
        t, mu = self.now
        rec = {"t": round(t, 9), "micro": mu, "robot": robot, "kind": kind}
        rec.update(extra)
        self.result.events.append(rec)

    def _set(self, j, atoms):
        atoms = frozenset(atoms)
        if atoms != self.labels[j]:
            self.labels[j] = atoms
            self._event(j, "label", atoms=sorted(atoms))

    def _send(self, j, k, target, flag):
        t, mu = self.now
        msg = {"t": round(t, 9), "micro": mu, "sender": j, "target": target, "flag": flag}
        self.result.messages.append(msg)
        if j in self.config.drop_from:
            self._event(j, "dropped", target=target, flag=flag)
            return
        if self.config.latency > 0:
            self._push((t + self.config.latency, 0), ("deliver", j, k, flag))
        else:
            self._deliver(j, k, flag)

    def _deliver(self, j, k, flag):
        (self.ready if flag == 1 else self.completed).setdefault(k, set()).add(j)
        part = self._participants.get(k, frozenset())
        if flag == 0 and k not in self.applied and self.completed[k] >= part:
            self.applied.add(k)
            for p in sorted(part):
                extra = self.pending_inst[k].get(p, frozenset())
                if extra:
                    self._set(p, self.labels[p] | extra)

    # ------------------------------------------------------------ robots
    def _step(self, j, st: BehaviorStep) -> Iterator:
        old, new = self.labels[j], st.atoms
        if new == old:
            return
        slow = [a for a in new - old if self.catalog.is_noninst(a)]
        d = max((self.catalog.duration_of(a, self.rng) for a in slow), default=0.0)
        self._event(j, "start", state="|".join(st.state), duration=round(d, 9))
        yield _Sleep(d)
        self._set(j, new)

    def _robot(self, prog: RobotProgram) -> Iterator:
        j = prog.robot
        for seg in prog.segments:
            k = seg.index
            for st in seg.dwell:
                yield from self._step(j, st)
            if seg.synchronized:
                part = seg.participants & self.team
                self._participants[k] = part
                self._send(j, k, seg.edge.dst, 1)
                yield _Wait(lambda k=k, part=part: self.ready.get(k, set()) >= part)
                self._event(j, "release", target=seg.edge.dst)
                old, new = self.labels[j], seg.step.atoms
                gained = new - old
                slow = frozenset(a for a in gained if self.catalog.is_noninst(a))
                inst = gained - slow
                self.pending_inst.setdefault(k, {})[j] = inst
                d = max((self.catalog.duration_of(a, self.rng) for a in slow), default=0.0)
                self._event(j, "start", state="|".join(seg.step.state), duration=round(d, 9))
                yield _Sleep(d)
                self._set(j, new - inst)
                self._send(j, k, seg.edge.dst, 0)
                yield _Wait(lambda k=k: k in self.applied)
            else:
                yield from self._step(j, seg.step)
            if seg.fence:
                self.done.setdefault(k, set()).add(j)
                self._event(j, "arrived", target=seg.edge.dst)
                yield _Wait(lambda k=k: self.done.get(k, set()) >= self.team)
        for st in prog.tail:
            yield from self._step(j, st)
        self._event(j, "finished")

    # ------------------------------------------------------------ loop
    def run(self) -> SimResult:
        self._participants: dict[int, frozenset[str]] = {}
        gens = {j: self._robot(p) for j, p in self.programs.items()}
        waiting: dict[str, Callable[[], bool]] = {}
        for j in gens:
            self._push((0.0, 0), ("robot", j))
        self.result.snapshots.append(dict(self.labels))
        self.result.times.append((0.0, 0))
        batches = 0
        finished = set()
        while self.heap:
            batches += 1
            if batches > self.config.horizon:
                raise SimulationError("event horizon exhausted", self.result)
            t, mu = self.heap[0][0], self.heap[0][1]
            self.now = (t, mu)
            while self.heap and (self.heap[0][0], self.heap[0][1]) == (t, mu):
                item = heapq.heappop(self.heap)[3]
                if item[0] == "deliver":
                    self._deliver(*item[1:])
                    continue
                j = item[1]
                try:
                    cmd = next(gens[j])
                except StopIteration:
                    finished.add(j)
                    continue
                if isinstance(cmd, _Sleep):
                    self._push(self._after(cmd.d), ("robot", j))
                else:
                    waiting[j] = cmd.pred
            snap = dict(self.labels)
            if snap != self.result.snapshots[-1]:
                self.result.snapshots.append(snap)
                self.result.times.append((t, mu))
            for j in sorted(waiting):
                if waiting[j]():
                    del waiting[j]
                    self._push(self._after(0), ("robot", j))
        if waiting or finished != set(gens):
            raise DeadlockError(f"robots {sorted(waiting)} wait forever", self.result)
        return self.result


def simulate(programs: Mapping[str, RobotProgram], catalog: ActionCatalog,
             config: SimConfig = SimConfig()) -> SimResult:
    """Run every robot program; deterministic for a fixed config."""
    return _Engine(programs, catalog, config).run()


# ---------------------------------------------------------------- monitor

@dataclass(frozen=True)
class MonitorVerdict:
    outcome: str                      # "satisfied" or "violated"
    index: int | None = None
    snapshot: Mapping[str, frozenset[str]] | None = None
    explanation: str = ""

    @property
    def violated(self) -> bool:
        return self.outcome == "violated"

    def as_dict(self) -> dict:
        return {"outcome": self.outcome, "index": self.index,
                "snapshot": None if self.snapshot is None else
                {j: sorted(a) for j, a in sorted(self.snapshot.items())},
                "explanation": self.explanation}


def monitor(snapshots: Sequence[Mapping[str, frozenset[str]]], b: BuchiAutomaton,
            R: Mapping[str, frozenset[str]]) -> MonitorVerdict:
    """Replay team snapshots on ``b``; the last snapshot repeats forever."""
    if not snapshots:
        raise ValueError("empty trace")
    missing = sorted(j for j in R if any(j not in s for s in snapshots))
    if missing:
        raise ValueError(f"trace has no atoms for robots {missing}")
    by_src: dict[str, list] = {}
    for e in b.edges:
        by_src.setdefault(e.src, []).append(e)

    def step(states, snap):
        return {e.dst for z in states for e in by_src.get(z, ())
                if label_holds_team(e.label, snap, R)}

    current = {b.initial}
    for i, snap in enumerate(snapshots):
        nxt = step(current, snap)
        if not nxt:
            labels = sorted({str(e.label) for z in current for e in by_src.get(z, ())})
            return MonitorVerdict("violated", i, dict(snap),
                                  f"no edge from {sorted(current)} holds; guards: {labels}")
        current = nxt

    last = snapshots[-1]
    succ = {z: step({z}, last) for z in b.states}
    for z in sorted(b.accepting):
        if z in _reach(current, succ) and z in _reach(succ[z], succ):
            return MonitorVerdict("satisfied")
    return MonitorVerdict("violated", len(snapshots) - 1, dict(last),
                          "final snapshot never reaches an accepting cycle")


def _reach(start, succ) -> set[str]:
    seen = set(start)
    queue = deque(start)
    while queue:
        for m in succ[queue.popleft()]:
            if m not in seen:
                seen.add(m)
                queue.append(m)
    return seen

"""Capability transition systems, robot models and the action catalog."""
from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

State = tuple[str, ...]


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class CapabilityTS:
    name: str
    states: tuple[str, ...]
    initial: str
    labels: Mapping[str, frozenset[str]]
    weights: Mapping[tuple[str, str], float]

    def __post_init__(self):
        if self.initial not in self.states:
            raise ModelError(f"capability {self.name}: initial state {self.initial!r} unknown")
        for (a, b), w in self.weights.items():
            if a not in self.states or b not in self.states:
                raise ModelError(f"capability {self.name}: transition {a}->{b} uses unknown state")
            if w < 0:
                raise ModelError(f"capability {self.name}: negative weight on {a}->{b}")
        for x in self.states:
            if (x, x) not in self.weights:
                raise ModelError(f"capability {self.name}: state {x!r} has no self-transition")

    @property
    def atoms(self) -> frozenset[str]:
        return frozenset().union(*self.labels.values()) if self.labels else frozenset()

    def successors(self, x: str) -> list[tuple[str, float]]:
        return sorted((b, w) for (a, b), w in self.weights.items() if a == x)

    def with_initial(self, x: str) -> "CapabilityTS":
        return CapabilityTS(self.name, self.states, x, self.labels, self.weights)


def capability(name: str, labels: Mapping[str, Iterable[str]], transitions: Iterable,
               initial: str | None = None) -> CapabilityTS:
    """Build a capability; self-transitions with weight 0 are added where missing."""
    states = tuple(labels)
    weights = {}
    for t in transitions:
        a, b, *w = t
        weights[(a, b)] = float(w[0]) if w else 0.0
    for x in states:
        weights.setdefault((x, x), 0.0)
    return CapabilityTS(name, states, initial or states[0],
                        {x: frozenset(v) for x, v in labels.items()}, weights)


def motion_capability(locations: Sequence[str], roads: Iterable[tuple[str, str, float]],
                      start: str, name: str = "motion") -> CapabilityTS:
    """Two states per location: ``to_X`` labeled ``{X}`` and ``at_X`` labeled ``{X_c}``.

    Departing ``at_X`` toward a neighbor ``Y`` costs the road length; arriving is free.
    """
    labels = {}
    for x in locations:
        labels[f"at_{x}"] = {f"{x}_c"}
        labels[f"to_{x}"] = {x}
    trans = []
    for a, b, d in roads:
        for u, v in ((a, b), (b, a)):
            trans.append((f"at_{u}", f"to_{v}", float(d)))
            trans.append((f"to_{v}", f"at_{v}", 0.0))
    return capability(name, labels, trans, f"at_{start}")


@dataclass(frozen=True)
class RobotModel:
    name: str
    components: tuple[str, ...]
    states: tuple[State, ...]
    initial: State
    labels: Mapping[State, frozenset[str]]
    succ: Mapping[State, tuple[tuple[State, float], ...]]

    @property
    def atoms(self) -> frozenset[str]:
        return frozenset().union(*self.labels.values())

    def label(self, s: State) -> frozenset[str]:
        return self.labels[s]

    def successors(self, s: State) -> tuple[tuple[State, float], ...]:
        return self.succ[s]

    def weight(self, s: State, t: State) -> float:
        for u, w in self.succ[s]:
            if u == t:
                return w
        raise KeyError((s, t))

    def edge_count(self) -> int:
        return sum(len(v) for v in self.succ.values())


def state_name(s: State) -> str:
    return "|".join(s)


def product(capabilities: Sequence[CapabilityTS], name: str = "robot") -> RobotModel:
    """Synchronous product; every component moves along its relation or stays."""
    if not capabilities:
        raise ModelError("a robot needs at least one capability")
    names = [c.name for c in capabilities]
    if len(set(names)) != len(names):
        raise ModelError(f"duplicate capability names in {names}")
    for a, b in itertools.combinations(capabilities, 2):
        clash = a.atoms & b.atoms
        if clash:
            raise ModelError(f"capabilities {a.name} and {b.name} share atoms {sorted(clash)}")
    states = tuple(itertools.product(*(c.states for c in capabilities)))
    labels = {s: frozenset().union(*(c.labels[x] for c, x in zip(capabilities, s)))
              for s in states}
    comp_succ = [{x: c.successors(x) for x in c.states} for c in capabilities]
    succ = {}
    for s in states:
        outs = []
        for combo in itertools.product(*(cs[x] for cs, x in zip(comp_succ, s))):
            outs.append((tuple(x for x, _ in combo), sum(w for _, w in combo)))
        succ[s] = tuple(sorted(outs))
    initial = tuple(c.initial for c in capabilities)
    return RobotModel(name, tuple(names), states, initial, labels, succ)


# ---------------------------------------------------------------- actions

Duration = float | tuple[float, float]


@dataclass(frozen=True)
class ActionSpec:
    action: str
    completion: str
    duration: Duration = 0.0

    @property
    def bounds(self) -> tuple[float, float]:
        d = self.duration
        return (float(d), float(d)) if isinstance(d, (int, float)) else (float(d[0]), float(d[1]))

    @property
    def instantaneous(self) -> bool:
        return self.bounds == (0.0, 0.0)

    def sample(self, rng: random.Random) -> float:
        lo, hi = self.bounds
        return lo if lo == hi else rng.uniform(lo, hi)


@dataclass(frozen=True)
class ActionCatalog:
    specs: Mapping[str, ActionSpec]
    _by_completion: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        for a in self.specs.values():
            self._by_completion[a.completion] = a

    def spec_for(self, atom: str) -> ActionSpec | None:
        return self.specs.get(atom) or self._by_completion.get(atom)

    def is_noninst(self, atom: str) -> bool:
        """Completion atoms whose action takes time; actions themselves never do."""
        spec = self._by_completion.get(atom)
        return spec is not None and not spec.instantaneous

    def duration_of(self, atom: str, rng: random.Random) -> float:
        spec = self._by_completion.get(atom)
        return 0.0 if spec is None else spec.sample(rng)

    def with_durations(self, value: float) -> "ActionCatalog":
        return ActionCatalog({k: ActionSpec(v.action, v.completion, value)
                              for k, v in self.specs.items()})

    def check(self, atoms: Iterable[str]) -> None:
        missing = sorted(a for a in atoms if self.spec_for(a) is None)
        if missing:
            raise ModelError(f"atoms without a duration model: {missing}")


def classify(catalog: ActionCatalog) -> tuple[frozenset[str], frozenset[str]]:
    """Partition catalog atoms into (instantaneous, non-instantaneous)."""
    inst, non = set(), set()
    for a in catalog.specs.values():
        inst.add(a.action)
        (inst if a.instantaneous else non).add(a.completion)
    return frozenset(inst), frozenset(non)


# ---------------------------------------------------------------- fleets

@dataclass(frozen=True)
class Fleet:
    robots: Mapping[str, RobotModel]
    catalog: ActionCatalog
    capabilities: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    @property
    def names(self) -> list[str]:
        return sorted(self.robots)

    def subset(self, names: Iterable[str]) -> "Fleet":
        names = list(names)
        unknown = [n for n in names if n not in self.robots]
        if unknown:
            raise ModelError(f"unknown robots {unknown}")
        return Fleet({n: self.robots[n] for n in names}, self.catalog,
                     {n: self.capabilities.get(n, ()) for n in names})


def _parse_duration(v) -> Duration:
    if isinstance(v, (int, float)):
        if v < 0:
            raise ModelError("durations must be non-negative")
        return float(v)
    if isinstance(v, list) and len(v) == 2 and 0 <= v[0] <= v[1]:
        return (float(v[0]), float(v[1]))
    raise ModelError(f"duration must be a number or [lo, hi], got {v!r}")


def fleet_from_dict(cfg: Mapping) -> Fleet:
    """Build a fleet from the documented JSON schema (see README)."""
    try:
        env = cfg["environment"]
        locations = list(env["locations"])
        roads = [tuple(r) for r in env["roads"]]
        caps_cfg = cfg["capabilities"]
        robots_cfg = cfg["robots"]
        durations = cfg["durations"]
    except KeyError as exc:
        raise ModelError(f"fleet config missing key {exc}") from exc
    for a, b, _ in roads:
        if a not in locations or b not in locations:
            raise ModelError(f"road {a}-{b} references an unknown location")

    specs = {}
    motion_d = _parse_duration(durations.get("motion", 0.0))
    for x in locations:
        specs[x] = ActionSpec(x, f"{x}_c", motion_d)
    for cap_name, c in caps_cfg.items():
        for act in c.get("actions", []):
            if act not in durations:
                raise ModelError(f"action {act!r} of capability {cap_name} has no duration")
            specs[act] = ActionSpec(act, f"{act}_c", _parse_duration(durations[act]))
    catalog = ActionCatalog(specs)

    robots, capmap = {}, {}
    for rname in sorted(robots_cfg):
        rc = robots_cfg[rname]
        comps = []
        for cap_name in rc["capabilities"]:
            if cap_name == "motion":
                start = rc.get("start")
                if start not in locations:
                    raise ModelError(f"robot {rname}: start {start!r} is not a location")
                comps.append(motion_capability(locations, roads, start))
                continue
            if cap_name not in caps_cfg:
                raise ModelError(f"robot {rname}: unknown capability {cap_name!r}")
            c = caps_cfg[cap_name]
            comps.append(capability(cap_name, c["states"], c.get("transitions", []),
                                    c.get("initial")))
        model = product(comps, rname)
        catalog.check(model.atoms)
        robots[rname] = model
        capmap[rname] = tuple(rc["capabilities"])
    return Fleet(robots, catalog, capmap)


BUILTIN_FLEETS = {"warehouse": "warehouse.json"}


def load_fleet(source: str | Path) -> Fleet:
    """Load a fleet by builtin name (``warehouse``) or JSON file path."""
    if str(source) in BUILTIN_FLEETS:
        text = resources.files("teamsynth.data").joinpath(BUILTIN_FLEETS[str(source)]).read_text()
    else:
        path = Path(source)
        if not path.is_file():
            raise ModelError(f"fleet file {path} not found")
        text = path.read_text(encoding="utf-8")
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"fleet config is not valid JSON: {exc}") from exc
    return fleet_from_dict(cfg)

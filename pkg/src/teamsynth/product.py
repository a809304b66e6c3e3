"""Robot model x Büchi automaton, built once and patched after Büchi updates."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping

from .automata import BuchiAutomaton, Edge, QuadLabel
from .bindings import passing_bindings
from .models import RobotModel, State

Step = tuple[State, frozenset[str]]     # (next robot state, individually passing bindings)
Node = tuple[State, str]


class ProductError(ValueError):
    pass


class _PassCache:
    """Memoized passing-binding sets keyed by (label, robot label)."""

    def __init__(self, universe: frozenset[str]):
        self.universe = universe
        self._memo: dict = {}

    def __call__(self, sigma: QuadLabel, label: frozenset[str]) -> frozenset[str]:
        key = (sigma, label)
        out = self._memo.get(key)
        if out is None:
            out = self._memo[key] = passing_bindings(sigma, label, self.universe)
        return out


@dataclass
class ProductAutomaton:
    """Product edges grouped by the Büchi edge they realize.

    ``edges[e][s]`` lists ``(s', passing)`` for robot moves ``s -> s'`` that some
    binding can take under ``e``'s label; any non-empty subset of ``passing`` is a
    valid binding set for the move.
    """
    model: RobotModel
    buchi: BuchiAutomaton
    universe: frozenset[str]
    edges: dict[Edge, dict[State, tuple[Step, ...]]]
    cache: _PassCache

    @property
    def initial(self) -> Node:
        return (self.model.initial, self.buchi.initial)

    def is_accepting(self, q: Node) -> bool:
        return q[1] in self.buchi.accepting

    def label(self, q: Node) -> frozenset[str]:
        return self.model.label(q[0])

    def successors(self, q: Node) -> list[tuple[Node, float, frozenset[str], Edge]]:
        s, z = q
        out = []
        for e in self.buchi.out_edges(z):
            for t, ok in self.edges.get(e, {}).get(s, ()):
                out.append(((t, e.dst), self.model.weight(s, t), ok, e))
        return out

    def steps(self, e: Edge, s: State) -> tuple[Step, ...]:
        return self.edges.get(e, {}).get(s, ())

    def reachable(self) -> set[Node]:
        seen = {self.initial}
        queue = deque(seen)
        while queue:
            for m, *_ in self.successors(queue.popleft()):
                if m not in seen:
                    seen.add(m)
                    queue.append(m)
        return seen

    def structure(self) -> frozenset:
        """Reachable edges as ((s,z), (s',z'), label, passing) tuples."""
        out = set()
        for q in self.reachable():
            for m, _, ok, e in self.successors(q):
                out.add((q, m, e.label, ok))
        return frozenset(out)

    def edge_count(self) -> int:
        return sum(len(v) for per in self.edges.values() for v in per.values())


def _cross(model: RobotModel, edges: Iterable[Edge], cache: _PassCache):
    out = {}
    for e in edges:
        per = {}
        for s in model.states:
            steps = []
            for t, _ in model.successors(s):
                ok = cache(e.label, model.label(t))
                if ok:
                    steps.append((t, ok))
            if steps:
                per[s] = tuple(steps)
        out[e] = per
    return out


def build(model: RobotModel, b: BuchiAutomaton, universe: Iterable[str]) -> ProductAutomaton:
    cache = _PassCache(frozenset(universe))
    return ProductAutomaton(model, b, cache.universe, _cross(model, b.edges, cache), cache)


def update(g: ProductAutomaton, b_old: BuchiAutomaton, b_upd: BuchiAutomaton,
           e_upd: Iterable[Edge]) -> ProductAutomaton:
    """Patch ``g`` (built against ``b_old``) to match ``b_upd``; ``g`` is not modified."""
    e_upd = tuple(e_upd)
    upd_edges = set(b_upd.edges)
    for e in e_upd:
        if e not in upd_edges:
            raise ProductError(f"updated edge {e} is not in the updated automaton")
    if not e_upd:
        return ProductAutomaton(g.model, b_upd, g.universe, g.edges, g.cache)
    edges = dict(g.edges)
    removed = [e for e in b_old.edges if e not in upd_edges]
    if len(e_upd) == 3:
        for e in removed:
            edges.pop(e, None)
        edges.update(_cross(g.model, [e for e in e_upd if e not in edges], g.cache))
    elif len(e_upd) == 1:
        (mod,) = e_upd
        old = [e for e in removed if e.src == mod.src and e.dst == mod.dst]
        if len(old) != 1:
            raise ProductError("a single updated edge must replace exactly one edge")
        per = {}
        for s, steps in g.edges.get(old[0], {}).items():
            kept = []
            for t, _ in steps:
                ok = g.cache(mod.label, g.model.label(t))
                if ok:
                    kept.append((t, ok))
            if kept:
                per[s] = tuple(kept)
        del edges[old[0]]
        if mod in edges:
            merged = dict(edges[mod])
            merged.update(per)
            per = merged
        edges[mod] = per
    else:
        raise ProductError(f"expected 0, 1 or 3 updated edges, got {len(e_upd)}")
    return ProductAutomaton(g.model, b_upd, g.universe, edges, g.cache)


def isomorphic(g1: ProductAutomaton, g2: ProductAutomaton) -> bool:
    """Equality of reachable structure; state names are shared so identity is the witness."""
    return g1.initial == g2.initial and g1.structure() == g2.structure() and \
        {q for q in g1.reachable() if g1.is_accepting(q)} == \
        {q for q in g2.reachable() if g2.is_accepting(q)}


def build_all(models: Mapping[str, RobotModel], b: BuchiAutomaton,
              universe: Iterable[str]) -> dict[str, ProductAutomaton]:
    return {name: build(m, b, universe) for name, m in sorted(models.items())}

"""Büchi update with intermediate states and binding constraints."""
from __future__ import annotations

from dataclasses import dataclass, field

from .automata import BuchiAutomaton, Edge, QuadLabel
from .bindings import PiSets, bindings_of_set, intermediate_props, pi_sets
from .models import ActionCatalog


@dataclass(frozen=True)
class BindingConstraints:
    c_single: frozenset[frozenset[str]] = frozenset()
    c_combo: frozenset[frozenset[str]] = frozenset()

    def union(self, other: "BindingConstraints") -> "BindingConstraints":
        return BindingConstraints(self.c_single | other.c_single, self.c_combo | other.c_combo)

    def is_empty(self) -> bool:
        return not self.c_single and not self.c_combo

    def combo_ok(self, r: frozenset[str]) -> bool:
        """All-or-nothing: ``r`` may not hold part of a combo set."""
        return all(not (r & c) or c <= r for c in self.c_combo)

    def as_dict(self) -> dict[str, list[list[str]]]:
        def fmt(cs):
            return sorted(sorted(c) for c in cs)
        return {"c_single": fmt(self.c_single), "c_combo": fmt(self.c_combo)}


@dataclass(frozen=True)
class BuchiUpdate:
    automaton: BuchiAutomaton
    e_upd: tuple[Edge, ...]
    constraints: BindingConstraints
    case: int = 0
    pis: PiSets = field(default_factory=PiSets)
    removed: tuple[Edge, ...] = ()

    def log_line(self, e1: Edge, e2: Edge) -> str:
        return (f"update {e1} -> {e2}: case={self.case} "
                f"added={[str(e) for e in self.e_upd]} "
                f"constraints={self.constraints.as_dict()}")


def intermediate_label(sigma12: QuadLabel, pis: PiSets) -> QuadLabel:
    return QuadLabel(sigma12.T | pis.empty_T, sigma12.exT | pis.empty_exT,
                     sigma12.F | pis.empty_F, sigma12.exF | pis.empty_exF)


def intermediate_name(b: BuchiAutomaton, z1: str) -> str:
    name = f"{z1}*"
    k = 1
    while name in b.states:
        k += 1
        name = f"{z1}*{k}"
    return name


def update_buchi(b: BuchiAutomaton, e1: Edge, e2: Edge, catalog: ActionCatalog,
                 insert: bool = True) -> BuchiUpdate:
    """Check two consecutive edges and enforce an ordering of non-instantaneous completions.

    With ``insert=False`` only the constraints are computed (ablation).
    """
    if e1.dst != e2.src:
        raise ValueError(f"edges {e1} and {e2} are not consecutive")
    for e in (e1, e2):
        if not b.has_edge(e):
            raise ValueError(f"edge {e} is not in the automaton")
    if e1.is_self == e2.is_self:
        raise ValueError("exactly one of the two edges must be a self-transition")

    I1 = intermediate_props(e1.label, catalog)
    I2 = intermediate_props(e2.label, catalog)
    pis = pi_sets(I1, I2, e1.label.pairs())

    single, combo = set(), set()
    if pis.T | pis.F:
        single.add(bindings_of_set(pis.T | pis.F))
    if len(pis.exT | pis.exF) >= 2:
        combo.add(bindings_of_set(pis.exT | pis.exF))
    cons = BindingConstraints(frozenset(single), frozenset(combo))

    if len(I2.pairs()) <= 1 or not pis.changing or not insert:
        return BuchiUpdate(b, (), cons, 0, pis)

    sigma_star = intermediate_label(e1.label, pis)
    if sigma_star == e1.label:
        # nothing new to complete first; an extra state would only copy e1
        return BuchiUpdate(b, (), cons, 0, pis)

    if e1.is_self:
        z1, z3 = e1.src, e2.dst
        zs = intermediate_name(b, z1)
        new = (Edge(z1, e1.label, zs), Edge(zs, sigma_star, zs), Edge(zs, e2.label, z3))
        edges = (set(b.edges) - {e2}) | set(new)
        upd = b.with_edges(edges, states=b.states + (zs,),
                           intermediate=b.intermediate | {zs})
        return BuchiUpdate(upd, new, cons, 1, pis, (e2,))

    mod = Edge(e1.src, sigma_star, e1.dst)
    edges = (set(b.edges) - {e1}) | {mod}
    return BuchiUpdate(b.with_edges(edges), (mod,), cons, 2, pis, (e1,))

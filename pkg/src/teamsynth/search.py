"""Depth-first search for an accepting Büchi trace and a team binding assignment."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

from .automata import BuchiAutomaton, Edge, QuadLabel
from .bindings import bindings_of_label, nonempty_subsets
from .models import ActionCatalog, State
from .product import ProductAutomaton, update as update_product
from .update import BindingConstraints, update_buchi

BindingSet = frozenset[str]


class Unsat(Exception):
    """No team, trace and binding assignment satisfy the task."""


@dataclass(frozen=True)
class TeamPlan:
    beta_raw: tuple[Edge, ...]
    beta: tuple[Edge, ...]
    delta_self: Mapping[str, QuadLabel]
    team: tuple[str, ...]
    assignments: Mapping[str, BindingSet]
    candidates: Mapping[str, tuple[BindingSet, ...]]
    constraints: BindingConstraints
    automaton: BuchiAutomaton
    original: BuchiAutomaton
    universe: frozenset[str]
    products: Mapping[str, ProductAutomaton] = field(repr=False, compare=False, default=None)
    log: tuple[str, ...] = ()
    expanded: int = 0

    def as_dict(self) -> dict:
        return {
            "team": list(self.team),
            "assignments": {j: sorted(r) for j, r in sorted(self.assignments.items())},
            "candidates": {j: [sorted(r) for r in rs] for j, rs in sorted(self.candidates.items())},
            "constraints": self.constraints.as_dict(),
            "beta": [_edge_dict(e) for e in self.beta],
            "beta_raw": [_edge_dict(e) for e in self.beta_raw],
            "delta_self": {z: str(l) for z, l in sorted(self.delta_self.items())},
            "intermediate_states": sorted(self.automaton.intermediate),
        }


def _edge_dict(e: Edge) -> dict:
    return {"src": e.src, "dst": e.dst, "label": str(e.label)}


# ---------------------------------------------------------------- paths

def dwell_minimum(b: BuchiAutomaton, beta: Sequence[Edge], idx: int, final: bool) -> int:
    """Dwell steps required by the self-loop ``beta[idx]``.

    Intermediate states must be occupied for at least one step (the ordering they
    enforce would be skipped otherwise); so must the closing accepting loop.
    """
    e = beta[idx]
    if e.src in b.intermediate:
        return 1
    if final and idx == len(beta) - 1 and e.src in b.accepting:
        return 1
    return 0


def bystander_guard(beta: Sequence[Edge], idx: int, r: BindingSet) -> QuadLabel | None:
    """Extra label for a progress step the robot takes without being mentioned.

    Such a step is not synchronized with the team, so the team may still be
    dwelling on the previous self-loop when it happens.
    """
    e = beta[idx]
    if idx == 0 or e.is_self or r & bindings_of_label(e.label) or not beta[idx - 1].is_self:
        return None
    return beta[idx - 1].label


def reachable_along(g: ProductAutomaton, beta: Sequence[Edge], r: BindingSet,
                    final: bool = False) -> set[State]:
    """Robot states reachable while realizing ``beta`` with fixed bindings ``r``."""
    frontier = {g.model.initial}
    for idx, e in enumerate(beta):
        if e.is_self:
            need = dwell_minimum(g.buchi, beta, idx, final)
            seen: set[State] = set()
            layer = frontier
            while layer:
                nxt = set()
                for s in layer:
                    for t, ok in g.steps(e, s):
                        if r <= ok and t not in seen:
                            seen.add(t)
                            nxt.add(t)
                layer = nxt
            frontier = seen if need else frontier | seen
        else:
            guard = bystander_guard(beta, idx, r)
            frontier = {t for s in frontier for t, ok in g.steps(e, s) if r <= ok
                        and (guard is None or r <= g.cache(guard, g.model.label(t)))}
        if not frontier:
            break
    return frontier


def update_bindings(candidates: Sequence[BindingSet], g: ProductAutomaton, beta: Sequence[Edge],
                    constraints: BindingConstraints, final: bool = False) -> tuple[BindingSet, ...]:
    """Keep the candidates a robot can realize along ``beta``; combo constraints filter first."""
    kept, failed = [], []
    for r in sorted(candidates, key=lambda r: (len(r), sorted(r))):
        if not constraints.combo_ok(r):
            continue
        if any(f <= r for f in failed):
            continue
        if reachable_along(g, beta, r, final):
            kept.append(r)
        else:
            failed.append(r)
    return tuple(kept)


# ---------------------------------------------------------------- trace parsing

def parse_trace(beta_raw: Sequence[Edge], b: BuchiAutomaton | None = None
                ) -> tuple[tuple[Edge, ...], dict[str, QuadLabel]]:
    """Split a raw trace into progress edges and the self-loop label per visited state."""
    progress = tuple(e for e in beta_raw if not e.is_self)
    delta: dict[str, QuadLabel] = {}
    for e in beta_raw:
        if e.is_self:
            delta[e.src] = e.label
    visited = [beta_raw[0].src] if beta_raw else []
    visited += [e.dst for e in progress]
    for z in visited:
        if z not in delta and b is not None:
            loops = b.self_loops(z)
            if loops:
                delta[z] = loops[0].label
    return progress, delta


# ---------------------------------------------------------------- assignment

def _largest(rs: Sequence[BindingSet]) -> BindingSet:
    return min(rs, key=lambda r: (-len(r), sorted(r)))


def initial_assignment(cands: Mapping[str, Sequence[BindingSet]],
                       universe: frozenset[str]) -> dict[str, BindingSet] | None:
    """Largest feasible set per robot; falls back to a covering combination."""
    pick = {j: _largest(rs) for j, rs in sorted(cands.items())}
    if frozenset().union(*pick.values()) == universe:
        return pick
    names = sorted(cands)
    ordered = [sorted(cands[j], key=lambda r: (-len(r), sorted(r))) for j in names]
    for combo in itertools.product(*ordered):
        if frozenset().union(*combo) == universe:
            return dict(zip(names, combo))
    return None


Chooser = Callable[[BindingSet, list[str], Mapping[str, BindingSet]], str]


def choose_by_name(c: BindingSet, robots: list[str], assignments) -> str:
    return sorted(robots)[0]


def resolve_single(plan: TeamPlan, chooser: Chooser = choose_by_name) -> TeamPlan:
    """Give every exactly-one binding set to one robot; others drop those bindings."""
    R = {j: frozenset(r) for j, r in plan.assignments.items()}
    for c in sorted(plan.constraints.c_single, key=sorted):
        holders = sorted(j for j, r in R.items() if c <= r)
        if not holders:
            raise Unsat(f"no robot can hold all of bindings {sorted(c)}")
        keep = chooser(c, holders, R) if len(holders) > 1 else holders[0]
        if keep not in holders:
            raise ValueError(f"chooser picked {keep!r}, not one of {holders}")
        for j in list(R):
            if j != keep and R[j] & c:
                R[j] = R[j] - c
                if not R[j]:
                    del R[j]
    if frozenset().union(*R.values()) != plan.universe:
        raise Unsat("resolving exactly-one constraints leaves bindings uncovered")
    return replace(plan, team=tuple(sorted(R)), assignments=R)


def verify_plan(plan: TeamPlan) -> None:
    """Independent re-check: each member realizes the trace with its final bindings."""
    for j in plan.team:
        g = plan.products[j]
        if not reachable_along(g, plan.beta_raw, plan.assignments[j], final=True):
            raise AssertionError(f"robot {j} cannot realize the trace with {sorted(plan.assignments[j])}")
    if frozenset().union(*plan.assignments.values()) != plan.universe:
        raise AssertionError("assignments do not cover every binding")


# ---------------------------------------------------------------- search

def _preference(e: Edge):
    """Weakest guard first, then the stable edge order."""
    return (len(e.label.atom_lits()), e)


@dataclass
class _Node:
    edge: Edge
    cands: dict[str, tuple[BindingSet, ...]]
    beta: tuple[Edge, ...]
    b: BuchiAutomaton
    products: dict[str, ProductAutomaton]
    C: BindingConstraints


def find_team(b: BuchiAutomaton, products: Mapping[str, ProductAutomaton], universe,
              catalog: ActionCatalog, strict: bool = False, insert: bool = True,
              max_nodes: int = 200_000) -> TeamPlan:
    """DFS over Büchi edges with per-branch automaton and product copies.

    Raises :class:`Unsat` when the search is exhausted.
    """
    universe = frozenset(universe)
    all_sets = tuple(nonempty_subsets(universe))
    start = {j: all_sets for j in sorted(products)}
    stack: list[_Node] = []
    for e in reversed(sorted(b.out_edges(b.initial), key=_preference)):
        stack.append(_Node(e, start, (), b, dict(products), BindingConstraints()))
    visited = set()
    log: list[str] = []
    expanded = 0
    while stack:
        node = stack.pop()
        key = node.edge
        if strict:
            key = (node.edge, node.beta[-1] if node.beta else None,
                   tuple(sorted(node.cands.items())), node.C)
        if key in visited:
            continue
        visited.add(key)
        expanded += 1
        if expanded > max_nodes:
            raise Unsat(f"search budget of {max_nodes} nodes exhausted")

        e2 = node.edge
        if node.beta:
            e1 = node.beta[-1]
            upd = update_buchi(node.b, e1, e2, catalog, insert=insert)
            log.append(upd.log_line(e1, e2))
            if upd.case == 1:
                beta = node.beta + upd.e_upd
            elif upd.case == 2:
                beta = node.beta[:-1] + upd.e_upd + (e2,)
            else:
                beta = node.beta + (e2,)
            b_upd, e_upd, cons = upd.automaton, upd.e_upd, upd.constraints
        else:
            beta, b_upd, e_upd, cons = (e2,), node.b, (), BindingConstraints()
        C = node.C.union(cons)
        final = e2.is_self and e2.src in b_upd.accepting

        products_upd, cands = {}, {}
        for j, rs in node.cands.items():
            g = update_product(node.products[j], node.b, b_upd, e_upd)
            kept = update_bindings(rs, g, beta, C, final=final)
            if kept:
                products_upd[j] = g
                cands[j] = kept
        covered = frozenset().union(*(r for rs in cands.values() for r in rs))
        if covered != universe:
            continue

        if final:
            pick = initial_assignment(cands, universe)
            if pick is None:
                continue
            progress, delta = parse_trace(beta, b_upd)
            return TeamPlan(beta, progress, delta, tuple(sorted(pick)), pick, cands, C,
                            b_upd, b, universe, products_upd, tuple(log), expanded)

        last = beta[-1]
        z = last.dst
        succ = sorted((e for e in b_upd.out_edges(z) if e.is_self != last.is_self),
                      key=_preference)
        for e in reversed(succ):
            stack.append(_Node(e, cands, beta, b_upd, products_upd, C))
    raise Unsat("no accepting trace with full binding coverage")

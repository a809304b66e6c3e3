"""Büchi automata over quantified binding propositions.

Each proposition ``pi`` under binding ``rho`` contributes two Boolean atoms:

* ``A_<pi>_r<rho>``  every robot holding ``rho`` has ``pi``
* ``E_<pi>_r<rho>``  some robot holding ``rho`` has ``pi``

A conjunction of atom literals maps onto the four label sets::

    A_x   -> sigma_T     (for all true)
    !A_x  -> sigma_exF   (some false)
    E_x   -> sigma_exT   (some true)
    !E_x  -> sigma_F     (for all false)

With at least one holder ``A_x`` implies ``E_x``, so ``A_x & !E_x`` is
inconsistent and such conjuncts are dropped.
"""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from . import logic
from .logic import (EXISTS, FORALL, Always, And, Const, Eventually, Formula, Lit, Not, Or,
                    Prop, Release, Until)

Pair = tuple[str, str]          # (proposition, binding)
AtomLit = tuple[str, bool]      # (atom name, polarity)


class AutomatonError(ValueError):
    pass


# ---------------------------------------------------------------- atoms

_ATOM_RE = re.compile(r"^([AE])_(.+)_r([A-Za-z0-9]+)$")


def atom_name(kind: str, prop: str, rho: str) -> str:
    return f"{kind}_{prop}_r{rho}"


def parse_atom(name: str) -> tuple[str, str, str]:
    m = _ATOM_RE.match(name)
    if not m:
        raise AutomatonError(f"atom {name!r} does not follow the A_<prop>_r<binding> convention")
    return m.group(1), m.group(2), m.group(3)


def lit_to_atom(lit: Lit) -> AtomLit:
    if lit.quant == FORALL:
        return (atom_name("A", lit.prop, lit.binding), True) if lit.positive \
            else (atom_name("E", lit.prop, lit.binding), False)
    return (atom_name("E", lit.prop, lit.binding), True) if lit.positive \
        else (atom_name("A", lit.prop, lit.binding), False)


def _conflicts(lits: Iterable[AtomLit]) -> bool:
    lits = set(lits)
    for name, pol in lits:
        if (name, not pol) in lits:
            return True
        if pol and name.startswith("A_") and ("E" + name[1:], False) in lits:
            return True
    return False


# ---------------------------------------------------------------- labels

@dataclass(frozen=True)
class QuadLabel:
    T: frozenset = frozenset()
    exT: frozenset = frozenset()
    F: frozenset = frozenset()
    exF: frozenset = frozenset()

    @classmethod
    def of(cls, T=(), exT=(), F=(), exF=()) -> "QuadLabel":
        return cls(frozenset(T), frozenset(exT), frozenset(F), frozenset(exF))

    def parts(self) -> tuple[frozenset, frozenset, frozenset, frozenset]:
        return (self.T, self.exT, self.F, self.exF)

    def pairs(self) -> frozenset:
        return self.T | self.exT | self.F | self.exF

    def is_empty(self) -> bool:
        return not self.pairs()

    def union(self, other: "QuadLabel") -> "QuadLabel":
        return QuadLabel(self.T | other.T, self.exT | other.exT,
                         self.F | other.F, self.exF | other.exF)

    def contains(self, other: "QuadLabel") -> bool:
        return all(o <= s for s, o in zip(self.parts(), other.parts()))

    def atom_lits(self) -> frozenset[AtomLit]:
        out = set()
        for p, r in self.T:
            out.add((atom_name("A", p, r), True))
        for p, r in self.exF:
            out.add((atom_name("A", p, r), False))
        for p, r in self.exT:
            out.add((atom_name("E", p, r), True))
        for p, r in self.F:
            out.add((atom_name("E", p, r), False))
        return frozenset(out)

    def consistent(self) -> bool:
        return not _conflicts(self.atom_lits())

    def sort_key(self):
        return tuple(tuple(sorted(s)) for s in self.parts())

    def __str__(self):
        def fmt(s):
            return "{" + ",".join(f"{p}^{r}" for p, r in sorted(s)) + "}"
        return "(" + ", ".join(fmt(s) for s in self.parts()) + ")"


def label_from_atoms(lits: Iterable[AtomLit]) -> QuadLabel | None:
    """Map one conjunct of atom literals to a label; ``None`` if inconsistent."""
    lits = set(lits)
    if _conflicts(lits):
        return None
    T, exT, F, exF = set(), set(), set(), set()
    for name, pol in lits:
        kind, p, r = parse_atom(name)
        if kind == "A":
            (T if pol else exF).add((p, r))
        else:
            (exT if pol else F).add((p, r))
    # all-false implies some-false, all-true implies some-true
    exF -= F
    exT -= T
    return QuadLabel.of(T, exT, F, exF)


def label_holds_valuation(label: QuadLabel, valuation: Iterable[str]) -> bool:
    v = set(valuation)
    return all((name in v) == pol for name, pol in label.atom_lits())


def label_holds_team(label: QuadLabel, snapshot: Mapping[str, Iterable[str]],
                     R: Mapping[str, Iterable[str]]) -> bool:
    """Label satisfaction by a team snapshot under binding assignment ``R``."""
    snap = {j: frozenset(s) for j, s in snapshot.items()}
    for quant, pos, pairs in ((FORALL, True, label.T), (EXISTS, True, label.exT),
                              (FORALL, False, label.F), (EXISTS, False, label.exF)):
        for p, r in pairs:
            if not logic.lit_holds(Lit(p, r, quant, pos), snap, R):
                return False
    return True


def team_valuation(snapshot: Mapping[str, Iterable[str]], R: Mapping[str, Iterable[str]],
                   pairs: Iterable[Pair]) -> frozenset[str]:
    """Atom valuation induced by a team snapshot (assumes every binding is held)."""
    out = set()
    for p, r in pairs:
        hs = [j for j in R if r in R[j]]
        if hs and all(p in snapshot[j] for j in hs):
            out.add(atom_name("A", p, r))
        if any(p in snapshot[j] for j in hs):
            out.add(atom_name("E", p, r))
    return frozenset(out)


# ---------------------------------------------------------------- automaton

@dataclass(frozen=True, order=True)
class Edge:
    src: str
    label: QuadLabel = field(compare=False)
    dst: str
    key: tuple = field(default=(), repr=False)

    def __post_init__(self):
        object.__setattr__(self, "key", self.label.sort_key())

    @property
    def is_self(self) -> bool:
        return self.src == self.dst

    def __hash__(self):
        return hash((self.src, self.label, self.dst))

    def __eq__(self, other):
        return isinstance(other, Edge) and (self.src, self.label, self.dst) == \
            (other.src, other.label, other.dst)

    def __str__(self):
        return f"({self.src}, {self.label}, {self.dst})"


@dataclass(frozen=True)
class BuchiAutomaton:
    states: tuple[str, ...]
    initial: str
    edges: tuple[Edge, ...]
    accepting: frozenset[str]
    intermediate: frozenset[str] = frozenset()

    def out_edges(self, z: str) -> list[Edge]:
        return sorted(e for e in self.edges if e.src == z)

    def self_loops(self, z: str) -> list[Edge]:
        return [e for e in self.out_edges(z) if e.is_self]

    def has_edge(self, e: Edge) -> bool:
        return e in set(self.edges)

    def pairs(self) -> frozenset[Pair]:
        out = frozenset()
        for e in self.edges:
            out |= e.label.pairs()
        return out

    def bindings(self) -> frozenset[str]:
        return frozenset(r for _, r in self.pairs())

    def missing_self_loops(self) -> list[str]:
        looped = {e.src for e in self.edges if e.is_self}
        return [z for z in self.states if z not in looped and z not in self.intermediate]

    def require_self_loops(self) -> None:
        missing = self.missing_self_loops()
        if missing:
            raise AutomatonError(
                f"states {missing} have no self-transition; robots could not wait there")

    def with_edges(self, edges: Iterable[Edge], **changes) -> "BuchiAutomaton":
        edges = tuple(sorted(set(edges)))
        return replace(self, edges=edges, **changes)

    def structure(self):
        return (self.states, self.initial, frozenset(self.edges), self.accepting,
                self.intermediate)


# ---------------------------------------------------------------- translation

def _is_boolean(f: Formula) -> bool:
    if isinstance(f, (Const, Lit)):
        return True
    if isinstance(f, (And, Or)):
        return _is_boolean(f.left) and _is_boolean(f.right)
    return False


def _negate_boolean(f: Formula) -> Formula:
    if isinstance(f, Const):
        return Const(not f.value)
    if isinstance(f, Lit):
        return f.dual()
    if isinstance(f, And):
        return Or(_negate_boolean(f.left), _negate_boolean(f.right))
    return And(_negate_boolean(f.left), _negate_boolean(f.right))


def _conjuncts(f: Formula) -> list[Formula]:
    if isinstance(f, And):
        return _conjuncts(f.left) + _conjuncts(f.right)
    if f == Const(True):
        return []
    return [f]


def _expand(todo, lits, nxt, post, seen):
    """Tableau expansion: yields (atom literals, next obligations, postponed)."""
    if not todo:
        yield lits, nxt, post
        return
    f, rest = todo[0], todo[1:]
    if f in seen:
        yield from _expand(rest, lits, nxt, post, seen)
        return
    seen = seen | {f}
    if isinstance(f, Const):
        if f.value:
            yield from _expand(rest, lits, nxt, post, seen)
        return
    if isinstance(f, Lit):
        lit = lit_to_atom(f)
        if not _conflicts(lits | {lit}):
            yield from _expand(rest, lits | {lit}, nxt, post, seen)
        return
    if isinstance(f, And):
        yield from _expand([f.left, f.right] + rest, lits, nxt, post, seen)
    elif isinstance(f, Or):
        yield from _expand([f.left] + rest, lits, nxt, post, seen)
        yield from _expand([f.right] + rest, lits, nxt, post, seen)
    elif isinstance(f, (Until, Eventually)):
        left = Const(True) if isinstance(f, Eventually) else f.left
        right = f.child if isinstance(f, Eventually) else f.right
        yield from _expand([right] + rest, lits, nxt, post, seen)
        # postponing while the goal already holds is never needed
        guard = [_negate_boolean(right)] if _is_boolean(right) else []
        yield from _expand([left] + guard + rest, lits, nxt | {f}, post | {f}, seen)
    elif isinstance(f, Release):
        yield from _expand([f.left, f.right] + rest, lits, nxt, post, seen)
        guard = [_negate_boolean(f.left)] if _is_boolean(f.left) else []
        yield from _expand([f.right] + guard + rest, lits, nxt | {f}, post, seen)
    elif isinstance(f, Always):
        yield from _expand([f.child] + rest, lits, nxt | {f}, post, seen)
    else:
        raise AutomatonError(f"formula is not in negation normal form: {logic.to_text(f)}")


def _successors(state: frozenset) -> list[tuple[frozenset, frozenset, frozenset]]:
    todo = sorted(state, key=logic.to_text)
    raw = set()
    for lits, nxt, post in _expand(todo, frozenset(), frozenset(), frozenset(), frozenset()):
        flat = frozenset(c for g in nxt for c in _conjuncts(g))
        raw.add((frozenset(lits), flat, frozenset(post)))
    # drop transitions subsumed by a weaker-guarded, less-obligated one
    keep = []
    for t in raw:
        if not any(o != t and o[0] <= t[0] and o[1] <= t[1] and o[2] <= t[2] for o in raw):
            keep.append(t)
    return sorted(keep, key=lambda t: (sorted(t[0]), sorted(map(logic.to_text, t[1]))))


def _eventualities(f: Formula) -> list[Formula]:
    out = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, (Until, Eventually)):
            out.add(g)
        stack.extend(logic.children(g))
    return sorted(out, key=logic.to_text)


def translate(f: Formula) -> BuchiAutomaton:
    """Tableau translation of a rewritten task to a state-based Büchi automaton.

    Builds a transition-based generalized automaton (one acceptance set per
    eventuality) and degeneralizes it with a level counter.
    """
    if not logic.props_in(f):
        raise AutomatonError("formula has no atoms")
    if logic.is_team(f) and any(isinstance(g, (logic.Bound, Prop)) for g in _walk(f)):
        raise AutomatonError("translate expects a rewritten formula (see rewrite_bindings)")
    evs = _eventualities(f)
    k = len(evs)

    init = frozenset(_conjuncts(f))
    gen_index = {init: 0}
    order = [init]
    trans = {}
    queue = deque([init])
    while queue:
        s = queue.popleft()
        trans[s] = []
        for lits, nxt, post in _successors(s):
            if nxt not in gen_index:
                gen_index[nxt] = len(order)
                order.append(nxt)
                queue.append(nxt)
            acc = frozenset(i for i, u in enumerate(evs) if u not in post)
            trans[s].append((lits, nxt, acc))

    # degeneralize: level i means acceptance sets 0..i-1 already seen
    start = (init, 0)
    names = {start: "0"}
    queue = deque([start])
    edges = set()
    while queue:
        s, lvl = queue.popleft()
        base = 0 if lvl == k else lvl
        for lits, nxt, acc in trans[s]:
            j = base
            while j < k and j in acc:
                j += 1
            tgt = (nxt, j)
            if tgt not in names:
                names[tgt] = str(len(names))
                queue.append(tgt)
            label = label_from_atoms(lits)
            if label is not None:
                edges.add(Edge(names[(s, lvl)], label, names[tgt]))
    accepting = frozenset(n for (s, lvl), n in names.items() if lvl == k)
    states = tuple(sorted(names.values(), key=int))
    return _merge_loopless(BuchiAutomaton(states, "0", tuple(sorted(edges)), accepting))


def _merge_loopless(b: BuchiAutomaton) -> BuchiAutomaton:
    """Fold states without a self-loop into a bisimilar state that has one.

    Tableau initial nodes and counter copies often duplicate a looping state;
    merging them is language-preserving and lets robots wait there.
    """
    while True:
        out = {z: {(e.label, e.dst) for e in b.edges if e.src == z} for z in b.states}
        entered = {e.dst for e in b.edges}
        merge = None
        for z in b.missing_self_loops():
            for y in b.states:
                if y == z or not b.self_loops(y):
                    continue
                # acceptance only matters for states that can be revisited
                if z in entered and (y in b.accepting) != (z in b.accepting):
                    continue
                norm = lambda s: {(l, "*" if d in (y, z) else d) for l, d in s}
                if norm(out[z]) == norm(out[y]):
                    merge = (z, y)
                    break
            if merge:
                break
        if merge is None:
            return _renumber(b)
        z, y = merge
        edges = {Edge(y if e.src == z else e.src, e.label, y if e.dst == z else e.dst)
                 for e in b.edges}
        b = BuchiAutomaton(tuple(s for s in b.states if s != z), y if b.initial == z else b.initial,
                           tuple(sorted(edges)), b.accepting - {z})


def _renumber(b: BuchiAutomaton) -> BuchiAutomaton:
    """Rename states "0", "1", ... in breadth-first order from the initial state."""
    names = {b.initial: "0"}
    queue = deque([b.initial])
    while queue:
        z = queue.popleft()
        for e in b.out_edges(z):
            if e.dst not in names:
                names[e.dst] = str(len(names))
                queue.append(e.dst)
    edges = tuple(sorted(Edge(names[e.src], e.label, names[e.dst]) for e in b.edges
                         if e.src in names))
    return BuchiAutomaton(tuple(sorted(names.values(), key=int)), "0", edges,
                          frozenset(names[z] for z in b.accepting if z in names))


def _walk(f):
    yield f
    for c in logic.children(f):
        yield from _walk(c)


def split_dnf(guarded: Iterable[tuple[str, Formula, str]]) -> list[Edge]:
    """Replace Boolean-guarded edges by one edge per consistent DNF conjunct.

    Guards are formulas over ``Prop`` atoms named by the ``A_/E_`` convention,
    with ``Not``, ``And``, ``Or`` and ``Const``.
    """
    out = []
    for src, guard, dst in guarded:
        for conj in _dnf(guard):
            label = label_from_atoms(conj)
            if label is not None:
                out.append(Edge(src, label, dst))
    return sorted(set(out))


def _dnf(g: Formula, neg: bool = False) -> list[frozenset[AtomLit]]:
    if isinstance(g, Const):
        return [frozenset()] if g.value != neg else []
    if isinstance(g, Prop):
        return [frozenset([(g.name, not neg)])]
    if isinstance(g, Not):
        return _dnf(g.child, not neg)
    if isinstance(g, (And, Or)):
        conj = isinstance(g, And) != neg
        left, right = _dnf(g.left, neg), _dnf(g.right, neg)
        if conj:
            return [a | b for a in left for b in right]
        return left + right
    raise AutomatonError(f"unsupported guard node {type(g).__name__}")


# ---------------------------------------------------------------- acceptance

@dataclass(frozen=True)
class LassoWord:
    stem: tuple[frozenset[str], ...]
    loop: tuple[frozenset[str], ...]

    def __post_init__(self):
        if not self.loop:
            raise ValueError("lasso loop must be non-empty")
        object.__setattr__(self, "stem", tuple(frozenset(s) for s in self.stem))
        object.__setattr__(self, "loop", tuple(frozenset(s) for s in self.loop))

    @property
    def letters(self) -> tuple[frozenset[str], ...]:
        return self.stem + self.loop

    def successor(self, i: int) -> int:
        n = len(self.stem) + len(self.loop)
        return i + 1 if i + 1 < n else len(self.stem)


def accepts(b: BuchiAutomaton, w: LassoWord) -> bool:
    """True iff some run of ``b`` on stem.loop^w visits an accepting state infinitely often."""
    letters = w.letters
    n = len(letters)
    by_src = {}
    for e in b.edges:
        by_src.setdefault(e.src, []).append(e)

    def succ(node):
        z, i = node
        nxt = w.successor(i)
        return [(e.dst, nxt) for e in by_src.get(z, ())
                if label_holds_valuation(e.label, letters[i])]

    start = (b.initial, 0)
    seen = {start}
    queue = deque([start])
    while queue:
        for m in succ(queue.popleft()):
            if m not in seen:
                seen.add(m)
                queue.append(m)
    for node in sorted(seen):
        z, i = node
        if z in b.accepting and i >= len(w.stem) and _on_cycle(node, succ):
            return True
    del n
    return False


def _on_cycle(node, succ) -> bool:
    seen = set()
    queue = deque(succ(node))
    while queue:
        m = queue.popleft()
        if m == node:
            return True
        if m not in seen:
            seen.add(m)
            queue.extend(succ(m))
    return False


def word_vector(f: Formula, w: LassoWord) -> list[bool]:
    """Truth of a rewritten formula at every position of a lasso word."""
    letters = w.letters
    n = len(letters)
    if isinstance(f, Lit):
        name, pol = lit_to_atom(f)
        return [(name in v) == pol for v in letters]
    out = logic._temporal(f, n, w.successor, lambda g: word_vector(g, w))
    if out is None:
        raise AutomatonError(f"unsupported node in rewritten formula: {type(f).__name__}")
    return out


def evaluate_word(f: Formula, w: LassoWord) -> bool:
    return word_vector(f, w)[0]


def atoms_of(f: Formula) -> list[str]:
    """Atom names that a rewritten formula can observe."""
    out = set()
    for g in _walk(f):
        if isinstance(g, Lit):
            out.add(atom_name("A", g.prop, g.binding))
            out.add(atom_name("E", g.prop, g.binding))
    return sorted(out)


def consistent_valuations(atoms: Sequence[str]) -> list[frozenset[str]]:
    """All valuations of ``atoms`` respecting ``A_x -> E_x``."""
    import itertools
    vals = []
    for bits in itertools.product([False, True], repeat=len(atoms)):
        v = frozenset(a for a, bit in zip(atoms, bits) if bit)
        if all(not (a.startswith("A_") and a in v and ("E" + a[1:]) in atoms
                    and ("E" + a[1:]) not in v) for a in atoms):
            vals.append(v)
    return vals

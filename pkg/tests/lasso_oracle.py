"""Exhaustive lasso-word agreement check between a translated automaton and the semantics.

Enumerating every stem/loop pair directly is too slow for 27-letter alphabets, so
stems are folded backwards: a position's subformula values follow from its letter
and the values one step later, and the set of automaton states that accept the
suffix follows from the letter and the set one step later. Loops are checked with
the library evaluators; stems reuse their signatures.
"""
from __future__ import annotations

import itertools
from dataclasses import replace

from teamsynth import logic
from teamsynth.automata import (LassoWord, accepts, atoms_of, consistent_valuations,
                                label_holds_valuation, lit_to_atom, translate, word_vector)


def subformulas(f) -> list:
    out = []

    def walk(g):
        for c in logic.children(g):
            walk(c)
        if g not in out:
            out.append(g)
    walk(f)
    return out


def step_back(subs, index, letter, nxt):
    """Subformula values at a stem position from its letter and the next position."""
    val = [False] * len(subs)
    for k, g in enumerate(subs):
        if isinstance(g, logic.Lit):
            name, pol = lit_to_atom(g)
            val[k] = (name in letter) == pol
        elif isinstance(g, logic.Const):
            val[k] = g.value
        elif isinstance(g, logic.And):
            val[k] = val[index[g.left]] and val[index[g.right]]
        elif isinstance(g, logic.Or):
            val[k] = val[index[g.left]] or val[index[g.right]]
        elif isinstance(g, logic.Until):
            val[k] = val[index[g.right]] or (val[index[g.left]] and nxt[k])
        elif isinstance(g, logic.Release):
            val[k] = val[index[g.right]] and (val[index[g.left]] or nxt[k])
        elif isinstance(g, logic.Eventually):
            val[k] = val[index[g.child]] or nxt[k]
        elif isinstance(g, logic.Always):
            val[k] = val[index[g.child]] and nxt[k]
        else:
            raise TypeError(type(g).__name__)
    return tuple(val)


def loop_signature(f, b, subs, loop):
    w = LassoWord((), loop)
    vec = tuple(word_vector(g, w)[0] for g in subs)
    good = frozenset(q for q in b.states if accepts(replace(b, initial=q), w))
    return vec, good


class Oracle:
    def __init__(self, text: str):
        self.formula = logic.rewrite_bindings(logic.parse_task(text))
        self.automaton = translate(self.formula)
        self.subs = subformulas(self.formula)
        self.index = {g: k for k, g in enumerate(self.subs)}
        self.root = self.index[self.formula]
        self.letters = consistent_valuations(atoms_of(self.formula))
        self.by_src: dict = {}
        for e in self.automaton.edges:
            self.by_src.setdefault(e.src, []).append(e)

    def loop(self, loop):
        return loop_signature(self.formula, self.automaton, self.subs, loop)

    def back(self, sig, letter):
        vec, good = sig
        v = step_back(self.subs, self.index, letter, vec)
        g = frozenset(q for q in self.automaton.states for e in self.by_src.get(q, ())
                      if e.dst in good and label_holds_valuation(e.label, letter))
        return v, g

    def fold(self, w: LassoWord) -> tuple[bool, bool]:
        """(semantic value, automaton acceptance) of a word via the backward fold."""
        sig = self.loop(w.loop)
        for a in reversed(w.stem):
            sig = self.back(sig, a)
        return sig[0][self.root], self.automaton.initial in sig[1]


def check_formula(text: str, max_stem: int = 4, max_loop: int = 3) -> tuple[int, list]:
    """Return (words covered, mismatching witness words) within the bounds."""
    o = Oracle(text)
    level: dict = {}
    for k in range(1, max_loop + 1):
        for loop in itertools.product(o.letters, repeat=k):
            level.setdefault(o.loop(loop), ((), loop))
    mismatches = []
    for depth in range(max_stem + 1):
        for (vec, good), (stem, loop) in level.items():
            if vec[o.root] != (o.automaton.initial in good):
                mismatches.append(LassoWord(stem, loop))
        if depth == max_stem:
            break
        nxt: dict = {}
        for sig, (stem, loop) in level.items():
            for a in o.letters:
                nxt.setdefault(o.back(sig, a), ((a,) + stem, loop))
        level = nxt
    n = len(o.letters)
    words = sum(n ** s for s in range(max_stem + 1)) * sum(n ** k for k in range(1, max_loop + 1))
    return words, mismatches


# Thirty formulas over at most three (proposition, binding) atoms.
CORPUS = (
    "a^1",
    "!a^1",
    "F a^1",
    "G a^1",
    "G F a^1",
    "F G a^1",
    "a^1 U b^1",
    "!(!a^1 U !b^1)",
    "!(a^1 U b^1)",
    "G(a^1 -> F b^1)",
    "F a^1 & F b^1",
    "G F a^1 & G F !a^1",
    "!a^1 U (b^1 & !c^1)",
    "(a^1 | b^2) U G c^1",
    "!(F a^1)",
    "G(a^1 -> (b^1 U c^1))",
    "F(a^1 & F(b^1 & F c^1))",
    "a^(1&2)",
    "a^(1|2)",
    "!a^(1&2)",
    "F a^(1&2) & G !b^1",
    "(a & b)^1 U c^2",
    "G(!(!a^1) -> b^2)",
    "F(a^1) & G(!(!a^1) -> b^(2&3))",
    "!(G F a^1)",
    "G(a^1 | b^1) & F !a^1",
    "(F a)^1",
    "(G !a)^(1|2)",
    "!(a U b)^1 & F b^2",
    "!(!a^1 U !b^2) | G c^1",
)


# ---------------------------------------------------------------- automaton inclusion

def accepting_from(b, loop) -> frozenset:
    w = LassoWord((), loop)
    return frozenset(q for q in b.states if accepts(replace(b, initial=q), w))


def predecessors(b, good, letter) -> frozenset:
    return frozenset(e.src for e in b.edges
                     if e.dst in good and label_holds_valuation(e.label, letter))


def letter_classes(automata, atoms) -> list[frozenset[str]]:
    """One representative valuation per class of letters enabling the same labels."""
    labels = sorted({e.label for b in automata for e in b.edges}, key=lambda l: l.sort_key())
    reps = {}
    for v in consistent_valuations(sorted(atoms)):
        reps.setdefault(tuple(label_holds_valuation(l, v) for l in labels), v)
    return list(reps.values())


def bounded_inclusion(small, big, letters, max_stem: int = 5, max_loop: int = 3) -> list:
    """Lasso words within the bounds accepted by ``small`` but not by ``big``."""
    level: dict = {}
    for k in range(1, max_loop + 1):
        for loop in itertools.product(letters, repeat=k):
            level.setdefault((accepting_from(small, loop), accepting_from(big, loop)), ((), loop))
    bad = []
    for depth in range(max_stem + 1):
        for (a, b), (stem, loop) in level.items():
            if small.initial in a and big.initial not in b:
                bad.append(LassoWord(stem, loop))
        if depth == max_stem:
            break
        nxt: dict = {}
        for (a, b), (stem, loop) in level.items():
            for v in letters:
                nxt.setdefault((predecessors(small, a, v), predecessors(big, b, v)), ((v,) + stem, loop))
        level = nxt
    return bad

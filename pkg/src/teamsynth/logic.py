"""Task language: binding-annotated temporal formulas.

A task mixes two layers.  Per-robot temporal formulas over action
propositions (``Prop``, ``Not``, ``And`` ...) are lifted to team level by a
binding annotation (``Bound``).  Everything above a ``Bound`` is a team
formula; ``Not`` applied to a team formula is the "at least one robot"
negation, not plain Boolean complement.

After :func:`rewrite_bindings` every leaf is a :class:`Lit`, a single action
proposition with one binding and one of four quantified polarities.
"""
from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

FORALL = "A"
EXISTS = "E"


class TaskSyntaxError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{msg} (line {line}, column {col})")
        self.line = line
        self.col = col


class SemanticsError(ValueError):
    pass


# ---------------------------------------------------------------- bindings

@dataclass(frozen=True)
class BVar:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class BAnd:
    left: "BindingFormula"
    right: "BindingFormula"

    def __str__(self):
        return f"({self.left}&{self.right})"


@dataclass(frozen=True)
class BOr:
    left: "BindingFormula"
    right: "BindingFormula"

    def __str__(self):
        return f"({self.left}|{self.right})"


BindingFormula = BVar | BAnd | BOr


def binding_names(psi: BindingFormula) -> frozenset[str]:
    if isinstance(psi, BVar):
        return frozenset([psi.name])
    return binding_names(psi.left) | binding_names(psi.right)


def binding_holds(psi: BindingFormula, true_set: Iterable[str]) -> bool:
    true_set = set(true_set)
    if isinstance(psi, BVar):
        return psi.name in true_set
    if isinstance(psi, BAnd):
        return binding_holds(psi.left, true_set) and binding_holds(psi.right, true_set)
    return binding_holds(psi.left, true_set) or binding_holds(psi.right, true_set)


def minimal_models(psi: BindingFormula) -> list[frozenset[str]]:
    """Minimal satisfying binding sets of a negation-free binding formula."""
    def dnf(node):
        if isinstance(node, BVar):
            return {frozenset([node.name])}
        if isinstance(node, BOr):
            return dnf(node.left) | dnf(node.right)
        return {a | b for a in dnf(node.left) for b in dnf(node.right)}

    clauses = dnf(psi)
    minimal = [c for c in clauses if not any(o < c for o in clauses)]
    return sorted(minimal, key=lambda s: (len(s), sorted(s)))


def zeta(psi: BindingFormula, universe: Iterable[str] | None = None) -> set[frozenset[str]]:
    """All binding sets the team may cover to satisfy ``psi``.

    These are the unions of one or more minimal models, so
    ``zeta((1&2)|3) == {{1,2}, {3}, {1,2,3}}``.
    """
    names = binding_names(psi)
    if universe is not None and not names <= set(universe):
        raise SemanticsError(f"bindings {sorted(names - set(universe))} not in universe")
    mins = minimal_models(psi)
    out = set()
    for k in range(1, len(mins) + 1):
        for combo in itertools.combinations(mins, k):
            out.add(frozenset().union(*combo))
    return out


# ---------------------------------------------------------------- formulas

@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Prop:
    name: str


@dataclass(frozen=True)
class Not:
    child: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Until:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Release:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Always:
    child: "Formula"


@dataclass(frozen=True)
class Eventually:
    child: "Formula"


@dataclass(frozen=True)
class Bound:
    body: "Formula"
    binding: BindingFormula


@dataclass(frozen=True)
class Lit:
    """``prop`` under one binding.

    ``quant=A, positive=True``   all holders of the binding have prop
    ``quant=A, positive=False``  no holder has prop
    ``quant=E, positive=True``   some holder has prop
    ``quant=E, positive=False``  some holder lacks prop
    """
    prop: str
    binding: str
    quant: str = FORALL
    positive: bool = True

    def dual(self) -> "Lit":
        q = EXISTS if self.quant == FORALL else FORALL
        return Lit(self.prop, self.binding, q, not self.positive)

    def __str__(self):
        sign = "" if self.positive else "!"
        return f"{self.quant}:{sign}{self.prop}^{self.binding}"


Formula = Const | Prop | Not | And | Or | Until | Release | Always | Eventually | Bound | Lit

_BINARY = (And, Or, Until, Release)
_UNARY = (Not, Always, Eventually)


def children(f: Formula) -> tuple:
    if isinstance(f, _BINARY):
        return (f.left, f.right)
    if isinstance(f, _UNARY):
        return (f.child,)
    if isinstance(f, Bound):
        return (f.body,)
    return ()


def is_team(f: Formula) -> bool:
    """True if ``f`` contains a binding annotation (team-level formula)."""
    if isinstance(f, (Bound, Lit)):
        return True
    return any(is_team(c) for c in children(f))


def bindings_in(f: Formula) -> frozenset[str]:
    if isinstance(f, Lit):
        return frozenset([f.binding])
    if isinstance(f, Bound):
        return binding_names(f.binding)
    out = frozenset()
    for c in children(f):
        out |= bindings_in(c)
    return out


def props_in(f: Formula) -> frozenset[str]:
    if isinstance(f, (Prop, Lit)):
        return frozenset([f.prop if isinstance(f, Lit) else f.name])
    out = frozenset()
    for c in children(f):
        out |= props_in(c)
    return out


def conj(items: Sequence[Formula]) -> Formula:
    items = [i for i in items if i != Const(True)]
    if any(i == Const(False) for i in items):
        return Const(False)
    if not items:
        return Const(True)
    out = items[0]
    for i in items[1:]:
        out = And(out, i)
    return out


def disj(items: Sequence[Formula]) -> Formula:
    items = [i for i in items if i != Const(False)]
    if any(i == Const(True) for i in items):
        return Const(True)
    if not items:
        return Const(False)
    out = items[0]
    for i in items[1:]:
        out = Or(out, i)
    return out


def to_text(f: Formula) -> str:
    """Render in the concrete syntax accepted by :func:`parse_task`."""
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Prop):
        return f.name
    if isinstance(f, Lit):
        return str(f)
    if isinstance(f, Not):
        return f"!{_wrap(f.child)}"
    if isinstance(f, Always):
        return f"G{_wrap(f.child)}"
    if isinstance(f, Eventually):
        return f"F{_wrap(f.child)}"
    if isinstance(f, Bound):
        b = f.binding.name if isinstance(f.binding, BVar) else str(f.binding)
        return f"{_wrap(f.body)}^{b}"
    op = {And: "&", Or: "|", Until: "U", Release: "R"}[type(f)]
    return f"({to_text(f.left)} {op} {to_text(f.right)})"


def _wrap(f):
    s = to_text(f)
    return s if isinstance(f, (Prop, Const, _BINARY)) else f"({s})"


def to_dict(f: Formula) -> dict:
    """Structured AST dump, for debugging and the ``parse`` command."""
    if isinstance(f, Const):
        return {"kind": "const", "value": f.value}
    if isinstance(f, Prop):
        return {"kind": "prop", "name": f.name}
    if isinstance(f, Lit):
        return {"kind": "atom", "prop": f.prop, "binding": f.binding,
                "quantifier": "forall" if f.quant == FORALL else "exists",
                "polarity": f.positive}
    if isinstance(f, Bound):
        return {"kind": "bound", "binding": str(f.binding), "body": to_dict(f.body)}
    kind = type(f).__name__.lower()
    if isinstance(f, Not) and is_team(f.child):
        kind = "team_not"
    return {"kind": kind, "children": [to_dict(c) for c in children(f)]}


# ---------------------------------------------------------------- parser

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<arrow>->)
  | (?P<op>[!&|()^])
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*|[0-9]+)
""", re.VERBOSE)

_TEMPORAL = {"F", "G", "U"}
_NEXT = {"X", "next"}


def _tokenize(text: str) -> list[tuple[str, str, int, int]]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise TaskSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        val = m.group()
        if kind != "ws":
            toks.append((kind, val, line, col))
        nl = val.count("\n")
        if nl:
            line += nl
            line_start = m.start() + val.rindex("\n") + 1
        pos = m.end()
    toks.append(("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, val):
        t = self.take()
        if t[1] != val:
            self.fail(f"expected {val!r}, found {t[1] or 'end of input'!r}", t)
        return t

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise TaskSyntaxError(msg, tok[2], tok[3])

    def parse(self) -> Formula:
        if self.peek()[0] == "eof":
            self.fail("empty task")
        f = self.implication()
        if self.peek()[0] != "eof":
            self.fail(f"unexpected {self.peek()[1]!r}")
        if not is_team(f):
            self.fail("task has no binding annotation", self.toks[0])
        return f

    def implication(self):
        left = self.disjunction()
        tok = self.peek()
        if tok[1] == "->":
            self.take()
            right = self.implication()
            return _combine(Or, Not(left), right, tok)
        return left

    def disjunction(self):
        left = self.conjunction()
        while self.peek()[1] == "|":
            tok = self.take()
            left = _combine(Or, left, self.conjunction(), tok)
        return left

    def conjunction(self):
        left = self.until()
        while self.peek()[1] == "&":
            tok = self.take()
            left = _combine(And, left, self.until(), tok)
        return left

    def until(self):
        left = self.bound()
        tok = self.peek()
        if tok[1] == "U":
            self.take()
            return _combine(Until, left, self.until(), tok)
        return left

    def bound(self):
        start = self.peek()
        f = self.unary()
        if self.peek()[1] == "^":
            tok = self.take()
            if is_team(f):
                self.fail("binding applied to an already bound formula", tok)
            f = Bound(f, self.binding_atom())
            if self.peek()[1] == "^":
                self.fail("binding applied to an already bound formula")
        del start
        return f

    def unary(self):
        tok = self.peek()
        if tok[1] == "!":
            self.take()
            return Not(self.unary())
        if tok[1] == "F":
            self.take()
            return Eventually(self.unary())
        if tok[1] == "G":
            self.take()
            return Always(self.unary())
        return self.primary()

    def primary(self):
        tok = self.take()
        kind, val = tok[0], tok[1]
        if val == "(":
            f = self.implication()
            self.expect(")")
            return f
        if kind == "name":
            if val in _NEXT:
                self.fail("the next operator is not part of the task language", tok)
            if val in _TEMPORAL:
                self.fail(f"operator {val!r} used as a proposition", tok)
            if val == "true":
                return Const(True)
            if val == "false":
                return Const(False)
            if val[0].isdigit():
                self.fail(f"proposition expected, found number {val!r}", tok)
            return Prop(val)
        self.fail(f"unexpected {val or 'end of input'!r}", tok)

    # binding formulas
    def binding_atom(self) -> BindingFormula:
        tok = self.take()
        if tok[1] == "(":
            b = self.binding_or()
            self.expect(")")
            return b
        if tok[1] == "!":
            self.fail("negation is not allowed inside a binding formula", tok)
        if tok[0] == "name":
            return BVar(tok[1])
        self.fail("binding expected after '^'", tok)

    def binding_or(self):
        left = self.binding_and()
        while self.peek()[1] == "|":
            self.take()
            left = BOr(left, self.binding_and())
        return left

    def binding_and(self):
        left = self.binding_atom()
        while self.peek()[1] == "&":
            self.take()
            left = BAnd(left, self.binding_atom())
        return left


def _combine(cls, left, right, tok):
    tl, tr = is_team(left), is_team(right)
    consts = isinstance(left, Const) or isinstance(right, Const)
    if tl != tr and not consts:
        raise TaskSyntaxError("operand without a binding mixed with a bound formula",
                              tok[2], tok[3])
    return cls(left, right)


def parse_task(text: str) -> Formula:
    """Parse a task in the ASCII concrete syntax.

    >>> parse_task("pi^1")
    Bound(body=Prop(name='pi'), binding=BVar(name='1'))
    """
    return _Parser(text).parse()


def load_task(path) -> Formula:
    with open(path, encoding="utf-8") as fh:
        return parse_task(fh.read())


def dump_json(f: Formula) -> str:
    return json.dumps(to_dict(f), indent=2)


# ---------------------------------------------------------------- rewriting

def rewrite_bindings(f: Formula) -> Formula:
    """Push every binding down to single propositions, in negation normal form.

    ``Bound(phi, psi)`` becomes a disjunction over the minimal models ``K`` of
    ``psi`` of the conjunction over ``rho in K`` of ``phi`` with ``rho``
    attached to each proposition.  A team negation of a bound formula becomes
    the disjunction of the same with exists-quantified literals of ``!phi``.

    Exact when every bound body is a conjunction of literals; for bound
    disjunctions or temporal bodies this is the usual per-proposition
    approximation (robots are forced onto a common step).
    """
    if not is_team(f):
        raise SemanticsError("formula has no binding annotation")
    return _simplify(_rw(f, False))


def _rw(f: Formula, neg: bool) -> Formula:
    if isinstance(f, Const):
        return Const(f.value != neg)
    if isinstance(f, Lit):
        return f.dual() if neg else f
    if isinstance(f, Bound):
        models = minimal_models(f.binding)
        if not neg:
            return disj([conj([_push(f.body, rho, FORALL, False) for rho in sorted(k)])
                         for k in models])
        return disj([disj([_push(f.body, rho, EXISTS, True) for rho in sorted(k)])
                     for k in models])
    if not is_team(f):
        raise SemanticsError(f"unbound subformula {to_text(f)!r} at team level")
    if isinstance(f, Not):
        return _rw(f.child, not neg)
    if isinstance(f, And):
        return (Or if neg else And)(_rw(f.left, neg), _rw(f.right, neg))
    if isinstance(f, Or):
        return (And if neg else Or)(_rw(f.left, neg), _rw(f.right, neg))
    if isinstance(f, Until):
        return (Release if neg else Until)(_rw(f.left, neg), _rw(f.right, neg))
    if isinstance(f, Release):
        return (Until if neg else Release)(_rw(f.left, neg), _rw(f.right, neg))
    if isinstance(f, Always):
        return (Eventually if neg else Always)(_rw(f.child, neg))
    if isinstance(f, Eventually):
        return (Always if neg else Eventually)(_rw(f.child, neg))
    raise TypeError(f)


def _push(f: Formula, rho: str, quant: str, neg: bool) -> Formula:
    """Attach ``rho`` to the propositions of a robot-level formula (NNF)."""
    if isinstance(f, Const):
        return Const(f.value != neg)
    if isinstance(f, Prop):
        return Lit(f.name, rho, quant, not neg)
    if isinstance(f, Not):
        return _push(f.child, rho, quant, not neg)
    if isinstance(f, And):
        return (Or if neg else And)(_push(f.left, rho, quant, neg), _push(f.right, rho, quant, neg))
    if isinstance(f, Or):
        return (And if neg else Or)(_push(f.left, rho, quant, neg), _push(f.right, rho, quant, neg))
    if isinstance(f, Until):
        return (Release if neg else Until)(_push(f.left, rho, quant, neg),
                                           _push(f.right, rho, quant, neg))
    if isinstance(f, Release):
        return (Until if neg else Release)(_push(f.left, rho, quant, neg),
                                           _push(f.right, rho, quant, neg))
    if isinstance(f, Always):
        return (Eventually if neg else Always)(_push(f.child, rho, quant, neg))
    if isinstance(f, Eventually):
        return (Always if neg else Eventually)(_push(f.child, rho, quant, neg))
    raise SemanticsError("nested binding")


def _simplify(f: Formula) -> Formula:
    if isinstance(f, (And, Or)):
        parts = []
        for c in _flatten(f, type(f)):
            c = _simplify(c)
            for p in _flatten(c, type(f)):
                if p not in parts:
                    parts.append(p)
        return conj(parts) if isinstance(f, And) else disj(parts)
    if isinstance(f, (Until, Release)):
        return type(f)(_simplify(f.left), _simplify(f.right))
    if isinstance(f, (Always, Eventually)):
        return type(f)(_simplify(f.child))
    return f


def _flatten(f, cls):
    if isinstance(f, cls):
        return _flatten(f.left, cls) + _flatten(f.right, cls)
    return [f]


# ---------------------------------------------------------------- semantics

@dataclass(frozen=True)
class TeamTrace:
    """Ultimately periodic team trace.

    ``steps[j][i]`` is the set of propositions true for robot ``j`` at
    position ``i``; after the last position the trace returns to
    ``loop_start``.
    """
    steps: Mapping[str, Sequence[frozenset[str]]]
    loop_start: int = 0

    def __post_init__(self):
        lengths = {len(s) for s in self.steps.values()}
        if len(lengths) != 1:
            raise ValueError("robot traces must have equal length")
        (n,) = lengths
        if not 0 <= self.loop_start < n:
            raise ValueError("loop_start must index into the trace")

    @property
    def length(self) -> int:
        return len(next(iter(self.steps.values())))

    def successor(self, i: int) -> int:
        return i + 1 if i + 1 < self.length else self.loop_start


def _until(n, succ, left, right):
    out = list(right)
    changed = True
    while changed:
        changed = False
        for i in range(n):
            if not out[i] and left[i] and out[succ(i)]:
                out[i] = changed = True
    return out


def _release(n, succ, left, right):
    # greatest fixpoint of right & (left | X out)
    out = list(right)
    changed = True
    while changed:
        changed = False
        for i in range(n):
            if out[i] and not left[i] and not out[succ(i)]:
                out[i] = False
                changed = True
    return out


def _temporal(f, n, succ, ev):
    if isinstance(f, Const):
        return [f.value] * n
    if isinstance(f, And):
        a, b = ev(f.left), ev(f.right)
        return [x and y for x, y in zip(a, b)]
    if isinstance(f, Or):
        a, b = ev(f.left), ev(f.right)
        return [x or y for x, y in zip(a, b)]
    if isinstance(f, Until):
        return _until(n, succ, ev(f.left), ev(f.right))
    if isinstance(f, Release):
        return _release(n, succ, ev(f.left), ev(f.right))
    if isinstance(f, Eventually):
        return _until(n, succ, [True] * n, ev(f.child))
    if isinstance(f, Always):
        return _release(n, succ, [False] * n, ev(f.child))
    return None


def robot_vector(f: Formula, steps: Sequence[frozenset[str]], succ) -> list[bool]:
    """Truth of a robot-level formula at every position of one robot's trace."""
    n = len(steps)
    if isinstance(f, Prop):
        return [f.name in s for s in steps]
    if isinstance(f, Not):
        return [not x for x in robot_vector(f.child, steps, succ)]
    out = _temporal(f, n, succ, lambda g: robot_vector(g, steps, succ))
    if out is None:
        raise SemanticsError("binding inside a robot-level formula")
    return out


def holders(rho: str, R: Mapping[str, Iterable[str]]) -> list[str]:
    return sorted(j for j, r in R.items() if rho in r)


def lit_holds(lit: Lit, snapshot: Mapping[str, Iterable[str]], R: Mapping[str, Iterable[str]]) -> bool:
    """Truth of a quantified literal for one team snapshot."""
    hs = holders(lit.binding, R)
    if not hs:
        return False
    vals = [(lit.prop in snapshot[j]) == lit.positive for j in hs]
    return all(vals) if lit.quant == FORALL else any(vals)


def team_vector(f: Formula, trace: TeamTrace, R: Mapping[str, Iterable[str]],
                universe: Iterable[str] | None = None) -> list[bool]:
    n, succ = trace.length, trace.successor
    R = {j: frozenset(R.get(j, ())) for j in trace.steps}
    covered = frozenset().union(*R.values()) if R else frozenset()
    if universe is None:
        universe = bindings_in(f) | covered

    def ev(g):
        return team_vector(g, trace, R, universe)

    if isinstance(f, Lit):
        if f.binding not in universe:
            raise SemanticsError(f"binding {f.binding!r} not in the binding universe")
        return [lit_holds(f, {j: trace.steps[j][i] for j in R}, R) for i in range(n)]
    if isinstance(f, Bound) or (isinstance(f, Not) and isinstance(f.child, Bound)):
        negated = isinstance(f, Not)
        b = f.child if negated else f
        out = [False] * n
        for K in zeta(b.binding, universe):
            if not K <= covered:
                continue
            robots = [j for j in sorted(R) if K & R[j]]
            vecs = [robot_vector(b.body, trace.steps[j], succ) for j in robots]
            for i in range(n):
                if negated:
                    ok = any(not v[i] for v in vecs)
                else:
                    ok = all(v[i] for v in vecs)
                out[i] = out[i] or ok
        return out
    if isinstance(f, Not):
        # team negation of a composite formula: push to the leaves
        return ev(_rw_dual(f.child))
    if not is_team(f) and not isinstance(f, Const):
        raise SemanticsError(f"unbound subformula {to_text(f)!r} at team level")
    out = _temporal(f, n, succ, ev)
    if out is None:
        raise TypeError(f)
    return out


def _rw_dual(f: Formula) -> Formula:
    if isinstance(f, Const):
        return Const(not f.value)
    if isinstance(f, Lit):
        return f.dual()
    if isinstance(f, Bound):
        return Not(f)
    if isinstance(f, Not):
        return f.child
    if isinstance(f, And):
        return Or(Not(f.left), Not(f.right))
    if isinstance(f, Or):
        return And(Not(f.left), Not(f.right))
    if isinstance(f, Until):
        return Release(Not(f.left), Not(f.right))
    if isinstance(f, Release):
        return Until(Not(f.left), Not(f.right))
    if isinstance(f, Always):
        return Eventually(Not(f.child))
    if isinstance(f, Eventually):
        return Always(Not(f.child))
    raise TypeError(f)


def evaluate(f: Formula, trace: TeamTrace, R: Mapping[str, Iterable[str]],
             universe: Iterable[str] | None = None) -> bool:
    """Reference semantics of a task on a lasso team trace, at position 0."""
    return team_vector(f, trace, R, universe)[0]

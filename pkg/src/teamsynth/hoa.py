"""HOA v1 import/export and DOT rendering for state-based Büchi automata.

Atom names follow ``A_<prop>_r<binding>`` (for all holders) and
``E_<prop>_r<binding>`` (some holder). Intermediate states are listed in an
``intermediate:`` extension header.
"""
from __future__ import annotations

import re

from .automata import AutomatonError, BuchiAutomaton, Edge, split_dnf
from .logic import And, Const, Not, Or, Prop


class HoaError(AutomatonError):
    pass


def export_hoa(b: BuchiAutomaton, name: str = "") -> str:
    index = {z: i for i, z in enumerate(b.states)}
    aps = sorted({a for e in b.edges for a, _ in e.label.atom_lits()})
    ap_index = {a: i for i, a in enumerate(aps)}
    lines = ["HOA: v1"]
    if name:
        lines.append(f'name: "{name}"')
    lines += [f"States: {len(b.states)}", f"Start: {index[b.initial]}",
              f"AP: {len(aps)}" + "".join(f' "{a}"' for a in aps),
              "acc-name: Buchi", "Acceptance: 1 Inf(0)",
              "properties: trans-labels explicit-labels state-acc"]
    if b.intermediate:
        lines.append("intermediate: " + " ".join(str(index[z]) for z in sorted(b.intermediate)))
    lines.append("--BODY--")
    for z in b.states:
        acc = " {0}" if z in b.accepting else ""
        lines.append(f'State: {index[z]} "{z}"{acc}')
        for e in b.out_edges(z):
            lits = sorted(e.label.atom_lits())
            guard = "&".join(("" if pol else "!") + str(ap_index[a]) for a, pol in lits) or "t"
            lines.append(f"[{guard}] {index[e.dst]}")
    lines.append("--END--")
    return "\n".join(lines) + "\n"


_TOKEN = re.compile(r'\s*(?:(".*?")|(\d+)|([!&|()\[\]{}])|(\S+))')


class _Guard:
    def __init__(self, text: str, aps: list[str]):
        self.toks = re.findall(r"\d+|[!&|()]|t|f", text)
        if "".join(self.toks) != re.sub(r"\s+", "", text):
            raise HoaError(f"malformed label expression [{text}]")
        self.aps = aps
        self.i = 0

    def parse(self):
        out = self.disj()
        if self.i != len(self.toks):
            raise HoaError("trailing tokens in label expression")
        return out

    def _peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def disj(self):
        out = self.conj()
        while self._peek() == "|":
            self.i += 1
            out = Or(out, self.conj())
        return out

    def conj(self):
        out = self.unary()
        while self._peek() == "&":
            self.i += 1
            out = And(out, self.unary())
        return out

    def unary(self):
        tok = self._peek()
        if tok is None:
            raise HoaError("label expression ends early")
        self.i += 1
        if tok == "!":
            return Not(self.unary())
        if tok == "(":
            out = self.disj()
            if self._peek() != ")":
                raise HoaError("unbalanced parenthesis in label expression")
            self.i += 1
            return out
        if tok in ("t", "f"):
            return Const(tok == "t")
        if tok.isdigit():
            k = int(tok)
            if k >= len(self.aps):
                raise HoaError(f"atomic proposition index {k} out of range")
            return Prop(self.aps[k])
        raise HoaError(f"unexpected token {tok!r} in label expression")


def import_hoa(text: str) -> BuchiAutomaton:
    """Parse a state-based Büchi automaton with explicit labels."""
    if "--BODY--" not in text or "--END--" not in text:
        raise HoaError("missing --BODY-- or --END--")
    head, body = text.split("--BODY--", 1)
    body = body.split("--END--", 1)[0]
    header: dict[str, str] = {}
    for raw in head.splitlines():
        raw = raw.strip()
        if not raw:
            continue
        if ":" not in raw:
            raise HoaError(f"malformed header line {raw!r}")
        key, val = raw.split(":", 1)
        header.setdefault(key.strip(), val.strip())
    if header.get("HOA") != "v1":
        raise HoaError("header must start with 'HOA: v1'")
    acc = re.sub(r"\s+", " ", header.get("Acceptance", ""))
    if acc not in ("1 Inf(0)", "0 t"):
        raise HoaError(f"unsupported acceptance condition {acc!r}; only state-based Büchi")
    all_accepting = acc == "0 t"
    ap_field = header.get("AP", "0")
    count, *_ = ap_field.split(None, 1)
    aps = re.findall(r'"([^"]*)"', ap_field)
    if int(count) != len(aps):
        raise HoaError("AP count does not match the listed names")
    try:
        n = int(header["States"])
        start = int(header["Start"])
    except (KeyError, ValueError) as exc:
        raise HoaError("States and Start headers are required") from exc

    names: dict[int, str] = {}
    accepting: set[int] = set()
    guarded = []
    cur = None
    for raw in body.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("State:"):
            m = re.match(r'State:\s*(\d+)\s*(?:"([^"]*)")?\s*(\{[\d\s]*\})?\s*$', line)
            if not m:
                raise HoaError(f"malformed state line {line!r}")
            cur = int(m.group(1))
            names[cur] = m.group(2) if m.group(2) is not None else str(cur)
            if m.group(3) and "0" in m.group(3).strip("{}").split():
                accepting.add(cur)
            continue
        m = re.match(r"\[(.*)\]\s*(\d+)\s*(\{.*\})?\s*$", line)
        if not m or cur is None:
            raise HoaError(f"unsupported edge line {line!r} (explicit labels required)")
        if m.group(3):
            raise HoaError("transition-based acceptance marks are not supported")
        guarded.append((cur, _Guard(m.group(1), aps).parse(), int(m.group(2))))
    for i in range(n):
        names.setdefault(i, str(i))
    if set(names) != set(range(n)):
        raise HoaError("state indices out of range")
    edges = split_dnf((names[s], g, names[d]) for s, g, d in guarded)
    inter = frozenset(names[int(k)] for k in header.get("intermediate", "").split())
    acc_names = frozenset(names.values()) if all_accepting else frozenset(names[i] for i in accepting)
    return BuchiAutomaton(tuple(names[i] for i in range(n)), names[start], tuple(edges),
                          acc_names, inter)


def export_dot(b: BuchiAutomaton, name: str = "buchi") -> str:
    lines = [f'digraph "{name}" {{', "  rankdir=LR;", '  init [shape=point, label=""];']
    for z in b.states:
        shape = "doublecircle" if z in b.accepting else "circle"
        style = ', style=filled, fillcolor="pink"' if z in b.intermediate \
            else ', style=filled, fillcolor="lightblue"'
        lines.append(f'  "{z}" [shape={shape}{style}];')
    lines.append(f'  init -> "{b.initial}";')
    for e in sorted(b.edges):
        lines.append(f'  "{e.src}" -> "{e.dst}" [label="{e.label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def dot_structure(text: str) -> tuple[set[str], set[tuple[str, str, str]], set[str], set[str]]:
    """Recover (states, edges, accepting, intermediate) from :func:`export_dot` output."""
    states, edges, acc, inter = set(), set(), set(), set()
    for line in text.splitlines():
        m = re.match(r'\s*"([^"]+)" \[shape=(\w+), style=filled, fillcolor="(\w+)"\];', line)
        if m:
            states.add(m.group(1))
            if m.group(2) == "doublecircle":
                acc.add(m.group(1))
            if m.group(3) == "pink":
                inter.add(m.group(1))
            continue
        m = re.match(r'\s*"([^"]+)" -> "([^"]+)" \[label="(.*)"\];', line)
        if m:
            edges.add(m.groups())
    return states, edges, acc, inter

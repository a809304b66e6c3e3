"""Binding machinery: label bindings, capability views, valid bindings, Π-sets."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable

from .automata import Pair, QuadLabel
from .models import ActionCatalog, RobotModel, State

BindingSet = frozenset[str]


def bindings_of_label(sigma: QuadLabel) -> frozenset[str]:
    return frozenset(r for _, r in sigma.pairs())


def bindings_of_set(pairs: Iterable[Pair]) -> frozenset[str]:
    return frozenset(r for _, r in pairs)


@dataclass(frozen=True)
class CapabilityView:
    C_T: frozenset[str] = frozenset()
    C_exT: frozenset[str] = frozenset()
    C_F: frozenset[str] = frozenset()
    C_exF: frozenset[str] = frozenset()

    def parts(self):
        return (self.C_T, self.C_exT, self.C_F, self.C_exF)

    @property
    def required(self) -> frozenset[str]:
        return self.C_T | self.C_exT

    @property
    def forbidden(self) -> frozenset[str]:
        return self.C_F | self.C_exF


def capability_view(sigma: QuadLabel, rho: str) -> CapabilityView:
    """Propositions that ``sigma`` constrains for holders of ``rho``."""
    return CapabilityView(*(frozenset(p for p, r in part if r == rho) for part in sigma.parts()))


def binding_passes(sigma: QuadLabel, rho: str, label: Iterable[str]) -> bool:
    """A single robot holding ``rho`` whose next state has ``label`` honors ``sigma``."""
    view = capability_view(sigma, rho)
    label = frozenset(label)
    return view.required <= label and not (view.forbidden & label)


def passing_bindings(sigma: QuadLabel, label: Iterable[str],
                     universe: Iterable[str]) -> frozenset[str]:
    label = frozenset(label)
    return frozenset(r for r in universe if binding_passes(sigma, r, label))


def nonempty_subsets(universe: Iterable[str]) -> list[BindingSet]:
    items = sorted(universe)
    out = []
    for k in range(1, len(items) + 1):
        out.extend(frozenset(c) for c in itertools.combinations(items, k))
    return out


def valid_bindings(s: State, sigma: QuadLabel, s_next: State, model: RobotModel,
                   universe: Iterable[str]) -> set[BindingSet]:
    """All non-empty binding sets a robot may hold while taking ``s -> s_next`` under ``sigma``.

    The family is every non-empty subset of the individually passing bindings.
    """
    if not any(t == s_next for t, _ in model.successors(s)):
        raise ValueError(f"{s} -> {s_next} is not a robot transition")
    ok = passing_bindings(sigma, model.label(s_next), universe)
    return set(nonempty_subsets(ok))


def intermediate_props(sigma: QuadLabel, catalog: ActionCatalog) -> QuadLabel:
    """Restriction of ``sigma`` to non-instantaneous completion atoms."""
    return QuadLabel(*(frozenset(pr for pr in part if catalog.is_noninst(pr[0]))
                       for part in sigma.parts()))


@dataclass(frozen=True)
class PiSets:
    T: frozenset[Pair] = frozenset()
    F: frozenset[Pair] = frozenset()
    exT: frozenset[Pair] = frozenset()
    exF: frozenset[Pair] = frozenset()
    empty_T: frozenset[Pair] = frozenset()
    empty_exT: frozenset[Pair] = frozenset()
    empty_F: frozenset[Pair] = frozenset()
    empty_exF: frozenset[Pair] = frozenset()

    @property
    def changing(self) -> frozenset[Pair]:
        return self.T | self.F | self.exT | self.exF

    @property
    def fresh(self) -> frozenset[Pair]:
        return self.empty_T | self.empty_exT | self.empty_F | self.empty_exF

    def as_dict(self) -> dict[str, list[str]]:
        return {k: sorted(f"{p}^{r}" for p, r in getattr(self, k))
                for k in ("T", "F", "exT", "exF", "empty_T", "empty_exT", "empty_F", "empty_exF")}


def pi_sets(I: QuadLabel, I2: QuadLabel, mentioned: Iterable[Pair] | None = None) -> PiSets:
    """Classify non-instantaneous pairs by how they change from ``I`` to ``I2``.

    The fresh sets hold pairs of ``I2`` that the first label does not mention at all
    (``mentioned`` defaults to the pairs of ``I``). A pair that is for-all in one label
    and there-exists in the other is already constrained, so it is not fresh.
    """
    seen = I.pairs() if mentioned is None else frozenset(mentioned) | I.pairs()
    return PiSets(
        T=I.T & (I2.F | I2.exF),
        F=I.F & (I2.T | I2.exT),
        exT=I.exT & (I2.F | I2.exF),
        exF=I.exF & (I2.T | I2.exT),
        empty_T=I2.T - seen,
        empty_exT=I2.exT - seen,
        empty_F=I2.F - seen,
        empty_exF=I2.exF - seen,
    )

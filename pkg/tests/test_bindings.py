import itertools

import pytest
from hypothesis import given, strategies as st

from teamsynth.automata import QuadLabel
from teamsynth.bindings import (CapabilityView, bindings_of_label, bindings_of_set,
                                capability_view, intermediate_props, nonempty_subsets, pi_sets,
                                valid_bindings)
from teamsynth.models import capability, load_fleet, product

CATALOG = load_fleet("warehouse").catalog

OUTER = QuadLabel.of(T={("roomB_c", "2"), ("camera", "2"), ("roomB_c", "3"), ("camera", "3")},
                     exF={("dock_c", "1")})
INNER = QuadLabel.of(F={("dock_c", "1")})
GUARD = QuadLabel.of(T={("roomB_c", "2"), ("camera", "2"), ("roomB_c", "3"), ("camera", "3"),
                        ("dock_c", "1")})
U = {"1", "2", "3"}


def test_bindings_of_label():
    assert bindings_of_label(OUTER) == {"1", "2", "3"}
    assert bindings_of_label(QuadLabel()) == frozenset()
    assert bindings_of_label(QuadLabel.of(exF={("dock_c", "1")})) == {"1"}


def test_bindings_of_set():
    assert bindings_of_set({("roomB_c", "2"), ("camera", "2"), ("roomB_c", "3"), ("camera", "3"),
                            ("dock_c", "1")}) == {"1", "2", "3"}
    assert bindings_of_set({("dock_c", "1")}) == {"1"}
    assert bindings_of_set(set()) == frozenset()


def test_capability_view():
    assert capability_view(OUTER, "2") == CapabilityView(frozenset({"roomB_c", "camera"}))
    assert capability_view(OUTER, "1") == CapabilityView(C_exF=frozenset({"dock_c"}))
    assert capability_view(OUTER, "7") == CapabilityView()


# a one-robot model with a state for each label of interest
_STATES = {"plain": [], "roomB": ["roomB_c", "camera"], "dock": ["dock_c"],
           "both": ["roomB_c", "camera", "dock_c"], "cam": ["camera"]}
MODEL = product([capability("x", _STATES, [(a, b) for a in _STATES for b in _STATES])], "m")


def _brute(sigma, label, universe):
    """Per-binding requirement filter over explicit subsets."""
    out = set()
    for r in nonempty_subsets(universe):
        ok = True
        for rho in r:
            need = {p for part in (sigma.T, sigma.exT) for p, q in part if q == rho}
            forbid = {p for part in (sigma.F, sigma.exF) for p, q in part if q == rho}
            ok &= need <= set(label) and not forbid & set(label)
        if ok:
            out.add(r)
    return out


def test_valid_bindings_roomb():
    got = valid_bindings(("plain",), OUTER, ("roomB",), MODEL, U)
    assert got == set(nonempty_subsets(U)) and len(got) == 7


def test_valid_bindings_dock():
    assert valid_bindings(("plain",), OUTER, ("dock",), MODEL, U) == set()


def test_valid_bindings_empty_label():
    assert valid_bindings(("plain",), QuadLabel(), ("dock",), MODEL, U) == set(nonempty_subsets(U))


def test_valid_bindings_requires_transition():
    m = product([capability("x", {"a": [], "b": []}, [])], "m")
    with pytest.raises(ValueError):
        valid_bindings(("a",), QuadLabel(), ("b",), m, U)


def test_valid_bindings_matches_brute_force_on_fleet(fleet):
    labels = [OUTER, INNER, GUARD, QuadLabel.of(exT={("beep", "1")}, F={("roomB_c", "2")})]
    for m in fleet.robots.values():
        for s in m.states[::7]:
            for t, _ in m.successors(s):
                for sigma in labels:
                    assert valid_bindings(s, sigma, t, m, U) == _brute(sigma, m.label(t), U)


pairs = st.tuples(st.sampled_from(["roomB_c", "camera", "dock_c"]), st.sampled_from(["1", "2", "3"]))


def _disjoint(label):
    return all(not (x & y) for x, y in itertools.combinations(label.parts(), 2))


labels = st.builds(QuadLabel.of, st.frozensets(pairs, max_size=2), st.frozensets(pairs, max_size=2),
                   st.frozensets(pairs, max_size=2), st.frozensets(pairs, max_size=2)
                   ).filter(_disjoint)


@given(labels, st.sampled_from(list(_STATES)))
def test_valid_bindings_upward_closed(sigma, target):
    fam = valid_bindings(("plain",), sigma, (target,), MODEL, U)
    assert fam == _brute(sigma, _STATES[target], U)
    for r in fam:
        for rho in U - bindings_of_label(sigma):
            assert r | {rho} in fam


def test_intermediate_props(fleet):
    assert intermediate_props(OUTER, fleet.catalog) == QuadLabel.of(
        T={("roomB_c", "2"), ("roomB_c", "3")}, exF={("dock_c", "1")})
    assert intermediate_props(QuadLabel.of(T={("camera", "1"), ("beep", "2")}), fleet.catalog) \
        == QuadLabel()
    assert intermediate_props(QuadLabel.of(T={("push_c", "2")}), fleet.catalog) == \
        QuadLabel.of(T={("push_c", "2")})


def test_pi_sets_worked_example(fleet):
    I1 = intermediate_props(INNER, fleet.catalog)
    I2 = intermediate_props(GUARD, fleet.catalog)
    p = pi_sets(I1, I2)
    assert p.F == {("dock_c", "1")}
    assert p.empty_T == {("roomB_c", "2"), ("roomB_c", "3")}
    assert not (p.T | p.exT | p.exF | p.empty_exT | p.empty_F | p.empty_exF)


def test_pi_sets_identical_labels():
    p = pi_sets(OUTER, OUTER)
    assert not p.changing and not p.fresh


def test_pi_sets_exists_false():
    p = pi_sets(QuadLabel.of(exF={("dock_c", "1"), ("push_c", "2")}),
                QuadLabel.of(T={("dock_c", "1"), ("push_c", "2")}))
    assert p.exF == {("dock_c", "1"), ("push_c", "2")}
    assert not (p.T | p.F | p.exT) and not p.fresh


@given(labels, labels)
def test_pi_sets_disjoint_and_noninstantaneous(a, b):
    cat = CATALOG
    p = pi_sets(intermediate_props(a, cat), intermediate_props(b, cat))
    assert not (p.T & p.F)
    fresh = [p.empty_T, p.empty_exT, p.empty_F, p.empty_exF]
    for x, y in itertools.combinations(fresh, 2):
        assert not (x & y)
    for pr in p.changing | p.fresh:
        assert cat.is_noninst(pr[0])

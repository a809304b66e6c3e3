"""Acceptance suite: one PASS/FAIL line per criterion (see the terminal summary)."""
import functools
import time

import pytest

import teamsynth.search as search_mod
from teamsynth import bench, logic
from teamsynth.automata import Edge, QuadLabel, translate
from teamsynth.pipeline import run_once, synthesize
from teamsynth.product import build, build_all, isomorphic
from teamsynth.search import find_team
from teamsynth.sim import SimConfig
from teamsynth.update import BindingConstraints, update_buchi

from lasso_oracle import CORPUS, check_formula
from test_product import CASE2_TASK

RESULTS: dict[int, tuple[str, str]] = {}


def criterion(number, title):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            start = time.perf_counter()
            try:
                fn(*args, **kwargs)
            except BaseException as exc:
                RESULTS[number] = ("FAIL", f"{title} ({type(exc).__name__}: {exc})"[:300])
                print(f"criterion {number}: FAIL {title}")
                raise
            RESULTS[number] = ("PASS", f"{title} [{time.perf_counter() - start:.1f}s]")
            print(f"criterion {number}: PASS {title}")
        return run
    return wrap


@criterion(1, "Task 1 reproduction")
def test_c1_task1(fleet, task1_text):
    start = time.perf_counter()
    syn = synthesize(task1_text, fleet)
    assert time.perf_counter() - start < 60
    assert syn.search.assignments == {"green": {"2", "3"}, "blue": {"1"}, "orange": {"1"},
                                      "pink": {"2", "3"}}
    assert syn.search.constraints.c_single == {frozenset({"1"})}
    assert set(syn.plan.team) == {"green", "pink", "blue"}


@criterion(2, "Task 2 reproduction")
def test_c2_task2(fleet, task2_text):
    start = time.perf_counter()
    syn = synthesize(task2_text, fleet.subset(["green", "orange", "pink"]), strict=True)
    assert time.perf_counter() - start < 60
    assert syn.search.assignments == {"green": {"1", "3"}, "orange": {"1", "3"}, "pink": {"2"}}


@criterion(3, "Büchi update worked examples")
def test_c3_update_examples(fleet, task1_text):
    b = translate(logic.rewrite_bindings(logic.parse_task(task1_text)))
    z1, z3 = b.initial, next(iter(b.accepting))
    inner = Edge(z1, QuadLabel.of(F={("dock_c", "1")}), z1)
    guard = QuadLabel.of(T={("roomB_c", "2"), ("camera", "2"), ("roomB_c", "3"),
                            ("camera", "3"), ("dock_c", "1")})
    guarded = Edge(z1, guard, z3)
    sink = Edge(z3, QuadLabel.of(F={("dock_c", "1")}), z3)
    star = QuadLabel.of(T={("roomB_c", "2"), ("roomB_c", "3")}, F={("dock_c", "1")})
    upd = update_buchi(b, inner, guarded, fleet.catalog)
    zs = f"{z1}*"
    assert upd.e_upd == (Edge(z1, inner.label, zs), Edge(zs, star, zs), Edge(zs, guard, z3))
    same = update_buchi(b, guarded, sink, fleet.catalog)
    assert same.automaton is b and same.e_upd == ()
    assert same.constraints == BindingConstraints(frozenset({frozenset({"1"})}))


def _orders_task1(res):
    dock = res.first_index(lambda s: "dock_c" in s["blue"])
    rooms = [res.first_index(lambda s, j=j: "roomB_c" in s[j]) for j in ("green", "pink")]
    return dock is not None and None not in rooms and dock >= max(rooms)


def _orders_task2(res, pushers):
    push = res.first_index(lambda s: any("push_c" in s[j] for j in pushers))
    room = res.first_index(lambda s: any("roomB_c" in a for a in s.values()))
    return push is not None and (room is None or push <= room)


@criterion(4, "continuous correctness over 1000 seeds per task")
def test_c4_continuous(syn1, syn2):
    pushers = [j for j, r in syn2.plan.assignments.items() if "3" in r]
    bad = []
    for seed in range(1000):
        for name, syn, order in (("task1", syn1, _orders_task1),
                                 ("task2", syn2, lambda r: _orders_task2(r, pushers))):
            res, verdict = run_once(syn, SimConfig(seed=seed))
            if verdict.violated or not order(res):
                bad.append((name, seed, verdict.explanation))
    assert not bad, bad[:5]


@criterion(5, "ablation necessity")
def test_c5_ablation(syn1_ablated):
    violated = sum(run_once(syn1_ablated, SimConfig(seed=s))[1].violated for s in range(100))
    assert violated >= 1


@criterion(6, "translator oracle on the 30-formula corpus")
def test_c6_translator():
    assert len(CORPUS) == 30
    start = time.perf_counter()
    for text in CORPUS:
        words, bad = check_formula(text, max_stem=4, max_loop=3)
        assert words > 0 and not bad, (text, bad[:3])
    assert time.perf_counter() - start < 300


@criterion(7, "incremental product update equals rebuild")
def test_c7_incremental(monkeypatch, fleet, task1_text, task2_text):
    calls = []
    real = search_mod.update_product

    def spy(g, b_old, b_upd, e_upd):
        e_upd = tuple(e_upd)
        out = real(g, b_old, b_upd, e_upd)
        calls.append((g, b_upd, e_upd, out))
        return out

    monkeypatch.setattr(search_mod, "update_product", spy)
    scenarios = [(task1_text, fleet, False),
                 (task2_text, fleet.subset(["green", "orange", "pink"]), True),
                 (CASE2_TASK, fleet, False)]
    checked = set()
    for text, fl, strict in scenarios:
        f = logic.parse_task(text)
        b = translate(logic.rewrite_bindings(f))
        u = logic.bindings_in(f)
        calls.clear()
        find_team(b, build_all(fl.robots, b, u), u, fl.catalog, strict=strict)
        for g, b_upd, e_upd, out in calls:
            key = (g.model.name, b_upd.structure(), e_upd)
            if key not in checked:
                checked.add(key)
                assert isomorphic(out, build(g.model, b_upd, g.universe))
    assert {len(k[2]) for k in checked} >= {1, 3}


@criterion(8, "scaling trends")
def test_c8_scaling():
    robots = bench.robot_sweep(range(2, 11), repeats=5)
    bindings = bench.binding_sweep(range(2, 7), repeats=5)
    r2 = bench.linear_r2(robots)
    assert r2 >= 0.8, f"robot-count R^2 {r2:.3f}"
    assert bench.superlinear(bindings), bench.format_table(bindings)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))

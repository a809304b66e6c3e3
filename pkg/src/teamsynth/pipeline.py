"""End-to-end synthesis: task text and fleet in, resolved team plan and programs out."""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from . import logic
from .automata import BuchiAutomaton, translate
from .behavior import Behavior, RobotProgram, execute_segments, find_behavior
from .logic import Formula
from .models import Fleet
from .product import build_all
from .search import Chooser, TeamPlan, choose_by_name, find_team, resolve_single, verify_plan
from .sim import MonitorVerdict, SimConfig, SimResult, monitor, simulate

BUILTIN_TASKS = {"task1": "task1.ltl", "task2": "task2.ltl"}


def task_text(source: str | Path) -> str:
    """Task source by builtin name (``task1``, ``task2``) or file path."""
    if str(source) in BUILTIN_TASKS:
        return resources.files("teamsynth.data").joinpath(BUILTIN_TASKS[str(source)]).read_text()
    path = Path(source)
    if not path.is_file():
        raise FileNotFoundError(f"task file {path} not found")
    return path.read_text(encoding="utf-8")


@dataclass
class Synthesis:
    formula: Formula
    rewritten: Formula
    automaton: BuchiAutomaton
    search: TeamPlan
    plan: TeamPlan
    behaviors: dict[str, Behavior]
    programs: dict[str, RobotProgram]
    fleet: Fleet

    def as_dict(self) -> dict:
        doc = self.plan.as_dict()
        doc["search_assignments"] = {j: sorted(r) for j, r in sorted(self.search.assignments.items())}
        doc["behaviors"] = {j: b.as_dict() for j, b in sorted(self.behaviors.items())}
        doc["rewritten"] = logic.to_text(self.rewritten)
        return doc


def min_cost_chooser(plan: TeamPlan) -> Chooser:
    """Pick the holder with the cheapest behavior; ties go to the first name."""
    def choose(c, robots, R):
        costs = {j: find_behavior(plan.products[j], R[j], plan.beta_raw, j).cost for j in robots}
        return min(robots, key=lambda j: (costs[j], j))
    return choose


def synthesize(task: str | Formula, fleet: Fleet, strict: bool = False, insert: bool = True,
               chooser: str | Chooser = "min-cost") -> Synthesis:
    f = logic.parse_task(task) if isinstance(task, str) else task
    rw = logic.rewrite_bindings(f)
    b = translate(rw)
    b.require_self_loops()
    universe = logic.bindings_in(f)
    products = build_all(fleet.robots, b, universe)
    found = find_team(b, products, universe, fleet.catalog, strict=strict, insert=insert)
    if chooser == "min-cost":
        pick = min_cost_chooser(found)
    elif chooser == "name":
        pick = choose_by_name
    elif callable(chooser):
        pick = chooser
    else:
        raise ValueError(f"unknown chooser {chooser!r}")
    plan = resolve_single(found, pick)
    verify_plan(plan)
    behaviors = {j: find_behavior(plan.products[j], plan.assignments[j], plan.beta_raw, j)
                 for j in plan.team}
    programs = execute_segments(behaviors, plan.products, plan.beta_raw, plan.automaton,
                                plan.assignments)
    return Synthesis(f, rw, b, found, plan, behaviors, programs, fleet)


def run_once(syn: Synthesis, config: SimConfig) -> tuple[SimResult, MonitorVerdict]:
    res = simulate(syn.programs, syn.fleet.catalog, config)
    return res, monitor(res.snapshots, syn.automaton, syn.plan.assignments)

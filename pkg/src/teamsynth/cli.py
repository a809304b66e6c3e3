"""Command line entry point: ``teamsynth {parse,translate,synthesize,simulate,bench}``.

Exit codes: 0 success, 1 configuration error, 2 UNSAT, 3 monitor violation.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import bench, logic
from .automata import AutomatonError, translate
from .behavior import BehaviorError
from .hoa import export_dot, export_hoa
from .models import ModelError, load_fleet
from .pipeline import run_once, synthesize, task_text
from .search import Unsat
from .sim import SimConfig, SimulationError

EXIT_OK, EXIT_CONFIG, EXIT_UNSAT, EXIT_VIOLATION = 0, 1, 2, 3


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class RunManifest:
    task: str
    fleet: str
    robots: tuple[str, ...] | None
    chooser: str
    strict: bool
    ablate_intermediate: bool
    seed: int
    out: Path

    def as_dict(self) -> dict:
        return {"task": self.task, "fleet": self.fleet,
                "robots": list(self.robots) if self.robots else None,
                "chooser": self.chooser, "strict": self.strict,
                "ablate_intermediate": self.ablate_intermediate, "seed": self.seed}


def _manifest(args) -> RunManifest:
    out = Path(args.out or os.environ.get("TEAMSYNTH_OUT") or "out")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory {out} is not writable")
    robots = getattr(args, "robots", None)
    return RunManifest(
        task=args.task, fleet=getattr(args, "fleet", "warehouse"),
        robots=tuple(r.strip() for r in robots.split(",") if r.strip()) if robots else None,
        chooser=getattr(args, "chooser", "min-cost"), strict=getattr(args, "strict", False),
        ablate_intermediate=getattr(args, "ablate_intermediate", False),
        seed=getattr(args, "seed", 0), out=out)


def _dump(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _formula(m: RunManifest):
    try:
        return logic.parse_task(task_text(m.task))
    except FileNotFoundError as exc:
        raise ConfigError(f"{exc}; use task1, task2 or a path to a task file") from exc


def _fleet(m: RunManifest):
    fleet = load_fleet(m.fleet)
    if m.robots:
        fleet = fleet.subset(m.robots)
    return fleet


# ---------------------------------------------------------------- commands

def cmd_parse(args) -> int:
    m = _manifest(args)
    f = _formula(m)
    doc = {"formula": logic.to_text(f), "ast": logic.to_dict(f),
           "bindings": sorted(logic.bindings_in(f)),
           "rewritten": logic.to_text(logic.rewrite_bindings(f))}
    _dump(m.out / "ast.json", doc)
    print(json.dumps(doc["ast"], indent=2, sort_keys=True))
    return EXIT_OK


def cmd_translate(args) -> int:
    m = _manifest(args)
    b = translate(logic.rewrite_bindings(_formula(m)))
    (m.out / "automaton.hoa").write_text(export_hoa(b, m.task), encoding="utf-8")
    (m.out / "automaton.dot").write_text(export_dot(b), encoding="utf-8")
    print(f"{len(b.states)} states, {len(b.edges)} edges, accepting {sorted(b.accepting)}")
    return EXIT_OK


def _synth(m: RunManifest):
    return synthesize(_formula(m), _fleet(m), strict=m.strict,
                      insert=not m.ablate_intermediate, chooser=m.chooser)


def cmd_synthesize(args) -> int:
    m = _manifest(args)
    syn = _synth(m)
    doc = syn.as_dict()
    doc["manifest"] = m.as_dict()
    _dump(m.out / "plan.json", doc)
    for j in syn.plan.team:
        print(f"{j}: {sorted(syn.plan.assignments[j])}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    m = _manifest(args)
    if args.runs < 1:
        raise ConfigError("--runs must be at least 1")
    syn = _synth(m)
    violations = 0
    verdicts = []
    with open(m.out / "events.jsonl", "w", encoding="utf-8") as log:
        for seed in range(m.seed, m.seed + args.runs):
            cfg = SimConfig(seed=seed, latency=args.latency, durations=args.all_durations)
            try:
                res, verdict = run_once(syn, cfg)
                doc = verdict.as_dict()
                events = res.events
            except SimulationError as exc:
                doc = {"outcome": "violated", "index": None, "snapshot": None,
                       "explanation": str(exc)}
                events = exc.result.events if exc.result else []
            for e in events:
                log.write(json.dumps({"seed": seed, **e}, sort_keys=True) + "\n")
            doc["seed"] = seed
            verdicts.append(doc)
            violations += doc["outcome"] == "violated"
    _dump(m.out / "verdicts.json", {"manifest": m.as_dict(), "runs": args.runs,
                                    "violations": violations, "verdicts": verdicts})
    print(f"{args.runs} runs, {violations} violated")
    return EXIT_VIOLATION if violations else EXIT_OK


def cmd_bench(args) -> int:
    out = Path(args.out or os.environ.get("TEAMSYNTH_OUT") or "out")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from exc
    rows, summary = [], {}
    if args.sweep in ("robots", "both"):
        r = bench.robot_sweep(range(args.min_robots, args.max_robots + 1), args.repeats, args.seed)
        rows += r
        summary["robots_r2"] = bench.linear_r2(r) if len(r) > 1 else None
    if args.sweep in ("bindings", "both"):
        r = bench.binding_sweep(range(args.min_bindings, args.max_bindings + 1), args.repeats,
                                seed=args.seed)
        rows += r
        summary["bindings_superlinear"] = bench.superlinear(r) if len(r) > 2 else None
    table = bench.format_table(rows)
    (out / "bench.tsv").write_text(table, encoding="utf-8")
    _dump(out / "bench.json", {"rows": [r.as_dict() for r in rows], "summary": summary})
    sys.stdout.write(table)
    return EXIT_OK


# ---------------------------------------------------------------- argparse

def _common(p, fleet=False):
    p.add_argument("--task", default="task1", help="task1, task2 or a task file path")
    p.add_argument("--out", help="output directory (default $TEAMSYNTH_OUT or ./out)")
    if fleet:
        p.add_argument("--fleet", default="warehouse", help="warehouse or a fleet JSON path")
        p.add_argument("--robots", help="comma-separated subset of the fleet")
        p.add_argument("--chooser", choices=("min-cost", "name"), default="min-cost")
        p.add_argument("--strict", action="store_true",
                       help="key the visited set on the full search node")
        p.add_argument("--ablate-intermediate", action="store_true",
                       help="disable intermediate-state insertion")
        p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="teamsynth", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("parse", help="dump the task AST")
    _common(p)
    p.set_defaults(func=cmd_parse)
    p = sub.add_parser("translate", help="export the Büchi automaton as HOA and DOT")
    _common(p)
    p.set_defaults(func=cmd_translate)
    p = sub.add_parser("synthesize", help="find a team, trace and binding assignment")
    _common(p, fleet=True)
    p.set_defaults(func=cmd_synthesize)
    p = sub.add_parser("simulate", help="simulate the plan and monitor every run")
    _common(p, fleet=True)
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--all-durations", type=float, default=None,
                   help="override every action duration with this value")
    p.add_argument("--latency", type=float, default=0.0)
    p.set_defaults(func=cmd_simulate)
    p = sub.add_parser("bench", help="timing sweeps over robots and bindings")
    p.add_argument("--out")
    p.add_argument("--sweep", choices=("robots", "bindings", "both"), default="both")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-robots", type=int, default=2)
    p.add_argument("--max-robots", type=int, default=10)
    p.add_argument("--min-bindings", type=int, default=2)
    p.add_argument("--max-bindings", type=int, default=6)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Unsat as exc:
        print(f"UNSAT: {exc}", file=sys.stderr)
        return EXIT_UNSAT
    except (ConfigError, ModelError, logic.TaskSyntaxError, logic.SemanticsError,
            AutomatonError, BehaviorError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())

"""Synthesis timing sweeps over robot count and binding count."""
from __future__ import annotations

import json
import random
import statistics
import time
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import logic
from .automata import translate
from .models import Fleet, fleet_from_dict
from .product import build_all
from .search import Unsat, find_team

OPTIONAL_CAPS = ("arm", "camera", "beep", "scan")


def _warehouse_cfg() -> dict:
    return json.loads(resources.files("teamsynth.data").joinpath("warehouse.json").read_text())


def random_fleet(n: int, seed: int) -> Fleet:
    """``n`` robots with motion plus a random subset of the other capabilities.

    Fleets are nested: for a fixed seed, the first ``n`` robots do not depend on ``n``.
    """
    cfg = _warehouse_cfg()
    rng = random.Random(seed)
    locations = cfg["environment"]["locations"]
    robots = {}
    for i in range(n):
        caps = ["motion"] + [c for c in OPTIONAL_CAPS if rng.random() < 0.5]
        robots[f"r{i:02d}"] = {"capabilities": caps, "start": rng.choice(locations)}
    cfg["robots"] = robots
    return fleet_from_dict(cfg)


def binding_task(k: int) -> str:
    """Task 1 shape with bindings 2..k conjoined on the guarded requirement."""
    if k < 2:
        raise ValueError("binding sweep needs at least two bindings")
    rest = "&".join(str(i) for i in range(2, k + 1))
    return f"F(dock_c^1) & G(!(!dock_c^1) -> (roomB_c & camera)^({rest}))"


def time_synthesis(task: str, fleet: Fleet, strict: bool = False) -> tuple[float, bool]:
    start = time.perf_counter()
    f = logic.parse_task(task)
    b = translate(logic.rewrite_bindings(f))
    universe = logic.bindings_in(f)
    products = build_all(fleet.robots, b, universe)
    try:
        find_team(b, products, universe, fleet.catalog, strict=strict)
        sat = True
    except Unsat:
        sat = False
    return time.perf_counter() - start, sat


@dataclass(frozen=True)
class Row:
    sweep: str
    x: int
    median: float
    low: float
    high: float
    runs: int
    sat: int

    def as_dict(self) -> dict:
        return {"sweep": self.sweep, "x": self.x, "median_s": self.median, "min_s": self.low,
                "max_s": self.high, "runs": self.runs, "sat": self.sat}


def _row(sweep, x, samples) -> Row:
    times = [t for t, _ in samples]
    return Row(sweep, x, statistics.median(times), min(times), max(times), len(samples),
               sum(1 for _, s in samples if s))


def robot_sweep(sizes=range(2, 11), repeats: int = 5, seed: int = 0) -> list[Row]:
    task = binding_task(3)
    rows = []
    for n in sizes:
        samples = [time_synthesis(task, random_fleet(n, seed * 1000 + k)) for k in range(repeats)]
        rows.append(_row("robots", n, samples))
    return rows


def binding_sweep(counts=range(2, 7), repeats: int = 5, robots: int = 4, seed: int = 0) -> list[Row]:
    rows = []
    for k in counts:
        samples = [time_synthesis(binding_task(k), random_fleet(robots, seed * 1000 + i))
                   for i in range(repeats)]
        rows.append(_row("bindings", k, samples))
    return rows


def linear_r2(rows: list[Row]) -> float:
    x = np.array([r.x for r in rows], dtype=float)
    y = np.array([r.median for r in rows], dtype=float)
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    return 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0


def growth_ratio(rows: list[Row]) -> float:
    """Median time ratio last/first divided by the x ratio (>1 means super-linear)."""
    first, last = rows[0], rows[-1]
    return (last.median / first.median) / (last.x / first.x)


def log_slopes(rows: list[Row]) -> list[float]:
    """Slopes of log(median) between consecutive sweep points."""
    y = np.log([r.median for r in rows])
    x = np.array([r.x for r in rows], dtype=float)
    return list(np.diff(y) / np.diff(x))


def loglog_exponent(rows: list[Row]) -> float:
    """Fitted exponent k of median ~ x**k."""
    x = np.log([r.x for r in rows])
    y = np.log([r.median for r in rows])
    return float(np.polyfit(x, y, 1)[0])


def superlinear(rows: list[Row]) -> bool:
    """Growth faster than linear: log-log exponent and end-to-end growth ratio above 1."""
    return loglog_exponent(rows) > 1.0 and growth_ratio(rows) > 1.0


def format_table(rows: list[Row]) -> str:
    lines = ["sweep\tx\tmedian_s\tmin_s\tmax_s\truns\tsat"]
    for r in rows:
        lines.append(f"{r.sweep}\t{r.x}\t{r.median:.6f}\t{r.low:.6f}\t{r.high:.6f}\t{r.runs}\t{r.sat}")
    return "\n".join(lines) + "\n"

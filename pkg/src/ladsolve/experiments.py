"""Seeded scenario generation and fleet-size benchmark runs."""

from __future__ import annotations

import csv
import io
import logging
import math
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .checker import check_solution
from .exact import ExactSolver, InfeasibleError
from .geo import EuclideanTravel, TravelModel
from .greedy import GreedySolver
from .grouping import build_groups
from .metrics import REPORT_COLUMNS, report_row
from .model import Customer, DroneSpec, Point, Scenario, Solution, Vehicle, VehicleType, load_scenario
from .segments import precompute_segments

logger = logging.getLogger(__name__)

# Cost, fuel stock and capacity per vehicle type follow the standard
# simulation defaults. Consumption rates are typical figures for a compact
# sedan, a large sedan and a pickup truck (32/25/18 mpg; 0.16/0.30/0.50 gal/h idle).
TYPE_DEFAULTS = {
    VehicleType.TYPE1: dict(c_mob=0.1, c_stop=0.00013, f_avail=13.0, cap=7,
                            f_mob=1 / (32 * 1.609344), f_stop=0.16 / 3600),
    VehicleType.TYPE2: dict(c_mob=0.12, c_stop=0.00033, f_avail=15.0, cap=9,
                            f_mob=1 / (25 * 1.609344), f_stop=0.30 / 3600),
    VehicleType.TYPE3: dict(c_mob=0.15, c_stop=0.00071, f_avail=23.0, cap=14,
                            f_mob=1 / (18 * 1.609344), f_stop=0.50 / 3600),
}
BUDGET_PER_CUSTOMER = 5.99
T_AVAIL_RANGE_H = (10.0, 16.0)


def generate_scenario(
    n_customers: int,
    n_vehicles: int,
    box_km: float = 20.0,
    type_mix: Sequence[float] = (1.0, 1.0, 1.0),
    seed: int = 0,
    budget_per_customer: float = BUDGET_PER_CUSTOMER,
    drone: DroneSpec | None = None,
) -> Scenario:
    """Customers and vehicle homes uniform in a square box, depot at its centre.

    ``type_mix`` weights the three vehicle types; the budget is the per-customer
    shipping rate times the number of customers.
    """
    if n_customers < 1 or n_vehicles < 1:
        raise ValueError("n_customers and n_vehicles must be positive")
    if box_km <= 0:
        raise ValueError("box_km must be positive")
    mix = np.asarray(type_mix, dtype=float)
    if mix.shape != (3,) or np.any(mix < 0) or mix.sum() <= 0:
        raise ValueError("type_mix needs three non-negative weights")
    rng = np.random.default_rng(seed)
    xy = rng.uniform(0.0, box_km, size=(n_customers, 2))
    homes = rng.uniform(0.0, box_km, size=(n_vehicles, 2))
    types = rng.choice(3, size=n_vehicles, p=mix / mix.sum())
    t_avail = rng.uniform(*T_AVAIL_RANGE_H, size=n_vehicles)

    cw, vw = len(str(n_customers)), len(str(n_vehicles))
    customers = tuple(
        Customer(f"c{i + 1:0{cw}d}", Point(float(x), float(y))) for i, (x, y) in enumerate(xy)
    )
    vehicles = []
    for i in range(n_vehicles):
        tag = list(TYPE_DEFAULTS)[int(types[i])]
        vehicles.append(Vehicle(
            id=f"v{i + 1:0{vw}d}",
            home=Point(float(homes[i, 0]), float(homes[i, 1])),
            t_avail=float(round(t_avail[i] * 3600.0)),
            type_tag=tag,
            **TYPE_DEFAULTS[tag],
        ))
    half = box_km / 2
    return Scenario(
        depot=Point(half, half),
        vehicles=tuple(vehicles),
        customers=customers,
        budget=round(budget_per_customer * n_customers, 2),
        drone=drone or DroneSpec(),
    )


def group_scenario(s: Scenario, max_group_size: int = 10, target_groups: int | None = None, seed: int = 0,
                   n_drones: int | None = None) -> Scenario:
    """Attach groups; delivery times use the smallest drone count in the fleet.

    Group size is capped at the largest vehicle capacity, since a bigger group
    could never be served.
    """
    largest = max((v.cap for v in s.vehicles), default=max_group_size)
    if max_group_size > largest:
        logger.info("max group size %d exceeds the largest vehicle capacity; using %d", max_group_size, largest)
        max_group_size = largest
    if n_drones is None:
        n_drones = min((v.n_drones for v in s.vehicles), default=3)
    groups = build_groups(
        list(s.customers), s.drone.range_km, max_group_size, target_groups, seed,
        n_drones=n_drones, drone_speed=s.drone.speed_kmh, service_time=s.drone.service_time_s,
    )
    return s.with_groups(groups)


# -- bench ------------------------------------------------------------------------


@dataclass
class BenchResult:
    row: dict
    solution: Solution | None
    problems: list[str]


def run_instance(scenario_id: str, s: Scenario, fleet_size: int, algorithm: str, travel: TravelModel,
                 time_limit_s: float = 300.0, branch_limit: int | None = 4, timing: bool = True,
                 cache=None) -> BenchResult:
    sub = s.with_vehicles(s.vehicles[:fleet_size])
    base = {k: "" for k in REPORT_COLUMNS}
    base.update(scenario_id=scenario_id, algorithm=algorithm, fleet_size=fleet_size)
    try:
        if cache is None:
            cache = precompute_segments(sub, travel)
        t0 = time.perf_counter()
        if algorithm == "greedy":
            sol = GreedySolver(branch_limit=branch_limit).fit(sub, cache).solution_
        elif algorithm == "exact":
            # greedy always reloads, so exact rows get the same freedom
            sol = ExactSolver(time_limit_s=time_limit_s, allow_reload=True).fit(sub, cache).solution_
        else:
            raise ValueError(f"unknown algorithm {algorithm!r}")
        runtime = time.perf_counter() - t0
    except InfeasibleError as exc:
        base.update(status=f"infeasible-{exc.kind}", uncovered_count=len(s.groups))
        return BenchResult(base, None, [])
    except Exception as exc:  # noqa: BLE001 - recorded per row, the run goes on
        logger.error("row %s/%s/%s failed: %s", scenario_id, fleet_size, algorithm, exc)
        logger.debug(traceback.format_exc())
        base.update(status=f"error: {type(exc).__name__}: {exc}".replace("\n", " "))
        return BenchResult(base, None, [])
    row = report_row(scenario_id, fleet_size, sol, sub.budget, runtime if timing else None)
    problems = check_solution(sub, sol, travel)
    if problems:
        row["status"] = "invalid"
    return BenchResult(row, sol, problems)


def _run_task(args):
    path, sid, fleet, algo, travel, time_limit_s, branch_limit, timing = args
    s = _prepare(load_scenario(path))
    return run_instance(sid, s, fleet, algo, travel, time_limit_s, branch_limit, timing)


def _prepare(s: Scenario) -> Scenario:
    if s.groups:
        return s
    logger.info("scenario has no groups; grouping with defaults")
    return group_scenario(s)


def run_bench(
    scenarios: Sequence[str | Path],
    fleet_sizes: Sequence[int],
    algorithms: Sequence[str] = ("greedy",),
    out: str | Path | None = None,
    travel: TravelModel | None = None,
    time_limit_s: float = 300.0,
    branch_limit: int | None = 4,
    timing: bool = True,
    jobs: int = 1,
) -> list[BenchResult]:
    """Solve every (scenario, fleet size, algorithm) and write one CSV row each.

    Rows keep input order whatever the completion order.
    """
    travel = travel or EuclideanTravel()
    tasks = []
    for path in scenarios:
        sid = Path(path).stem
        for fleet in fleet_sizes:
            for algo in algorithms:
                tasks.append((str(path), sid, int(fleet), algo, travel, time_limit_s, branch_limit, timing))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        loaded: dict[str, Scenario] = {}
        results = []
        for path, sid, fleet, algo, *rest in tasks:
            if path not in loaded:
                loaded[path] = _prepare(load_scenario(path))
            results.append(run_instance(sid, loaded[path], fleet, algo, *rest))
    if out is not None:
        write_report(results, out)
    return results


def write_report(results: Sequence[BenchResult], out: str | Path) -> None:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=REPORT_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in results:
        w.writerow(r.row)
    Path(out).write_text(buf.getvalue())


def parse_fleet_sizes(text: str) -> list[int]:
    """``"10:100:10"`` (inclusive range) or ``"10,20,50"``."""
    if ":" in text:
        start, stop, step = (int(x) for x in text.split(":"))
        if step <= 0:
            raise ValueError("fleet step must be positive")
        return list(range(start, stop + 1, step))
    sizes = [int(x) for x in text.split(",") if x.strip()]
    if not sizes or min(sizes) < 1:
        raise ValueError(f"bad fleet sizes {text!r}")
    return sizes


def summarize(rows: Sequence[dict]) -> list[dict]:
    """Mean metrics per (algorithm, fleet_size) over rows with full coverage."""
    acc: dict[tuple[str, int], list[dict]] = {}
    for r in rows:
        acc.setdefault((r["algorithm"], int(r["fleet_size"])), []).append(r)
    out = []
    for (algo, fleet), rs in sorted(acc.items()):
        ok = [r for r in rs if r["status"] == "ok"]

        def mean(col):
            vals = [float(r[col]) for r in ok if r[col] != ""]
            return sum(vals) / len(vals) if vals else math.nan

        out.append({
            "algorithm": algo, "fleet_size": fleet, "rows": len(rs), "ok": len(ok),
            "total_cost": mean("total_cost"), "savings": mean("savings"),
            "per_vehicle_profit": mean("per_vehicle_profit"),
            "completion_time_s": mean("completion_time_s"), "runtime_s": mean("runtime_s"),
        })
    return out

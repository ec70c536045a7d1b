"""Independent solution checker.

Recomputes every route directly from the travel provider, without the segment
cache or any solver code, and reports constraint violations:

* ``cover``: each group served exactly once (or listed as uncovered).
* ``budget``: total cost within budget (checked when coverage is full).
* ``capacity``: parcels per trip within the vehicle's capacity.
* ``fuel``: fuel used within fuel available.
* ``time``: total route time within available time.
* ``accounting``: reported costs match the recomputed ones.
"""

from __future__ import annotations

from collections import Counter

from .geo import TravelModel
from .model import Scenario, Solution

TOL = 1e-9


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= TOL * max(1.0, abs(a), abs(b))


def _leq(a: float, b: float) -> bool:
    return a <= b + TOL * max(1.0, abs(b))


def check_solution(s: Scenario, sol: Solution, travel: TravelModel) -> list[str]:
    problems: list[str] = []
    groups = {g.id: g for g in s.groups}
    vehicles = {v.id: v for v in s.vehicles}
    f = s.depot

    seen = Counter(g for trips in sol.routes.values() for trip in trips for g in trip)
    for gid, n in seen.items():
        if gid not in groups:
            problems.append(f"cover: unknown group {gid}")
        elif n > 1:
            problems.append(f"cover: group {gid} served {n} times")
    for gid in sol.uncovered:
        if gid in seen:
            problems.append(f"cover: group {gid} both served and uncovered")
    for gid in groups:
        if gid not in seen and gid not in sol.uncovered:
            problems.append(f"cover: group {gid} neither served nor uncovered")

    total = 0.0
    for vid, trips in sol.routes.items():
        v = vehicles.get(vid)
        if v is None:
            problems.append(f"cover: unknown vehicle {vid}")
            continue
        if not trips:
            continue
        dist = travel.distance(v.home, f) + travel.distance(f, v.home)
        drive = travel.travel_time(v.home, f) + travel.travel_time(f, v.home)
        wait = 0.0
        for trip in trips:
            if any(g not in groups for g in trip):
                continue
            stops = [f, *(groups[g].waiting_location for g in trip), f]
            for a, b in zip(stops, stops[1:]):
                dist += travel.distance(a, b)
                drive += travel.travel_time(a, b)
            drive += v.t_load
            parcels = sum(len(groups[g].members) for g in trip)
            if parcels > v.cap:
                problems.append(f"capacity: {vid} trip {list(trip)} carries {parcels} > {v.cap}")
            wait += sum(groups[g].t_delivery for g in trip)
        fuel = v.f_mob * dist + v.f_stop * wait
        cost = v.c_mob * dist + v.c_stop * wait
        t_tot = drive + wait
        if not _leq(fuel, v.f_avail):
            problems.append(f"fuel: {vid} uses {fuel:.6f} > {v.f_avail}")
        if not _leq(t_tot, v.t_avail):
            problems.append(f"time: {vid} needs {t_tot:.3f} s > {v.t_avail}")
        rep = sol.per_vehicle.get(vid)
        if rep is None:
            problems.append(f"accounting: no usage reported for {vid}")
        else:
            for name, mine in (("d_tot", dist), ("t_wait", wait), ("t_tot", t_tot), ("cost", cost)):
                if not _close(getattr(rep, name), mine):
                    problems.append(f"accounting: {vid} {name} reported {getattr(rep, name)!r}, recomputed {mine!r}")
        total += cost

    if not _close(sol.total_cost, total):
        problems.append(f"accounting: total_cost {sol.total_cost!r} != recomputed {total!r}")
    if not sol.uncovered and not _leq(total, s.budget):
        problems.append(f"budget: total {total:.6f} > {s.budget}")
    return problems

"""Scenario builders and independent brute-force oracles for the test suite.

Nothing here calls solver code. Route sums run left to right along the route,
which is the order the library uses, so oracle and solver agree bit for bit.
"""

from __future__ import annotations

import itertools
import math
import random

import numpy as np

from ladsolve.model import Customer, Group, Point, Scenario, Vehicle

TABLE2 = {
    # c_mob, c_stop, f_avail, cap per vehicle type
    "type1": (0.1, 0.00013, 13.0, 7),
    "type2": (0.12, 0.00033, 15.0, 9),
    "type3": (0.15, 0.00071, 23.0, 14),
}


def vehicle(vid, home=(0.0, 0.0), c_mob=0.1, c_stop=0.00013, cap=7, t_avail=36000.0, f_avail=13.0,
            f_mob=0.02, f_stop=0.0001, t_load=600.0, n_drones=3):
    return Vehicle(vid, Point(*home), c_mob, c_stop, cap, t_avail, f_avail, f_mob, f_stop, t_load, n_drones)


def scenario(groups, vehicles, depot=(0.0, 0.0), budget=2995.0):
    """``groups`` holds ``(id, (x, y), size, t_delivery)``; members sit on the waiting location."""
    customers, gs = [], []
    for gid, xy, size, t in groups:
        members = tuple(f"{gid}_c{k}" for k in range(size))
        customers += [Customer(m, Point(*xy)) for m in members]
        gs.append(Group(gid, members, Point(*xy), float(t)))
    return Scenario(Point(*depot), tuple(vehicles), tuple(customers), tuple(gs), budget)


def random_small(rng: random.Random, n_vehicles: int, n_groups: int, box: float = 10.0,
                 tight: bool = False) -> Scenario:
    """Random instance; ``tight`` draws small capacities, fuel and time so constraints bind."""
    groups = [
        (f"g{j}", (rng.uniform(0, box), rng.uniform(0, box)), rng.randint(1, 4), rng.uniform(60, 900))
        for j in range(n_groups)
    ]
    vehicles = []
    for i in range(n_vehicles):
        c_mob, c_stop, f_avail, cap = TABLE2[rng.choice(sorted(TABLE2))]
        if tight:
            cap = rng.randint(2, 8)
            f_avail = rng.uniform(0.3, 2.0)
            t_avail = rng.uniform(3600, 4 * 3600)
        else:
            t_avail = rng.uniform(6 * 3600, 12 * 3600)
        vehicles.append(vehicle(
            f"v{i}", (rng.uniform(0, box), rng.uniform(0, box)), c_mob, c_stop, cap, t_avail, f_avail,
            f_mob=rng.uniform(0.02, 0.05), f_stop=rng.uniform(0.16, 0.5) / 3600, t_load=rng.uniform(0, 900),
        ))
    budget = rng.choice([2995.0, 2995.0, 2995.0, rng.uniform(2.0, 30.0)])
    return scenario(groups, vehicles, depot=(box / 2, box / 2), budget=budget)


# -- oracles ------------------------------------------------------------------------------


def direct_trip(m, depot, pts, fn):
    """Left-to-right depot -> pts -> depot sum of ``fn`` queried on the provider."""
    stops = [depot, *pts, depot]
    total = fn(m, stops[0], stops[1])
    for a, b in zip(stops[1:-1], stops[2:]):
        total += fn(m, a, b)
    return total


def brute_tsp(m, depot, pts):
    """Minimum depot tour over all orders of ``pts``; returns (length, order)."""
    best, arg = math.inf, None
    for perm in itertools.permutations(range(len(pts))):
        length = direct_trip(m, depot, [pts[i] for i in perm], lambda mm, a, b: mm.distance(a, b))
        if length < best:
            best, arg = length, perm
    return best, arg


def oracle_vehicle(m, s: Scenario, v: Vehicle, gids, tours=None):
    """Single-trip cost of ``v`` over ``gids`` on its best order, or None if infeasible.

    ``tours`` memoizes the brute-force tour per group set (it does not depend
    on the vehicle).
    """
    gi = s.group_index()
    key = frozenset(gids)
    if tours is not None and key in tours:
        length, seq = tours[key]
    else:
        pts = [gi[g].waiting_location for g in gids]
        length, order = brute_tsp(m, s.depot, pts)
        seq = [pts[i] for i in order]
        if tours is not None:
            tours[key] = (length, seq)
    d = m.distance(v.home, s.depot)
    d += length
    d += m.distance(s.depot, v.home)
    t = m.travel_time(v.home, s.depot)
    t += v.t_load + direct_trip(m, s.depot, seq, lambda mm, a, b: mm.travel_time(a, b))
    t += m.travel_time(s.depot, v.home)
    t_wait = math.fsum(gi[g].t_delivery for g in gids)
    if sum(gi[g].size for g in gids) > v.cap:
        return None
    if v.f_mob * d + v.f_stop * t_wait > v.f_avail or t + t_wait > v.t_avail:
        return None
    return v.c_mob * d + v.c_stop * t_wait


def exhaustive_optimum(m, s: Scenario):
    """Cheapest single-trip assignment by enumerating all |V|^|G| choices.

    Returns ``(cost, "ok")``, ``(inf, "budget")`` or ``(inf, "resource")``.
    """
    gids = [g.id for g in s.groups]
    memo, tours = {}, {}
    best, any_feasible = math.inf, False
    for assign in itertools.product(range(len(s.vehicles)), repeat=len(gids)):
        total, ok = 0.0, True
        for vi, v in enumerate(s.vehicles):
            mine = tuple(g for g, a in zip(gids, assign) if a == vi)
            if not mine:
                continue
            key = (vi, frozenset(mine))
            if key not in memo:
                memo[key] = oracle_vehicle(m, s, v, mine, tours)
            if memo[key] is None:
                ok = False
                break
            total += memo[key]
        if not ok:
            continue
        any_feasible = True
        if total <= s.budget and total < best:
            best = total
    if best < math.inf:
        return best, "ok"
    return math.inf, "budget" if any_feasible else "resource"


_PERMS: dict[int, np.ndarray] = {}


def brute_tsp_cache(cache, ids):
    """Minimum depot tour length over every order of ``ids`` using cache entries.

    Vectorized over permutations; each column sum is still accumulated left to
    right, so the float result is the same as a scalar loop.
    """
    n = len(ids)
    if n not in _PERMS:
        _PERMS[n] = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    P = _PERMS[n]
    fw = np.array([cache.d_fw[g] for g in ids])
    wf = np.array([cache.d_wf[g] for g in ids])
    ww = np.array([[cache.d_ww[(a, b)] for b in ids] for a in ids])
    total = fw[P[:, 0]]
    for k in range(1, n):
        total = total + ww[P[:, k - 1], P[:, k]]
    total = total + wf[P[:, -1]]
    return float(total.min())

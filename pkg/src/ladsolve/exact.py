"""Exact vehicle-assignment solver: depth-first branch and bound over group assignments.

Every node assigns the next group (largest first) to a vehicle trip. A
vehicle's cost is always evaluated on the optimal visiting order of each of its
trips, so the search is exact over assignments. Bound: the partial cost plus,
for each unassigned group, the cheapest drone waiting cost any vehicle could
pay for it. That term is charged in full wherever the group lands and detours
are non-negative under the triangle inequality, so the bound never
overestimates. When the segment cache is not metric, partial routes are not
monotone and only capacity is used for pruning.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Mapping, Sequence

from sklearn.base import BaseEstimator

from .geo import EuclideanTravel
from .greedy import GreedySolver
from .model import Group, Scenario, Solution, Vehicle, VehicleUsage, check_scenario
from .segments import SegmentCache, precompute_segments
from .seqsolve import Tour, best_sequence, route_usage

_REL = 1e-12


class InfeasibleError(RuntimeError):
    """No assignment satisfies the constraints.

    ``kind`` is ``"budget"`` when resource-feasible assignments exist but all
    exceed the budget, else ``"resource"``.
    """

    def __init__(self, kind: str, message: str):
        self.kind = kind
        super().__init__(message)


@dataclass(frozen=True)
class RouteCost:
    usage: VehicleUsage | None
    sequences: tuple[tuple[str, ...], ...]
    feasible: bool
    reason: str | None = None

    @property
    def cost(self) -> float:
        return self.usage.cost if self.usage else 0.0


def resource_violation(v: Vehicle, trips: Sequence[Sequence[str]], usage: VehicleUsage,
                       groups: Mapping[str, Group]) -> str | None:
    """Capacity per trip, then fuel, then available time; ``None`` if all hold."""
    for trip in trips:
        if sum(groups[g].size for g in trip) > v.cap:
            return "capacity"
    if usage.fuel_used > v.f_avail:
        return "fuel"
    if usage.t_tot > v.t_avail:
        return "time"
    return None


class _Evaluator:
    """Memoized tours per group set and vehicle usage per trip set."""

    def __init__(self, scenario: Scenario, cache: SegmentCache):
        self.cache = cache
        self.groups = scenario.group_index()
        self.tours: dict[frozenset, Tour] = {}
        self.usages: dict[tuple[int, frozenset], tuple[VehicleUsage, tuple, str | None]] = {}
        self.all_exact = True

    def tour(self, trip: frozenset) -> Tour:
        t = self.tours.get(trip)
        if t is None:
            t = self.tours[trip] = best_sequence(self.cache, trip)
            self.all_exact &= t.exact
        return t

    def vehicle(self, vi: int, v: Vehicle, trips: frozenset):
        key = (vi, trips)
        hit = self.usages.get(key)
        if hit is None:
            ordered = sorted(trips, key=lambda t: tuple(sorted(t)))
            seqs = tuple(self.tour(t).sequence for t in ordered)
            usage = route_usage(v, seqs, self.cache, self.groups)
            hit = self.usages[key] = (usage, seqs, resource_violation(v, seqs, usage, self.groups))
        return hit


def vehicle_route_cost(v: Vehicle, groups: Sequence[str], cache: SegmentCache, scenario: Scenario) -> RouteCost:
    """Cost of serving ``groups`` in one trip on the best visiting order."""
    if not groups:
        return RouteCost(VehicleUsage(0.0, 0.0, 0.0, 0.0, 0.0), (), True)
    gi = scenario.group_index()
    seq = best_sequence(cache, groups).sequence
    usage = route_usage(v, [seq], cache, gi)
    reason = resource_violation(v, [seq], usage, gi)
    return RouteCost(usage, (seq,), reason is None, reason)


class _Timeout(Exception):
    pass


class _Search:
    def __init__(self, scenario, cache, ev, allow_reload, prune, budget, deadline, incumbent=None):
        self.s = scenario
        self.cache = cache
        self.ev = ev
        self.vehicles = scenario.vehicles
        self.allow_reload = allow_reload
        self.prune = prune
        self.budget = budget
        self.deadline = deadline
        self.metric = cache.metric
        self.order = sorted(scenario.groups, key=lambda g: (-g.size, g.id))
        n = len(self.order)
        wait_lb = [min(v.c_stop for v in self.vehicles) * g.t_delivery for g in self.order]
        self.tail_lb = [0.0] * (n + 1)
        for k in range(n - 1, -1, -1):
            self.tail_lb[k] = self.tail_lb[k + 1] + wait_lb[k]
        self.max_trips = [sum(1 for g in self.order if g.size <= v.cap) for v in self.vehicles]
        self.trips: list[list[frozenset]] = [[] for _ in self.vehicles]
        self.costs = [0.0] * len(self.vehicles)
        self.best = math.inf
        self.best_trips = None
        if incumbent is not None:
            self.best, self.best_trips = incumbent
        self.nodes = 0

    def total(self) -> float:
        total = 0.0
        for vi, trips in enumerate(self.trips):
            if trips:
                total += self.costs[vi]
        return total

    def leaf(self) -> None:
        if not self.metric:
            for vi, v in enumerate(self.vehicles):
                if self.trips[vi] and self.ev.vehicle(vi, v, frozenset(self.trips[vi]))[2]:
                    return
        total = self.total()
        if total <= self.budget and total < self.best:
            self.best = total
            self.best_trips = [list(t) for t in self.trips]

    def options(self, g: Group):
        out = []
        for vi, v in enumerate(self.vehicles):
            if g.size > v.cap:
                continue
            trips = self.trips[vi]
            slots = [(ti, t | {g.id}) for ti, t in enumerate(trips)
                     if sum(self.ev.groups[x].size for x in t) + g.size <= v.cap]
            if (self.allow_reload or not trips) and len(trips) < self.max_trips[vi]:
                slots.append((len(trips), frozenset([g.id])))
            for ti, new_trip in slots:
                new = trips[:ti] + [new_trip] + trips[ti + 1:]
                usage, _, bad = self.ev.vehicle(vi, v, frozenset(new))
                if bad and (self.metric or bad == "capacity"):
                    continue
                out.append((usage.cost - self.costs[vi], vi, ti, new, usage.cost))
        out.sort(key=lambda o: (o[0], o[1], o[2]))
        return out

    def run(self, k: int = 0, partial: float = 0.0) -> None:
        self.nodes += 1
        if self.nodes & 255 == 0 and time.perf_counter() > self.deadline:
            raise _Timeout
        if k == len(self.order):
            self.leaf()
            return
        if self.metric:
            if partial > self.budget * (1 + _REL) + _REL:
                return
            if self.prune and partial + self.tail_lb[k] > self.best * (1 + _REL) + _REL:
                return
        for delta, vi, ti, new, cost in self.options(self.order[k]):
            old_trips, old_cost = self.trips[vi], self.costs[vi]
            self.trips[vi], self.costs[vi] = new, cost
            self.run(k + 1, partial + delta)
            self.trips[vi], self.costs[vi] = old_trips, old_cost


class ExactSolver(BaseEstimator):
    """Branch-and-bound vehicle-assignment solver.

    Parameters
    ----------
    time_limit_s : float, default=300
        Wall-clock limit; on expiry the best incumbent is returned with
        ``time_limit_reached`` set.
    allow_reload : bool, default=False
        Let a vehicle run several depot-anchored trips sharing its fuel and
        time. Off matches the single-trip model.
    prune : bool, default=True
        Use the lower bound to cut subtrees. Feasibility pruning stays on.
    warm_start : bool, default=True
        Seed the incumbent with the greedy solution when it fits the model.

    Attributes
    ----------
    solution_ : Solution
    n_nodes_ : int
    runtime_ : float
    """

    def __init__(self, time_limit_s=300.0, allow_reload=False, prune=True, warm_start=True):
        self.time_limit_s = time_limit_s
        self.allow_reload = allow_reload
        self.prune = prune
        self.warm_start = warm_start

    def fit(self, scenario: Scenario, cache: SegmentCache | None = None, travel=None):
        t0 = time.perf_counter()
        check_scenario(scenario)
        if cache is None:
            cache = precompute_segments(scenario, travel or EuclideanTravel())
        deadline = t0 + self.time_limit_s
        ev = _Evaluator(scenario, cache)
        incumbent = self._warm_start(scenario, cache, ev) if self.warm_start else None

        search = _Search(scenario, cache, ev, self.allow_reload, self.prune, scenario.budget, deadline, incumbent)
        timed_out = False
        try:
            search.run()
        except _Timeout:
            timed_out = True
        self.n_nodes_ = search.nodes

        if search.best_trips is None:
            if timed_out:
                self.solution_ = self._empty(scenario, time_limit_reached=True)
                self.runtime_ = time.perf_counter() - t0
                return self
            probe = _Search(scenario, cache, ev, self.allow_reload, self.prune, math.inf,
                            time.perf_counter() + max(self.time_limit_s, 1.0))
            try:
                probe.run()
                found = probe.best_trips is not None
            except _Timeout:
                found = probe.best_trips is not None
            self.runtime_ = time.perf_counter() - t0
            if found:
                raise InfeasibleError("budget", f"every feasible assignment exceeds the budget {scenario.budget}")
            raise InfeasibleError("resource", "no assignment satisfies capacity, fuel and time limits")

        routes, per_vehicle = {}, {}
        total = 0.0
        for vi, v in enumerate(scenario.vehicles):
            trips = search.best_trips[vi]
            if not trips:
                continue
            usage, seqs, _ = ev.vehicle(vi, v, frozenset(trips))
            routes[v.id] = seqs
            per_vehicle[v.id] = usage
            total += usage.cost
        self.solution_ = Solution(
            routes=routes,
            per_vehicle=per_vehicle,
            total_cost=total,
            uncovered=frozenset(),
            algorithm="exact",
            time_limit_reached=timed_out,
            proven_optimal=not timed_out and ev.all_exact,
            info={"nodes": search.nodes, "allow_reload": self.allow_reload},
        )
        self.runtime_ = time.perf_counter() - t0
        return self

    def _warm_start(self, scenario, cache, ev):
        sol = GreedySolver().fit(scenario, cache).solution_
        if sol.uncovered:
            return None
        trips = []
        total = 0.0
        for vi, v in enumerate(scenario.vehicles):
            vt = [frozenset(t) for t in sol.routes.get(v.id, ())]
            if len(vt) > 1 and not self.allow_reload:
                return None
            trips.append(vt)
            if vt:
                usage, _, bad = ev.vehicle(vi, v, frozenset(vt))
                if bad:
                    return None
                total += usage.cost
        if total > scenario.budget:
            return None
        return total, trips

    @staticmethod
    def _empty(scenario: Scenario, time_limit_reached: bool) -> Solution:
        return Solution({}, {}, 0.0, frozenset(g.id for g in scenario.groups), "exact",
                        time_limit_reached=time_limit_reached)


def solve_exact(scenario: Scenario, cache: SegmentCache | None = None, time_limit_s: float = 300.0,
                allow_reload: bool = False, prune: bool = True) -> Solution:
    return ExactSolver(time_limit_s=time_limit_s, allow_reload=allow_reload, prune=prune).fit(
        scenario, cache).solution_

"""Tree-based greedy vehicle selection.

For every vehicle a tree of group visits is grown from the depot: children of
a node are the remaining groups that still fit the parcels left on board and
keep the vehicle within its fuel and time budget. Edge weights are per-parcel
partial costs; the vehicle's score is the cheapest root-to-terminal path. Each
round commits the best-scoring vehicle's path as one trip.
"""

from __future__ import annotations

import csv
import heapq
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from sklearn.base import BaseEstimator

from .model import Group, Scenario, Solution, Vehicle, VehicleUsage, check_scenario
from .geo import EuclideanTravel
from .segments import SegmentCache, precompute_segments
from .seqsolve import route_usage, trip_length, trip_time


@dataclass
class VehicleState:
    """Committed trips of one vehicle plus the route prefix sums they imply."""

    vehicle: Vehicle
    trips: list[tuple[str, ...]] = field(default_factory=list)
    usage: VehicleUsage | None = None
    # route_distance/route_time accumulators up to (not including) the home leg
    prefix_d: float = 0.0
    prefix_t: float = 0.0
    waits: list[float] = field(default_factory=list)

    @property
    def fresh(self) -> bool:
        return not self.trips

    @property
    def fuel_left(self) -> float:
        return self.vehicle.f_avail - (self.usage.fuel_used if self.usage else 0.0)


def _initial_state(v: Vehicle, cache: SegmentCache) -> VehicleState:
    return VehicleState(v, prefix_d=cache.d_vf[v.id], prefix_t=cache.t_vf[v.id])


@dataclass
class _Node:
    group: str | None
    remaining: int
    depth: int
    cost: float
    path: tuple[str, ...]
    trip_d: float  # depot -> ... -> this group, left to right
    trip_t: float
    waits: tuple[float, ...]


class _Expander:
    """Child generation shared by the materialized tree and the lazy search."""

    def __init__(self, state: VehicleState, remaining: Mapping[str, Group], cache: SegmentCache,
                 branch_limit: int | None):
        self.state = state
        self.v = state.vehicle
        self.groups = remaining
        self.cache = cache
        self.branch_limit = branch_limit
        if state.fresh:
            self.lead_in = {g: cache.d_vf[self.v.id] + cache.d_fw[g] for g in remaining}
        else:
            last = state.trips[-1][-1]
            self.lead_in = {g: cache.d_wf[last] + cache.d_fw[g] for g in remaining}

    def root(self) -> _Node:
        return _Node(None, self.v.cap, 0, 0.0, (), 0.0, 0.0, ())

    def weight(self, parent: _Node, g: Group) -> float:
        d = self.lead_in[g.id] if parent.group is None else self.cache.d_ww[(parent.group, g.id)]
        return (d * self.v.c_mob + g.t_delivery * self.v.c_stop) / g.size

    def feasible(self, trip_d: float, trip_t: float, last: str, waits: Sequence[float]) -> bool:
        v, st, c = self.v, self.state, self.cache
        # same accumulation order as seqsolve.route_usage
        d = st.prefix_d + (trip_d + c.d_wf[last]) + c.d_fv[v.id]
        t_wait = math.fsum([*st.waits, *waits])
        t = st.prefix_t + (v.t_load + (trip_t + c.t_wf[last])) + c.t_fv[v.id] + t_wait
        fuel = v.f_mob * d + v.f_stop * t_wait
        return fuel <= v.f_avail and t <= v.t_avail

    def children(self, node: _Node) -> list[_Node]:
        c = self.cache
        out = []
        for gid, g in self.groups.items():
            if g.size > node.remaining or gid in node.path:
                continue
            if node.group is None:
                trip_d, trip_t = c.d_fw[gid], c.t_fw[gid]
            else:
                trip_d = node.trip_d + c.d_ww[(node.group, gid)]
                trip_t = node.trip_t + c.t_ww[(node.group, gid)]
            waits = (*node.waits, g.t_delivery)
            if not self.feasible(trip_d, trip_t, gid, waits):
                continue
            w = self.weight(node, g)
            out.append((w, gid, _Node(gid, node.remaining - g.size, node.depth + 1, node.cost + w,
                                      (*node.path, gid), trip_d, trip_t, waits)))
        out.sort(key=lambda t: (t[0], t[1]))
        if self.branch_limit is not None:
            out = out[: self.branch_limit]
        return [n for _, _, n in out]


# -- materialized tree --------------------------------------------------------


@dataclass
class CostTree:
    """Explicit tree: node 0 is the depot root.

    ``nodes[i]`` is ``(group_id, remaining_parcels, depth)``; ``edges`` holds
    ``(parent, child, weight)``; ``terminals`` lists nodes without children.
    """

    vehicle: str
    nodes: list[tuple[str | None, int, int]]
    edges: list[tuple[int, int, float]]
    terminals: list[int]

    @property
    def empty(self) -> bool:
        return len(self.nodes) == 1


def build_tree(
    v: Vehicle,
    remaining: Sequence[str],
    cache: SegmentCache,
    scenario: Scenario,
    branch_limit: int | None = None,
    state: VehicleState | None = None,
) -> CostTree:
    groups = scenario.group_index()
    state = state or _initial_state(v, cache)
    exp = _Expander(state, {g: groups[g] for g in sorted(remaining)}, cache, branch_limit)
    root = exp.root()
    nodes = [(None, root.remaining, 0)]
    edges: list[tuple[int, int, float]] = []
    terminals: list[int] = []
    stack = [(0, root)]
    if state.fuel_left <= 0:
        return CostTree(v.id, nodes, edges, terminals)
    while stack:
        idx, node = stack.pop()
        kids = exp.children(node)
        if not kids and idx != 0:
            terminals.append(idx)
        for kid in kids:
            nodes.append((kid.group, kid.remaining, kid.depth))
            edges.append((idx, len(nodes) - 1, exp.weight(node, groups[kid.group])))
            stack.append((len(nodes) - 1, kid))
    terminals.sort()
    return CostTree(v.id, nodes, edges, terminals)


def tree_min_cost(t: CostTree) -> tuple[float, tuple[str, ...]]:
    """Cheapest root-to-terminal path.

    Ties go to the shorter path, then to the lexicographically smaller
    group sequence.
    """
    if t.empty:
        raise ValueError("empty tree")
    parent: dict[int, tuple[int, float]] = {c: (p, w) for p, c, w in t.edges}
    best = None
    for term in t.terminals:
        chain = []
        node = term
        while node != 0:
            chain.append(node)
            node = parent[node][0]
        chain.reverse()
        cost = 0.0
        for n in chain:
            cost += parent[n][1]
        path = tuple(t.nodes[n][0] for n in chain)
        key = (cost, len(path), path)
        if best is None or key < best:
            best = key
    return best[0], best[2]


def dump_tree(t: CostTree, path: str | Path) -> None:
    """Edge list CSV: ``parent,child,parent_group,child_group,remaining,weight``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["parent", "child", "parent_group", "child_group", "remaining", "weight"])
        for p, c, wt in t.edges:
            w.writerow([p, c, t.nodes[p][0] or "depot", t.nodes[c][0], t.nodes[c][1], repr(wt)])


# -- lazy search ----------------------------------------------------------------


def best_path(
    state: VehicleState,
    remaining: Mapping[str, Group],
    cache: SegmentCache,
    branch_limit: int | None,
    bound: float = math.inf,
) -> tuple[float, tuple[str, ...]] | None:
    """Same answer as ``tree_min_cost(build_tree(...))`` without building the tree.

    Best-first over ``(cost, depth, path)``: edge weights are non-negative, so
    the first terminal popped is the minimum. Returns ``None`` for an empty tree
    or when no terminal costs less than ``bound``.
    """
    if state.fuel_left <= 0:
        return None
    exp = _Expander(state, remaining, cache, branch_limit)
    heap = [(0.0, 0, (), exp.root())]
    while heap:
        cost, depth, path, node = heapq.heappop(heap)
        if cost >= bound:
            return None
        kids = exp.children(node)
        if not kids:
            return None if depth == 0 else (cost, path)
        for kid in kids:
            heapq.heappush(heap, (kid.cost, kid.depth, kid.path, kid))
    return None


def _commit(state: VehicleState, trip: tuple[str, ...], cache: SegmentCache, groups: Mapping[str, Group]) -> VehicleState:
    v = state.vehicle
    trips = [*state.trips, trip]
    usage = route_usage(v, trips, cache, groups)
    return VehicleState(
        v,
        trips,
        usage,
        prefix_d=state.prefix_d + trip_length(cache, trip),
        prefix_t=state.prefix_t + (v.t_load + trip_time(cache, trip)),
        waits=[*state.waits, *(groups[g].t_delivery for g in trip)],
    )


def _total(states: Sequence[VehicleState]) -> float:
    total = 0.0
    for st in states:
        if st.usage is not None:
            total += st.usage.cost
    return total


class GreedySolver(BaseEstimator):
    """Greedy vehicle-assignment solver.

    Parameters
    ----------
    branch_limit : int or None, default=4
        Children kept per tree node (cheapest edges first); ``None`` grows the
        full tree.

    Attributes
    ----------
    solution_ : Solution
    n_rounds_ : int
    runtime_ : float
        Wall-clock seconds spent in :meth:`fit`.
    """

    def __init__(self, branch_limit=4):
        self.branch_limit = branch_limit

    def fit(self, scenario: Scenario, cache: SegmentCache | None = None, travel=None):
        t0 = time.perf_counter()
        check_scenario(scenario)
        if self.branch_limit is not None and self.branch_limit < 1:
            raise ValueError(f"branch_limit must be >= 1 or None, got {self.branch_limit}")
        if cache is None:
            cache = precompute_segments(scenario, travel or EuclideanTravel())
        groups = scenario.group_index()
        remaining = dict(sorted(groups.items()))
        states = [_initial_state(v, cache) for v in scenario.vehicles]
        committed = 0.0
        self.n_rounds_ = 0
        self.halted_by_budget_ = False
        while remaining:
            best = None
            for i, st in enumerate(states):
                found = best_path(st, remaining, cache, self.branch_limit,
                                  bound=best[0] if best else math.inf)
                if found is not None and (best is None or found[0] < best[0]):
                    best = (found[0], i, found[1])
            if best is None:
                break
            _, i, path = best
            new_state = _commit(states[i], path, cache, groups)
            trial = [*states[:i], new_state, *states[i + 1:]]
            total = _total(trial)
            if total > scenario.budget:
                self.halted_by_budget_ = True
                break
            states, committed = trial, total
            for g in path:
                del remaining[g]
            self.n_rounds_ += 1

        routes = {st.vehicle.id: tuple(st.trips) for st in states if st.trips}
        per_vehicle = {st.vehicle.id: st.usage for st in states if st.trips}
        self.solution_ = Solution(
            routes=routes,
            per_vehicle=per_vehicle,
            total_cost=committed,
            uncovered=frozenset(remaining),
            algorithm="greedy",
            info={"rounds": self.n_rounds_, "branch_limit": self.branch_limit},
        )
        self.runtime_ = time.perf_counter() - t0
        return self


def solve_greedy(scenario: Scenario, cache: SegmentCache | None = None, branch_limit: int | None = 4) -> Solution:
    return GreedySolver(branch_limit=branch_limit).fit(scenario, cache).solution_

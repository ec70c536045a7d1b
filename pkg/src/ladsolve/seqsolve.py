"""Depot-anchored group sequencing and route totals.

A trip leaves the depot, visits its waiting locations in order and returns to
the depot. A vehicle's route is home -> depot, one or more trips, depot -> home.
All sums are accumulated left to right along the route, so two code paths that
walk the same route produce bit-identical totals.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping, NamedTuple, Sequence

from .model import Group, Vehicle, VehicleUsage
from .segments import SegmentCache

HELD_KARP_LIMIT = 12


class Tour(NamedTuple):
    sequence: tuple[str, ...]
    length: float
    exact: bool


def trip_length(cache: SegmentCache, seq: Sequence[str]) -> float:
    if not seq:
        return 0.0
    total = cache.d_fw[seq[0]]
    for a, b in zip(seq, seq[1:]):
        total += cache.d_ww[(a, b)]
    return total + cache.d_wf[seq[-1]]


def trip_time(cache: SegmentCache, seq: Sequence[str]) -> float:
    if not seq:
        return 0.0
    total = cache.t_fw[seq[0]]
    for a, b in zip(seq, seq[1:]):
        total += cache.t_ww[(a, b)]
    return total + cache.t_wf[seq[-1]]


def held_karp(cache: SegmentCache, ids: Sequence[str]) -> tuple[tuple[str, ...], float]:
    """Exact shortest depot tour over ``ids`` by subset dynamic programming."""
    n = len(ids)
    d_fw, d_wf, d_ww = cache.d_fw, cache.d_wf, cache.d_ww
    size = 1 << n
    cost = [[math.inf] * n for _ in range(size)]
    parent = [[-1] * n for _ in range(size)]
    for j in range(n):
        cost[1 << j][j] = d_fw[ids[j]]
    for mask in range(1, size):
        row = cost[mask]
        for j in range(n):
            if not mask >> j & 1:
                continue
            prev = mask ^ (1 << j)
            if prev == 0:
                continue
            prow = cost[prev]
            best, arg = math.inf, -1
            bj = ids[j]
            for i in range(n):
                if prev >> i & 1:
                    c = prow[i] + d_ww[(ids[i], bj)]
                    if c < best:
                        best, arg = c, i
            row[j] = best
            parent[mask][j] = arg
    full = size - 1
    best, last = math.inf, -1
    for j in range(n):
        c = cost[full][j] + d_wf[ids[j]]
        if c < best:
            best, last = c, j
    seq = []
    mask = full
    while last >= 0:
        seq.append(ids[last])
        last, mask = parent[mask][last], mask ^ (1 << last)
    fwd = tuple(reversed(seq))
    # symmetric tables tie a tour with its reversal; keep the smaller one
    back = fwd[::-1]
    if back < fwd and trip_length(cache, back) == best:
        return back, best
    return fwd, best


def nearest_neighbor_two_opt(cache: SegmentCache, ids: Sequence[str]) -> tuple[tuple[str, ...], float]:
    left = list(ids)
    seq: list[str] = []
    while left:
        if seq:
            here = seq[-1]
            nxt = min(left, key=lambda g: (cache.d_ww[(here, g)], g))
        else:
            nxt = min(left, key=lambda g: (cache.d_fw[g], g))
        seq.append(nxt)
        left.remove(nxt)
    best = trip_length(cache, seq)
    improved = True
    while improved:
        improved = False
        for i in range(len(seq) - 1):
            for k in range(i + 1, len(seq)):
                cand = seq[:i] + seq[i:k + 1][::-1] + seq[k + 1:]
                length = trip_length(cache, cand)
                if length < best:
                    seq, best, improved = cand, length, True
    return tuple(seq), best


def best_sequence(cache: SegmentCache, groups: Iterable[str]) -> Tour:
    """Shortest depot-to-depot visiting order for ``groups``.

    Exact (Held-Karp) up to ``HELD_KARP_LIMIT`` groups, nearest neighbour plus
    2-opt beyond. Ids are processed in sorted order; of two equally long
    orders the lexicographically smaller is preferred when they are mirror
    images, otherwise the first found is kept.
    """
    ids = sorted(set(groups))
    if not ids:
        raise ValueError("need at least one group to sequence")
    unknown = [g for g in ids if g not in cache.d_fw]
    if unknown:
        raise KeyError(f"unknown group id(s): {unknown}")
    if len(ids) == 1:
        return Tour((ids[0],), trip_length(cache, ids), True)
    if len(ids) <= HELD_KARP_LIMIT:
        seq, length = held_karp(cache, ids)
        return Tour(seq, length, True)
    seq, length = nearest_neighbor_two_opt(cache, ids)
    return Tour(seq, length, False)


def _check_trips(cache: SegmentCache, trips) -> None:
    for trip in trips:
        if not trip:
            raise ValueError("empty trip")
        for g in trip:
            if g not in cache.d_fw:
                raise KeyError(f"unknown group id {g!r}")


def route_distance(v: Vehicle, trips: Sequence[Sequence[str]], cache: SegmentCache) -> float:
    if not trips:
        return 0.0
    _check_trips(cache, trips)
    total = cache.d_vf[v.id]
    for trip in trips:
        total += trip_length(cache, trip)
    return total + cache.d_fv[v.id]


def route_time(
    v: Vehicle, trips: Sequence[Sequence[str]], cache: SegmentCache, groups: Mapping[str, Group]
) -> dict[str, float]:
    """Total time and drone waiting time; loading is charged once per trip."""
    if not trips:
        return {"t_tot": 0.0, "t_wait": 0.0}
    _check_trips(cache, trips)
    # order-free sum: equal-length sequences must give identical waiting time
    t_wait = math.fsum(groups[g].t_delivery for trip in trips for g in trip)
    total = cache.t_vf[v.id]
    for trip in trips:
        total += v.t_load + trip_time(cache, trip)
    total += cache.t_fv[v.id]
    return {"t_tot": total + t_wait, "t_wait": t_wait}


def route_usage(
    v: Vehicle, trips: Sequence[Sequence[str]], cache: SegmentCache, groups: Mapping[str, Group]
) -> VehicleUsage:
    d = route_distance(v, trips, cache)
    times = route_time(v, trips, cache, groups)
    t_wait = times["t_wait"]
    return VehicleUsage(
        d_tot=d,
        t_wait=t_wait,
        t_tot=times["t_tot"],
        fuel_used=v.f_mob * d + v.f_stop * t_wait,
        cost=v.c_mob * d + v.c_stop * t_wait,
    )

"""Precomputed distance/time segments among depot, waiting locations and homes."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geo import MatrixTravel, TravelError, TravelModel, write_matrix_csv
from .model import Point, Scenario

DEPOT_ID = "@depot"


@dataclass(frozen=True)
class SegmentCache:
    """Id-keyed segment tables.

    ``d_vf``/``d_fv`` hold vehicle-home legs, ``d_fw``/``d_wf`` depot legs per
    group, ``d_ww`` group-to-group legs; ``t_*`` are the matching times. Both
    directions are stored so asymmetric providers are represented faithfully.
    """

    d_vf: dict
    d_fv: dict
    d_fw: dict
    d_wf: dict
    d_ww: dict
    t_vf: dict
    t_fv: dict
    t_fw: dict
    t_wf: dict
    t_ww: dict
    metric: bool = True

    @property
    def group_ids(self) -> list[str]:
        return list(self.d_fw)


def _checked(fn, a: Point, b: Point, ids: tuple[str, str]) -> float:
    try:
        return fn(a, b)
    except TravelError as exc:
        raise TravelError(f"segment {ids[0]} -> {ids[1]}: {exc}") from exc


def precompute_segments(s: Scenario, m: TravelModel) -> SegmentCache:
    depot = s.depot
    m.prepare([depot, *(g.waiting_location for g in s.groups), *(v.home for v in s.vehicles)])
    tables = {k: {} for k in ("d_vf", "d_fv", "d_fw", "d_wf", "d_ww", "t_vf", "t_fv", "t_fw", "t_wf", "t_ww")}
    for v in s.vehicles:
        ids = (v.id, DEPOT_ID)
        tables["d_vf"][v.id] = _checked(m.distance, v.home, depot, ids)
        tables["t_vf"][v.id] = _checked(m.travel_time, v.home, depot, ids)
        tables["d_fv"][v.id] = _checked(m.distance, depot, v.home, ids[::-1])
        tables["t_fv"][v.id] = _checked(m.travel_time, depot, v.home, ids[::-1])
    for g in s.groups:
        w = g.waiting_location
        tables["d_fw"][g.id] = _checked(m.distance, depot, w, (DEPOT_ID, g.id))
        tables["t_fw"][g.id] = _checked(m.travel_time, depot, w, (DEPOT_ID, g.id))
        tables["d_wf"][g.id] = _checked(m.distance, w, depot, (g.id, DEPOT_ID))
        tables["t_wf"][g.id] = _checked(m.travel_time, w, depot, (g.id, DEPOT_ID))
    for a in s.groups:
        for b in s.groups:
            key = (a.id, b.id)
            if a.id == b.id:
                tables["d_ww"][key] = 0.0
                tables["t_ww"][key] = 0.0
                continue
            tables["d_ww"][key] = _checked(m.distance, a.waiting_location, b.waiting_location, key)
            tables["t_ww"][key] = _checked(m.travel_time, a.waiting_location, b.waiting_location, key)
    return SegmentCache(**tables, metric=_is_metric(tables["d_fw"], tables["d_wf"], tables["d_ww"]))


def _is_metric(d_fw: dict, d_wf: dict, d_ww: dict, tol: float = 1e-9) -> bool:
    """Triangle inequality over depot + waiting locations.

    Solvers only prune on partial routes when this holds, since otherwise a
    longer visit set can produce a shorter tour.
    """
    ids = list(d_fw)
    n = len(ids) + 1
    D = np.zeros((n, n))
    for i, a in enumerate(ids, 1):
        D[0, i] = d_fw[a]
        D[i, 0] = d_wf[a]
        for j, b in enumerate(ids, 1):
            D[i, j] = d_ww[(a, b)]
    via = (D[:, :, None] + D[None, :, :]).min(axis=1)
    return bool(np.all(D <= via + tol * np.maximum(1.0, D)))


def dump_segments(cache: SegmentCache, s: Scenario, path: str | Path) -> None:
    """Write the cache in the matrix CSV layout (vehicle-group cells stay empty)."""
    sites = [(DEPOT_ID, s.depot)]
    sites += [(g.id, g.waiting_location) for g in s.groups]
    sites += [(v.id, v.home) for v in s.vehicles]
    dist, dur = {}, {}
    for v in s.vehicles:
        dist[(v.id, DEPOT_ID)], dur[(v.id, DEPOT_ID)] = cache.d_vf[v.id], cache.t_vf[v.id]
        dist[(DEPOT_ID, v.id)], dur[(DEPOT_ID, v.id)] = cache.d_fv[v.id], cache.t_fv[v.id]
    for g in s.groups:
        dist[(DEPOT_ID, g.id)], dur[(DEPOT_ID, g.id)] = cache.d_fw[g.id], cache.t_fw[g.id]
        dist[(g.id, DEPOT_ID)], dur[(g.id, DEPOT_ID)] = cache.d_wf[g.id], cache.t_wf[g.id]
    for key in cache.d_ww:
        dist[key], dur[key] = cache.d_ww[key], cache.t_ww[key]
    for sid, _ in sites:
        dist[(sid, sid)] = dur[(sid, sid)] = 0.0
    write_matrix_csv(path, sites, dist, dur)


def load_segments(s: Scenario, path: str | Path) -> SegmentCache:
    return precompute_segments(s, MatrixTravel(path))

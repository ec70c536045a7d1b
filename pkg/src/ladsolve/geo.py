"""Travel providers: road distance (km) and travel time (s) between points.

Three providers share one small interface (``distance``, ``travel_time`` and
an optional batched ``prepare``):

* :class:`EuclideanTravel` scales straight-line distance by a circuity factor.
* :class:`MatrixTravel` looks values up in a CSV matrix file.
* :class:`HttpTableTravel` asks a routing "table" service for full matrices.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import threading
import time
import urllib.error
import urllib.request
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .model import Point

logger = logging.getLogger(__name__)

PROVIDERS = ("euclidean", "matrix", "http")


class TravelError(RuntimeError):
    """A provider could not answer (unknown site, transport or protocol failure)."""


class TravelModel:
    provider = "abstract"
    symmetric = False

    def distance(self, a: Point, b: Point) -> float:
        raise NotImplementedError

    def travel_time(self, a: Point, b: Point) -> float:
        raise NotImplementedError

    def prepare(self, sites: Iterable[Point]) -> None:
        """Hint the full site list up front; providers may batch lookups."""


class EuclideanTravel(TravelModel):
    provider = "euclidean"
    symmetric = True

    def __init__(self, circuity: float = 1.3, vehicle_speed: float = 40.0):
        if not circuity >= 1.0:
            raise ValueError(f"circuity must be >= 1, got {circuity}")
        if not vehicle_speed > 0:
            raise ValueError(f"vehicle_speed must be > 0 km/h, got {vehicle_speed}")
        self.circuity = float(circuity)
        self.vehicle_speed = float(vehicle_speed)

    def __repr__(self) -> str:
        return f"EuclideanTravel(circuity={self.circuity}, vehicle_speed={self.vehicle_speed})"

    def distance(self, a: Point, b: Point) -> float:
        if a == b:
            return 0.0
        return self.circuity * math.hypot(a.x - b.x, a.y - b.y)

    def travel_time(self, a: Point, b: Point) -> float:
        return self.distance(a, b) * 3600.0 / self.vehicle_speed


# -- matrix files -------------------------------------------------------------
#
# Layout: two blocks, each introduced by a ``block,<name>`` row, where name is
# ``distances_km`` then ``durations_s``. Each block has a header row
# ``site,x,y,<id_1>,...,<id_n>`` followed by one row per site
# ``<id_i>,<x_i>,<y_i>,<value_i1>,...,<value_in>``. Empty cells mean "unknown".

_BLOCKS = ("distances_km", "durations_s")


def write_matrix_csv(
    path: str | Path,
    sites: Sequence[tuple[str, Point]],
    distances: Mapping[tuple[str, str], float],
    durations: Mapping[tuple[str, str], float],
) -> None:
    ids = [sid for sid, _ in sites]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for name, table in zip(_BLOCKS, (distances, durations)):
            w.writerow(["block", name])
            w.writerow(["site", "x", "y", *ids])
            for sid, p in sites:
                cells = [repr(table[(sid, o)]) if (sid, o) in table else "" for o in ids]
                w.writerow([sid, repr(p.x), repr(p.y), *cells])


def read_matrix_csv(path: str | Path):
    """Return ``(sites, distances, durations)`` as written by :func:`write_matrix_csv`."""
    sites: dict[str, Point] = {}
    tables: dict[str, dict[tuple[str, str], float]] = {}
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    i = 0
    while i < len(rows):
        row = rows[i]
        if not row:
            i += 1
            continue
        if row[0] != "block" or len(row) < 2 or row[1] not in _BLOCKS:
            raise TravelError(f"{path}: line {i + 1}: expected 'block,<distances_km|durations_s>'")
        name = row[1]
        header = rows[i + 1] if i + 1 < len(rows) else []
        if header[:3] != ["site", "x", "y"]:
            raise TravelError(f"{path}: line {i + 2}: expected header 'site,x,y,...'")
        ids = header[3:]
        table: dict[tuple[str, str], float] = {}
        for k, line in enumerate(rows[i + 2: i + 2 + len(ids)]):
            if len(line) != len(ids) + 3:
                raise TravelError(f"{path}: line {i + 3 + k}: expected {len(ids) + 3} cells")
            sid = line[0]
            sites.setdefault(sid, Point(float(line[1]), float(line[2])))
            for other, cell in zip(ids, line[3:]):
                if cell != "":
                    table[(sid, other)] = float(cell)
        tables[name] = table
        i += 2 + len(ids)
    missing = [b for b in _BLOCKS if b not in tables]
    if missing:
        raise TravelError(f"{path}: missing block(s) {missing}")
    return sites, tables["distances_km"], tables["durations_s"]


class MatrixTravel(TravelModel):
    provider = "matrix"

    def __init__(self, matrix_source: str | Path):
        if not matrix_source:
            raise ValueError("matrix provider requires matrix_source")
        self.matrix_source = str(matrix_source)
        sites, self._dist, self._dur = read_matrix_csv(matrix_source)
        self._site_of: dict[Point, str] = {}
        for sid, p in sites.items():
            self._site_of.setdefault(p, sid)
        self.symmetric = all(self._dist.get((b, a)) == d for (a, b), d in self._dist.items())

    def __repr__(self) -> str:
        return f"MatrixTravel({self.matrix_source!r})"

    def _lookup(self, table, a: Point, b: Point, what: str) -> float:
        try:
            ia, ib = self._site_of[a], self._site_of[b]
        except KeyError as exc:
            raise TravelError(f"unknown site {exc.args[0]} in {self.matrix_source}") from None
        if ia == ib:
            return 0.0
        try:
            return table[(ia, ib)]
        except KeyError:
            raise TravelError(f"no {what} entry for ({ia}, {ib}) in {self.matrix_source}") from None

    def distance(self, a: Point, b: Point) -> float:
        return self._lookup(self._dist, a, b, "distance")

    def travel_time(self, a: Point, b: Point) -> float:
        return self._lookup(self._dur, a, b, "duration")


class HttpTableTravel(TravelModel):
    """Client for a routing table service.

    Request: ``POST {"sites": [[x, y], ...]}``; response:
    ``{"distances_km": [[...]], "durations_s": [[...]]}``. Failed requests are
    retried at most twice, then raised as :class:`TravelError`.
    """

    provider = "http"

    def __init__(self, endpoint: str, timeout: float = 30.0, retries: int = 2, backoff: float = 0.2):
        if not endpoint:
            raise ValueError("http provider requires endpoint")
        self.endpoint = endpoint
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self.n_requests = 0
        self._cache: dict[tuple[Point, Point], tuple[float, float]] = {}
        self._lock = threading.Lock()

    def __repr__(self) -> str:
        return f"HttpTableTravel({self.endpoint!r})"

    # Locks do not pickle; bench workers each get a fresh one.
    def __getstate__(self):
        state = self.__dict__.copy()
        del state["_lock"]
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._lock = threading.Lock()

    def _post(self, sites: list[Point]) -> dict:
        body = json.dumps({"sites": [[p.x, p.y] for p in sites]}).encode()
        req = urllib.request.Request(
            self.endpoint, data=body, headers={"Content-Type": "application/json"}, method="POST"
        )
        last: Exception | None = None
        for attempt in range(self.retries + 1):
            self.n_requests += 1
            try:
                with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                    return json.load(resp)
            except (urllib.error.URLError, OSError, ValueError) as exc:
                last = exc
                logger.warning("table request to %s failed (attempt %d): %s", self.endpoint, attempt + 1, exc)
                if attempt < self.retries:
                    time.sleep(self.backoff * (attempt + 1))
        raise TravelError(f"table request to {self.endpoint} failed: {last}")

    def prepare(self, sites: Iterable[Point]) -> None:
        uniq = list(dict.fromkeys(sites))
        with self._lock:
            if all((a, b) in self._cache for a in uniq for b in uniq):
                return
            doc = self._post(uniq)
            try:
                dist, dur = doc["distances_km"], doc["durations_s"]
                n = len(uniq)
                if len(dist) != n or len(dur) != n or any(len(r) != n for r in (*dist, *dur)):
                    raise ValueError(f"expected {n}x{n} matrices")
                for i, a in enumerate(uniq):
                    for j, b in enumerate(uniq):
                        self._cache[(a, b)] = (float(dist[i][j]), float(dur[i][j]))
            except (KeyError, TypeError, ValueError) as exc:
                raise TravelError(f"malformed table response from {self.endpoint}: {exc}") from exc

    def _entry(self, a: Point, b: Point) -> tuple[float, float]:
        if a == b:
            return (0.0, 0.0)
        with self._lock:
            hit = self._cache.get((a, b))
        if hit is None:
            self.prepare([a, b])
            with self._lock:
                hit = self._cache[(a, b)]
        return hit

    def distance(self, a: Point, b: Point) -> float:
        return self._entry(a, b)[0]

    def travel_time(self, a: Point, b: Point) -> float:
        return self._entry(a, b)[1]


def make_travel_model(
    provider: str = "euclidean",
    circuity: float = 1.3,
    vehicle_speed: float = 40.0,
    matrix_source: str | Path | None = None,
    endpoint: str | None = None,
) -> TravelModel:
    if provider == "euclidean":
        return EuclideanTravel(circuity, vehicle_speed)
    if provider == "matrix":
        return MatrixTravel(matrix_source)
    if provider in ("http", "http_table"):
        return HttpTableTravel(endpoint)
    raise ValueError(f"unknown travel provider {provider!r}; expected one of {PROVIDERS}")


def distance(m: TravelModel, a: Point, b: Point) -> float:
    return m.distance(a, b)


def travel_time(m: TravelModel, a: Point, b: Point) -> float:
    return m.travel_time(a, b)

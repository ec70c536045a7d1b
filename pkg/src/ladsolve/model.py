"""Domain types for delivery scenarios and solutions, plus their JSON documents.

Units everywhere: kilometers, seconds, USD, gallons.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping


class ScenarioError(ValueError):
    """Raised when a scenario document cannot be parsed or fails validation."""

    def __init__(self, violations: list[str] | str):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class VehicleType(str, Enum):
    TYPE1 = "type1"
    TYPE2 = "type2"
    TYPE3 = "type3"
    CUSTOM = "custom"


@dataclass(frozen=True, slots=True)
class Point:
    x: float
    y: float

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True, slots=True)
class Vehicle:
    id: str
    home: Point
    c_mob: float
    c_stop: float
    cap: int
    t_avail: float
    f_avail: float
    f_mob: float
    f_stop: float
    t_load: float = 600.0
    n_drones: int = 3
    type_tag: VehicleType = VehicleType.CUSTOM


@dataclass(frozen=True, slots=True)
class Customer:
    id: str
    position: Point


@dataclass(frozen=True, slots=True)
class Group:
    id: str
    members: tuple[str, ...]
    waiting_location: Point
    t_delivery: float

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True, slots=True)
class DroneSpec:
    speed_kmh: float = 50.0
    range_km: float = 5.0
    service_time_s: float = 60.0


@dataclass(frozen=True)
class Scenario:
    depot: Point
    vehicles: tuple[Vehicle, ...]
    customers: tuple[Customer, ...]
    groups: tuple[Group, ...] = ()
    budget: float = 2995.0
    drone: DroneSpec = field(default_factory=DroneSpec)

    def group_index(self) -> dict[str, Group]:
        return {g.id: g for g in self.groups}

    def vehicle_index(self) -> dict[str, Vehicle]:
        return {v.id: v for v in self.vehicles}

    def customer_index(self) -> dict[str, Customer]:
        return {c.id: c for c in self.customers}

    def with_groups(self, groups: Iterable[Group]) -> "Scenario":
        return Scenario(self.depot, self.vehicles, self.customers, tuple(groups), self.budget, self.drone)

    def with_vehicles(self, vehicles: Iterable[Vehicle]) -> "Scenario":
        return Scenario(self.depot, tuple(vehicles), self.customers, self.groups, self.budget, self.drone)


@dataclass(frozen=True, slots=True)
class VehicleUsage:
    d_tot: float
    t_wait: float
    t_tot: float
    fuel_used: float
    cost: float


@dataclass(frozen=True)
class Solution:
    """Per-vehicle trips (each trip an ordered list of group ids) with costs.

    ``routes`` and ``per_vehicle`` only hold participating vehicles.
    """

    routes: Mapping[str, tuple[tuple[str, ...], ...]]
    per_vehicle: Mapping[str, VehicleUsage]
    total_cost: float
    uncovered: frozenset[str]
    algorithm: str
    time_limit_reached: bool = False
    proven_optimal: bool = False
    info: Mapping[str, Any] = field(default_factory=dict)

    @property
    def n_participating(self) -> int:
        return len(self.routes)

    @property
    def covers_all(self) -> bool:
        return not self.uncovered

    def covered_groups(self) -> list[str]:
        return [g for trips in self.routes.values() for trip in trips for g in trip]


# -- validation ---------------------------------------------------------------


def _finite(x: Any) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def validate_scenario(s: Scenario) -> list[str]:
    """Return every invariant violation in ``s``; an empty list means valid."""
    out: list[str] = []
    for label, p in [("depot", s.depot)]:
        if not (_finite(p.x) and _finite(p.y)):
            out.append(f"{label}: non-finite coordinates")
    if not _finite(s.budget) or s.budget < 0:
        out.append(f"budget: must be finite and >= 0, got {s.budget!r}")
    d = s.drone
    if not _finite(d.speed_kmh) or d.speed_kmh <= 0:
        out.append(f"drone.speed_kmh: must be > 0, got {d.speed_kmh!r}")
    if not _finite(d.range_km) or d.range_km <= 0:
        out.append(f"drone.range_km: must be > 0, got {d.range_km!r}")
    if not _finite(d.service_time_s) or d.service_time_s < 0:
        out.append(f"drone.service_time_s: must be >= 0, got {d.service_time_s!r}")

    seen: set[str] = set()
    for v in s.vehicles:
        where = f"vehicle {v.id!r}"
        if v.id in seen:
            out.append(f"{where}: duplicate id")
        seen.add(v.id)
        if not (_finite(v.home.x) and _finite(v.home.y)):
            out.append(f"{where}: non-finite home")
        for name in ("c_mob", "c_stop", "t_avail", "f_avail", "f_mob", "f_stop", "t_load"):
            val = getattr(v, name)
            if not _finite(val) or val < 0:
                out.append(f"{where}: {name} must be finite and >= 0, got {val!r}")
        if not isinstance(v.cap, int) or isinstance(v.cap, bool) or v.cap < 1:
            out.append(f"{where}: cap must be an integer >= 1, got {v.cap!r}")
        if not isinstance(v.n_drones, int) or isinstance(v.n_drones, bool) or v.n_drones < 1:
            out.append(f"{where}: n_drones must be an integer >= 1, got {v.n_drones!r}")

    cust_ids: set[str] = set()
    for c in s.customers:
        if c.id in cust_ids:
            out.append(f"customer {c.id!r}: duplicate id")
        cust_ids.add(c.id)
        if not (_finite(c.position.x) and _finite(c.position.y)):
            out.append(f"customer {c.id!r}: non-finite position")

    owner: dict[str, str] = {}
    group_ids: set[str] = set()
    for g in s.groups:
        where = f"group {g.id!r}"
        if g.id in group_ids:
            out.append(f"{where}: duplicate id")
        group_ids.add(g.id)
        if not g.members:
            out.append(f"{where}: members must be non-empty")
        if not _finite(g.t_delivery) or g.t_delivery < 0:
            out.append(f"{where}: t_delivery must be finite and >= 0, got {g.t_delivery!r}")
        if not (_finite(g.waiting_location.x) and _finite(g.waiting_location.y)):
            out.append(f"{where}: non-finite waiting_location")
        for m in g.members:
            if m not in cust_ids:
                out.append(f"{where}: unknown customer id {m!r}")
            elif m in owner:
                out.append(f"customer {m!r} appears in groups {owner[m]!r} and {g.id!r}")
            else:
                owner[m] = g.id
    if s.groups:
        missing = sorted(cust_ids - owner.keys())
        if missing:
            out.append(f"customers not in any group: {', '.join(missing)}")
    return out


def check_scenario(s: Scenario, require_groups: bool = True) -> Scenario:
    """Raise :class:`ScenarioError` unless ``s`` is valid (and grouped)."""
    problems = validate_scenario(s)
    if require_groups and not s.groups:
        problems.append("scenario has no groups; run grouping first")
    if problems:
        raise ScenarioError(problems)
    return s


# -- JSON documents -----------------------------------------------------------

_TOP_KEYS = {"depot", "budget_usd", "drone", "vehicles", "customers", "groups"}
_REQUIRED_TOP = {"depot", "budget_usd", "vehicles", "customers"}
_DRONE_KEYS = {"speed_kmh", "range_km", "service_time_s"}
_VEHICLE_KEYS = {
    "id", "home", "type", "c_mob", "c_stop", "cap", "t_avail", "f_avail",
    "f_mob", "f_stop", "t_load", "n_drones",
}
_VEHICLE_OPTIONAL = {"type", "t_load", "n_drones"}
_CUSTOMER_KEYS = {"id", "x", "y"}
_GROUP_KEYS = {"id", "members", "waiting_location", "t_delivery"}


class _Reader:
    """Collects field errors with their JSON path instead of failing on the first."""

    def __init__(self) -> None:
        self.errors: list[str] = []

    def obj(self, raw: Any, path: str, allowed: set[str], required: set[str]) -> dict | None:
        if not isinstance(raw, dict):
            self.errors.append(f"{path}: expected an object")
            return None
        for k in sorted(raw.keys() - allowed):
            self.errors.append(f"{path}.{k}: unknown field")
        for k in sorted(required - raw.keys()):
            self.errors.append(f"{path}.{k}: missing field")
        return raw

    def num(self, raw: dict, key: str, path: str, default: Any = None) -> float:
        val = raw.get(key, default)
        if not _finite(val):
            self.errors.append(f"{path}.{key}: expected a finite number, got {val!r}")
            return math.nan
        return val

    def integer(self, raw: dict, key: str, path: str, default: Any = None) -> int:
        val = raw.get(key, default)
        if not isinstance(val, int) or isinstance(val, bool):
            self.errors.append(f"{path}.{key}: expected an integer, got {val!r}")
            return 0
        return val

    def string(self, raw: dict, key: str, path: str) -> str:
        val = raw.get(key)
        if not isinstance(val, str) or not val:
            self.errors.append(f"{path}.{key}: expected a non-empty string, got {val!r}")
            return ""
        return val

    def point(self, raw: Any, path: str) -> Point:
        d = self.obj(raw, path, {"x", "y"}, {"x", "y"})
        if d is None:
            return Point(math.nan, math.nan)
        return Point(self.num(d, "x", path), self.num(d, "y", path))


def scenario_from_dict(doc: Any) -> Scenario:
    """Build a :class:`Scenario` from a parsed document; raises ScenarioError."""
    r = _Reader()
    top = r.obj(doc, "$", _TOP_KEYS, _REQUIRED_TOP)
    if top is None:
        raise ScenarioError(r.errors)
    depot = r.point(top.get("depot"), "$.depot")
    budget = r.num(top, "budget_usd", "$")

    drone = DroneSpec()
    if "drone" in top:
        dd = r.obj(top["drone"], "$.drone", _DRONE_KEYS, set())
        if dd is not None:
            drone = DroneSpec(
                speed_kmh=r.num(dd, "speed_kmh", "$.drone", drone.speed_kmh),
                range_km=r.num(dd, "range_km", "$.drone", drone.range_km),
                service_time_s=r.num(dd, "service_time_s", "$.drone", drone.service_time_s),
            )

    vehicles = []
    for i, raw in enumerate(_as_list(top.get("vehicles"), "$.vehicles", r)):
        path = f"$.vehicles[{i}]"
        vd = r.obj(raw, path, _VEHICLE_KEYS, _VEHICLE_KEYS - _VEHICLE_OPTIONAL)
        if vd is None:
            continue
        try:
            tag = VehicleType(vd.get("type", "custom"))
        except ValueError:
            r.errors.append(f"{path}.type: unknown vehicle type {vd.get('type')!r}")
            tag = VehicleType.CUSTOM
        vehicles.append(Vehicle(
            id=r.string(vd, "id", path),
            home=r.point(vd.get("home"), f"{path}.home"),
            c_mob=r.num(vd, "c_mob", path),
            c_stop=r.num(vd, "c_stop", path),
            cap=r.integer(vd, "cap", path),
            t_avail=r.num(vd, "t_avail", path),
            f_avail=r.num(vd, "f_avail", path),
            f_mob=r.num(vd, "f_mob", path),
            f_stop=r.num(vd, "f_stop", path),
            t_load=r.num(vd, "t_load", path, 600.0),
            n_drones=r.integer(vd, "n_drones", path, 3),
            type_tag=tag,
        ))

    customers = []
    for i, raw in enumerate(_as_list(top.get("customers"), "$.customers", r)):
        path = f"$.customers[{i}]"
        cd = r.obj(raw, path, _CUSTOMER_KEYS, _CUSTOMER_KEYS)
        if cd is None:
            continue
        customers.append(Customer(r.string(cd, "id", path), Point(r.num(cd, "x", path), r.num(cd, "y", path))))

    groups = []
    for i, raw in enumerate(_as_list(top.get("groups", []), "$.groups", r)):
        path = f"$.groups[{i}]"
        gd = r.obj(raw, path, _GROUP_KEYS, _GROUP_KEYS)
        if gd is None:
            continue
        members = gd.get("members")
        if not isinstance(members, list) or not all(isinstance(m, str) for m in members):
            r.errors.append(f"{path}.members: expected a list of customer ids")
            members = []
        groups.append(Group(
            id=r.string(gd, "id", path),
            members=tuple(members),
            waiting_location=r.point(gd.get("waiting_location"), f"{path}.waiting_location"),
            t_delivery=r.num(gd, "t_delivery", path),
        ))

    if r.errors:
        raise ScenarioError(r.errors)
    s = Scenario(depot, tuple(vehicles), tuple(customers), tuple(groups), budget, drone)
    check_scenario(s, require_groups=False)
    return s


def _as_list(raw: Any, path: str, r: _Reader) -> list:
    if not isinstance(raw, list):
        r.errors.append(f"{path}: expected a list")
        return []
    return raw


def _point_dict(p: Point) -> dict:
    return {"x": p.x, "y": p.y}


def scenario_to_dict(s: Scenario) -> dict:
    doc: dict[str, Any] = {
        "depot": _point_dict(s.depot),
        "budget_usd": s.budget,
        "drone": {
            "speed_kmh": s.drone.speed_kmh,
            "range_km": s.drone.range_km,
            "service_time_s": s.drone.service_time_s,
        },
        "vehicles": [
            {
                "id": v.id,
                "home": _point_dict(v.home),
                "type": v.type_tag.value,
                "c_mob": v.c_mob,
                "c_stop": v.c_stop,
                "cap": v.cap,
                "t_avail": v.t_avail,
                "f_avail": v.f_avail,
                "f_mob": v.f_mob,
                "f_stop": v.f_stop,
                "t_load": v.t_load,
                "n_drones": v.n_drones,
            }
            for v in s.vehicles
        ],
        "customers": [{"id": c.id, "x": c.position.x, "y": c.position.y} for c in s.customers],
    }
    if s.groups:
        doc["groups"] = [
            {
                "id": g.id,
                "members": list(g.members),
                "waiting_location": _point_dict(g.waiting_location),
                "t_delivery": g.t_delivery,
            }
            for g in s.groups
        ]
    return doc


def load_scenario(path: str | Path) -> Scenario:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return scenario_from_dict(doc)


def dumps_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=2) + "\n"


def save_scenario(s: Scenario, path: str | Path) -> None:
    Path(path).write_text(dumps_scenario(s))


def config_hash(config: Mapping[str, Any]) -> str:
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def solution_to_dict(sol: Solution, provenance: Mapping[str, Any] | None = None) -> dict:
    vehicles = sorted(sol.routes)
    doc = {
        "algorithm": sol.algorithm,
        "total_cost": sol.total_cost,
        "uncovered": sorted(sol.uncovered),
        "time_limit_reached": sol.time_limit_reached,
        "proven_optimal": sol.proven_optimal,
        "routes": {v: [list(t) for t in sol.routes[v]] for v in vehicles},
        "per_vehicle": {
            v: {
                "d_tot": u.d_tot,
                "t_wait": u.t_wait,
                "t_tot": u.t_tot,
                "fuel_used": u.fuel_used,
                "cost": u.cost,
            }
            for v, u in sorted(sol.per_vehicle.items())
        },
    }
    if provenance is not None:
        doc["provenance"] = dict(provenance)
    return doc


def solution_from_dict(doc: Mapping[str, Any]) -> Solution:
    return Solution(
        routes={v: tuple(tuple(t) for t in trips) for v, trips in doc["routes"].items()},
        per_vehicle={v: VehicleUsage(**u) for v, u in doc["per_vehicle"].items()},
        total_cost=doc["total_cost"],
        uncovered=frozenset(doc["uncovered"]),
        algorithm=doc["algorithm"],
        time_limit_reached=doc.get("time_limit_reached", False),
        proven_optimal=doc.get("proven_optimal", False),
    )


def save_solution(sol: Solution, path: str | Path, provenance: Mapping[str, Any] | None = None) -> None:
    Path(path).write_text(json.dumps(solution_to_dict(sol, provenance), indent=2) + "\n")

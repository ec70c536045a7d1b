"""CPLEX-LP export of the single-trip assignment model, and a checker for
solutions coming back from external MILP solvers.

Variables (``i`` vehicle index, ``j``/``a``/``b`` group indices, 0 = depot;
indices are 1-based positions in the scenario lists and listed in the file
header):

* ``x_i_j``  binary, vehicle i serves group j
* ``z_i``    binary, vehicle i participates
* ``y_i_a_b`` binary, vehicle i drives from node a to node b
* ``u_i_j``  continuous in [1, n], visiting order (subtour elimination)
* ``w_i``    continuous, drone waiting time of vehicle i

Row names: ``cover_j``, ``budget``, ``cap_i``, ``fuel_i``, ``time_i``,
``wait_i``, and the routing rows ``out_i_a``, ``in_i_b``, ``link_i_j``,
``mtz_i_a_b``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .exact import vehicle_route_cost
from .model import Scenario, Solution, check_scenario
from .segments import SegmentCache
from .seqsolve import route_usage

_OPS = ("<=", ">=", "=")


def _fmt(c: float) -> str:
    return repr(float(c))


def _expr(terms: list[tuple[float, str]]) -> str:
    parts = []
    for coef, var in terms:
        if coef == 0:
            continue
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        body = var if mag == 1 else f"{_fmt(mag)} {var}"
        parts.append(f"{sign} {body}")
    if not parts:
        return "0 " + terms[0][1] if terms else "0"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def _route_terms(s: Scenario, cache: SegmentCache, i: int, rate_fixed, rate_arc, wait_coef, use_time=False):
    """Linear expression for distance-or-time of vehicle i plus a waiting term."""
    v = s.vehicles[i - 1]
    ids = [g.id for g in s.groups]
    n = len(ids)
    if use_time:
        fixed = cache.t_vf[v.id] + v.t_load + cache.t_fv[v.id]
    else:
        fixed = cache.d_vf[v.id] + cache.d_fv[v.id]
    terms = [(rate_fixed * fixed, f"z_{i}")]
    for a in range(n + 1):
        for b in range(n + 1):
            if a == b:
                continue
            if a == 0:
                leg = (cache.t_fw if use_time else cache.d_fw)[ids[b - 1]]
            elif b == 0:
                leg = (cache.t_wf if use_time else cache.d_wf)[ids[a - 1]]
            else:
                leg = (cache.t_ww if use_time else cache.d_ww)[(ids[a - 1], ids[b - 1])]
            terms.append((rate_arc * leg, f"y_{i}_{a}_{b}"))
    terms.append((wait_coef, f"w_{i}"))
    return terms


def export_lp(s: Scenario, cache: SegmentCache, path: str | Path) -> None:
    check_scenario(s)
    V, G = s.vehicles, s.groups
    n = len(G)
    lines = ["\\ single-trip vehicle assignment model"]
    lines += [f"\\ vehicle {i}: {v.id}" for i, v in enumerate(V, 1)]
    lines += [f"\\ group {j}: {g.id} ({g.size} parcels)" for j, g in enumerate(G, 1)]

    cost_terms = []
    for i, v in enumerate(V, 1):
        cost_terms += _route_terms(s, cache, i, v.c_mob, v.c_mob, v.c_stop)
    lines += ["Minimize", f" cost: {_expr(cost_terms)}", "Subject To"]

    lines.append("\\ every group is served by exactly one vehicle")
    for j in range(1, n + 1):
        lines.append(f" cover_{j}: {_expr([(1.0, f'x_{i}_{j}') for i in range(1, len(V) + 1)])} = 1")
    lines.append("\\ total cost within the budget")
    lines.append(f" budget: {_expr(cost_terms)} <= {_fmt(s.budget)}")
    lines.append("\\ parcels carried within capacity")
    for i, v in enumerate(V, 1):
        lines.append(f" cap_{i}: {_expr([(float(g.size), f'x_{i}_{j}') for j, g in enumerate(G, 1)])} <= {v.cap}")
    lines.append("\\ fuel used within fuel available")
    for i, v in enumerate(V, 1):
        lines.append(f" fuel_{i}: {_expr(_route_terms(s, cache, i, v.f_mob, v.f_mob, v.f_stop))} <= {_fmt(v.f_avail)}")
    lines.append("\\ route time within available time")
    for i, v in enumerate(V, 1):
        lines.append(f" time_{i}: {_expr(_route_terms(s, cache, i, 1.0, 1.0, 1.0, use_time=True))} <= {_fmt(v.t_avail)}")
    lines.append("\\ waiting time is the sum of served groups' delivery times")
    for i in range(1, len(V) + 1):
        terms = [(1.0, f"w_{i}")] + [(-g.t_delivery, f"x_{i}_{j}") for j, g in enumerate(G, 1)]
        lines.append(f" wait_{i}: {_expr(terms)} = 0")
    lines.append("\\ routing: degree, linking and subtour elimination")
    for i in range(1, len(V) + 1):
        for a in range(n + 1):
            own = f"z_{i}" if a == 0 else f"x_{i}_{a}"
            outs = [(1.0, f"y_{i}_{a}_{b}") for b in range(n + 1) if b != a]
            ins = [(1.0, f"y_{i}_{b}_{a}") for b in range(n + 1) if b != a]
            lines.append(f" out_{i}_{a}: {_expr(outs + [(-1.0, own)])} = 0")
            lines.append(f" in_{i}_{a}: {_expr(ins + [(-1.0, own)])} = 0")
        for j in range(1, n + 1):
            lines.append(f" link_{i}_{j}: x_{i}_{j} - z_{i} <= 0")
        for a in range(1, n + 1):
            for b in range(1, n + 1):
                if a != b:
                    lines.append(f" mtz_{i}_{a}_{b}: u_{i}_{a} - u_{i}_{b} + {n} y_{i}_{a}_{b} <= {n - 1}")

    lines.append("Bounds")
    for i in range(1, len(V) + 1):
        lines.append(f" w_{i} >= 0")
        for j in range(1, n + 1):
            lines.append(f" 1 <= u_{i}_{j} <= {max(n, 1)}")
    lines.append("Binary")
    binaries = []
    for i in range(1, len(V) + 1):
        binaries.append(f"z_{i}")
        binaries += [f"x_{i}_{j}" for j in range(1, n + 1)]
        binaries += [f"y_{i}_{a}_{b}" for a in range(n + 1) for b in range(n + 1) if a != b]
    lines += [f" {b}" for b in binaries]
    lines.append("End")
    Path(path).write_text("\n".join(lines) + "\n")


# -- reading ---------------------------------------------------------------------


@dataclass
class LPModel:
    objective: dict[str, float]
    sense: str
    constraints: list[tuple[str, dict[str, float], str, float]]
    bounds: dict[str, tuple[float, float]]
    binaries: set[str]
    variables: list[str] = field(default_factory=list)


def _parse_expr(text: str) -> dict[str, float]:
    coeffs: dict[str, float] = {}
    text = text.strip()
    if text in ("", "0"):
        return coeffs
    # terms are whitespace separated: "[+|-] [coef] name"
    tokens = text.split()
    sign, coef = 1.0, None
    for tok in tokens:
        if tok == "+":
            sign = 1.0
        elif tok == "-":
            sign = -1.0
        else:
            try:
                coef = float(tok)
                continue
            except ValueError:
                pass
            coeffs[tok] = coeffs.get(tok, 0.0) + sign * (1.0 if coef is None else coef)
            sign, coef = 1.0, None
    return coeffs


def read_lp(path: str | Path) -> LPModel:
    """Parse the subset of CPLEX-LP written by :func:`export_lp`."""
    section = None
    obj: dict[str, float] = {}
    sense = "min"
    cons = []
    bounds: dict[str, tuple[float, float]] = {}
    binaries: set[str] = set()
    order: dict[str, None] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        low = line.lower()
        if low in ("minimize", "maximize"):
            section, sense = "obj", low[:3]
            continue
        if low in ("subject to", "st", "s.t."):
            section = "st"
            continue
        if low in ("bounds", "binary", "binaries", "general", "end"):
            section = low
            continue
        if section == "obj":
            _, expr = line.split(":", 1)
            obj = _parse_expr(expr)
            order.update(dict.fromkeys(obj))
        elif section == "st":
            name, body = line.split(":", 1)
            op = next(o for o in _OPS if o in body)
            lhs, rhs = body.split(op, 1)
            coeffs = _parse_expr(lhs)
            order.update(dict.fromkeys(coeffs))
            cons.append((name.strip(), coeffs, op, float(rhs)))
        elif section == "bounds":
            parts = line.split()
            if len(parts) == 5:
                bounds[parts[2]] = (float(parts[0]), float(parts[4]))
            elif len(parts) == 3 and parts[1] == ">=":
                lo, hi = bounds.get(parts[0], (0.0, float("inf")))
                bounds[parts[0]] = (float(parts[2]), hi)
            order.update(dict.fromkeys(p for p in parts if p[0].isalpha()))
        elif section in ("binary", "binaries"):
            binaries.update(line.split())
    return LPModel(obj, sense, cons, bounds, binaries, list(order))


def lp_violations(model: LPModel, values: Mapping[str, float], tol: float = 1e-6) -> list[str]:
    out = []
    for name, coeffs, op, rhs in model.constraints:
        lhs = sum(c * values.get(v, 0.0) for v, c in coeffs.items())
        scale = tol * max(1.0, abs(rhs))
        if (op == "<=" and lhs > rhs + scale) or (op == ">=" and lhs < rhs - scale) or \
                (op == "=" and abs(lhs - rhs) > scale):
            out.append(f"{name}: {lhs!r} {op} {rhs!r} violated")
    return out


def read_solution_values(path: str | Path) -> dict[str, float]:
    """Read ``name value`` pairs, one per line (``#`` comments allowed)."""
    values = {}
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        name, val = line.replace("=", " ").split()[:2]
        values[name] = float(val)
    return values


def solution_values(s: Scenario, cache: SegmentCache, sol: Solution) -> dict[str, float]:
    """Variable assignment encoding a single-trip Solution in the LP's variables."""
    vidx = {v.id: i for i, v in enumerate(s.vehicles, 1)}
    gidx = {g.id: j for j, g in enumerate(s.groups, 1)}
    gi = s.group_index()
    values: dict[str, float] = {}
    for vid, trips in sol.routes.items():
        if len(trips) != 1:
            raise ValueError(f"vehicle {vid} runs {len(trips)} trips; the LP model has one")
        i = vidx[vid]
        trip = trips[0]
        values[f"z_{i}"] = 1.0
        values[f"w_{i}"] = sum(gi[g].t_delivery for g in trip)
        nodes = [0, *(gidx[g] for g in trip), 0]
        for a, b in zip(nodes, nodes[1:]):
            values[f"y_{i}_{a}_{b}"] = 1.0
        for k, g in enumerate(trip, 1):
            values[f"x_{i}_{gidx[g]}"] = 1.0
            values[f"u_{i}_{gidx[g]}"] = float(k)
    return values


def check_lp_solution(s: Scenario, cache: SegmentCache, values: Mapping[str, float]) -> tuple[list[str], Solution | None]:
    """Decode ``x`` variables and re-check them with the exact solver's predicate.

    Returns ``(problems, solution)``; ``problems`` is empty when the external
    answer is feasible. The visiting order is re-optimized, so the returned
    cost is the best cost of the decoded assignment.
    """
    problems = []
    gi = s.group_index()
    assigned: dict[int, list[str]] = {}
    for j, g in enumerate(s.groups, 1):
        owners = [i for i in range(1, len(s.vehicles) + 1) if values.get(f"x_{i}_{j}", 0.0) > 0.5]
        if len(owners) != 1:
            problems.append(f"cover: group {g.id} assigned to {len(owners)} vehicles")
        for i in owners:
            assigned.setdefault(i, []).append(g.id)
    routes, per_vehicle = {}, {}
    total = 0.0
    for i in sorted(assigned):
        v = s.vehicles[i - 1]
        rc = vehicle_route_cost(v, assigned[i], cache, s)
        if not rc.feasible:
            problems.append(f"{rc.reason}: vehicle {v.id}")
        routes[v.id] = rc.sequences
        per_vehicle[v.id] = route_usage(v, rc.sequences, cache, gi)
        total += per_vehicle[v.id].cost
    if total > s.budget:
        problems.append(f"budget: total {total} > {s.budget}")
    sol = Solution(routes, per_vehicle, total, frozenset(), "external")
    return problems, sol

"""Company savings, per-vehicle profit, break-even rate and completion time."""

from __future__ import annotations

from decimal import ROUND_HALF_UP, Decimal
from typing import Mapping

from .model import Solution

REPORT_COLUMNS = [
    "scenario_id",
    "algorithm",
    "fleet_size",
    "total_cost",
    "savings",
    "n_participating",
    "per_vehicle_profit",
    "completion_time_s",
    "runtime_s",
    "uncovered_count",
    "time_limit_reached",
    "status",
]


class PartialCoverageError(ValueError):
    def __init__(self, uncovered):
        self.uncovered = sorted(uncovered)
        super().__init__(f"solution leaves groups uncovered: {', '.join(self.uncovered)}")


def to_cents(x: float) -> Decimal:
    """Round half-up to whole cents."""
    return Decimal(repr(x)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)


def company_savings(sol: Solution, budget: float) -> float:
    if sol.uncovered:
        raise PartialCoverageError(sol.uncovered)
    return budget - sol.total_cost


def per_vehicle_profit(savings: float, n_participating: int, share: float = 0.5) -> float:
    """Share of the savings paid out, split evenly among participating vehicles."""
    if n_participating < 1:
        raise ValueError("no participating vehicles to share profit with")
    if not 0.0 <= share <= 1.0:
        raise ValueError(f"share must lie in [0, 1], got {share}")
    return share * savings / n_participating


def break_even_rate(total_cost: float, n_customers: int) -> float:
    if n_customers < 1:
        raise ValueError("need at least one customer")
    return total_cost / n_customers


def completion_time(sol: Solution, per_vehicle_t_tot: Mapping[str, float] | None = None) -> float:
    """Makespan over participating vehicles, all dispatched at time zero."""
    if sol.uncovered:
        raise PartialCoverageError(sol.uncovered)
    if per_vehicle_t_tot is None:
        per_vehicle_t_tot = {v: u.t_tot for v, u in sol.per_vehicle.items()}
    return max(per_vehicle_t_tot.values(), default=0.0)


def report_row(scenario_id: str, fleet_size: int, sol: Solution, budget: float, runtime_s: float | None,
               share: float = 0.5) -> dict:
    """One CSV row in ``REPORT_COLUMNS`` order; money in cents, times in 0.001 s."""
    row = {
        "scenario_id": scenario_id,
        "algorithm": sol.algorithm,
        "fleet_size": fleet_size,
        "total_cost": str(to_cents(sol.total_cost)),
        "savings": "",
        "n_participating": sol.n_participating,
        "per_vehicle_profit": "",
        "completion_time_s": "",
        "runtime_s": "" if runtime_s is None else f"{runtime_s:.3f}",
        "uncovered_count": len(sol.uncovered),
        "time_limit_reached": int(sol.time_limit_reached),
        "status": "ok" if sol.covers_all else "partial",
    }
    if sol.covers_all:
        savings = company_savings(sol, budget)
        row["savings"] = str(to_cents(savings))
        if sol.n_participating:
            row["per_vehicle_profit"] = str(to_cents(per_vehicle_profit(savings, sol.n_participating, share)))
        row["completion_time_s"] = f"{completion_time(sol):.3f}"
    return row

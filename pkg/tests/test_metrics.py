import pytest
from decimal import Decimal

from ladsolve.metrics import (
    REPORT_COLUMNS,
    PartialCoverageError,
    break_even_rate,
    company_savings,
    completion_time,
    per_vehicle_profit,
    report_row,
    to_cents,
)
from ladsolve.model import Solution, VehicleUsage


def sol(total=1693.0, uncovered=(), t_tots=(3300.0,)):
    routes = {f"v{i}": (("g",),) for i in range(len(t_tots))}
    usage = {f"v{i}": VehicleUsage(1.0, 1.0, t, 0.0, 0.0) for i, t in enumerate(t_tots)}
    return Solution(routes, usage, total, frozenset(uncovered), "greedy")


def test_savings():
    assert company_savings(sol(1693.0), 2995) == 1302
    assert company_savings(sol(1716.0), 2995) == 1279
    assert company_savings(sol(2995.0), 2995) == 0
    with pytest.raises(PartialCoverageError, match="g9"):
        company_savings(sol(uncovered={"g9"}), 2995)


def test_per_vehicle_profit():
    assert per_vehicle_profit(108.52, 2, 0.5) == pytest.approx(27.13, abs=0.005)
    assert per_vehicle_profit(1302, 24, 0.5) == 27.125
    assert per_vehicle_profit(1302, 24, 0.0) == 0
    with pytest.raises(ValueError):
        per_vehicle_profit(10, 0)
    with pytest.raises(ValueError):
        per_vehicle_profit(10, 1, 1.5)


def test_profit_linear():
    assert per_vehicle_profit(200, 4, 0.5) == 2 * per_vehicle_profit(100, 4, 0.5)
    assert per_vehicle_profit(200, 4, 0.4) == 2 * per_vehicle_profit(200, 4, 0.2)


def test_break_even():
    assert break_even_rate(665, 500) == 1.33
    assert break_even_rate(0, 500) == 0
    assert break_even_rate(2995, 500) == 5.99
    with pytest.raises(ValueError):
        break_even_rate(1, 0)


def test_completion_time():
    assert completion_time(sol(t_tots=(3300.0,))) == 3300.0
    assert completion_time(sol(t_tots=(3300.0, 4000.0))) == 4000.0
    assert completion_time(sol(), {"a": 1.0, "b": 7.0}) == 7.0
    with pytest.raises(PartialCoverageError):
        completion_time(sol(uncovered={"g"}))


def test_cents_round_half_up():
    assert to_cents(27.125) == Decimal("27.13")
    assert to_cents(0.005) == Decimal("0.01")


def test_report_row_savings_plus_cost_is_budget():
    row = report_row("s1", 10, sol(1693.004), 2995.0, 1.23456)
    assert list(row) == REPORT_COLUMNS
    assert Decimal(row["savings"]) + Decimal(row["total_cost"]) == Decimal("2995.00")
    assert row["runtime_s"] == "1.235" and row["status"] == "ok"


def test_report_row_partial():
    row = report_row("s1", 10, sol(uncovered={"g1", "g2"}), 2995.0, None)
    assert row["status"] == "partial" and row["savings"] == "" and row["uncovered_count"] == 2
    assert row["runtime_s"] == ""

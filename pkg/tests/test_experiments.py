import csv
import math

import pytest

from ladsolve.experiments import (
    generate_scenario,
    group_scenario,
    parse_fleet_sizes,
    run_bench,
    run_instance,
    summarize,
)
from ladsolve.geo import EuclideanTravel
from ladsolve.model import save_scenario


def test_generator_is_seeded_and_sized():
    a, b = generate_scenario(50, 7, seed=4), generate_scenario(50, 7, seed=4)
    assert a == b and a != generate_scenario(50, 7, seed=5)
    assert len(a.customers) == 50 and len(a.vehicles) == 7
    assert a.budget == pytest.approx(50 * 5.99)
    assert all(10 * 3600 <= v.t_avail <= 16 * 3600 for v in a.vehicles)


def test_bench_over_ten_scenarios(tmp_path):
    paths = []
    for seed in range(10):
        s = group_scenario(generate_scenario(40, 6, seed=seed), target_groups=8, seed=seed)
        paths.append(tmp_path / f"s{seed}.json")
        save_scenario(s, paths[-1])
    out = tmp_path / "bench.csv"
    results = run_bench(paths, [6], ["greedy"], out=out, travel=EuclideanTravel())
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == len(results) == 10
    assert all(r["uncovered_count"] == "0" and r["status"] == "ok" for r in rows)
    assert all(not res.problems for res in results)


def test_large_exact_run_reports_time_limit():
    s = group_scenario(generate_scenario(500, 50, seed=0), target_groups=80, seed=0)
    res = run_instance("big", s, 50, "exact", EuclideanTravel(), time_limit_s=2.0)
    assert res.row["time_limit_reached"] == 1
    assert res.row["status"] == "ok" and not res.problems


def test_parse_fleet_sizes():
    assert parse_fleet_sizes("10:50:10") == [10, 20, 30, 40, 50]
    assert parse_fleet_sizes("5,8") == [5, 8]
    for bad in ("10:50:0", "0,3", ""):
        with pytest.raises(ValueError):
            parse_fleet_sizes(bad)


def test_summarize_averages_ok_rows():
    rows = [
        {"algorithm": "greedy", "fleet_size": "5", "status": "ok", "total_cost": "10.00", "savings": "2.00",
         "per_vehicle_profit": "0.50", "completion_time_s": "100.000", "runtime_s": ""},
        {"algorithm": "greedy", "fleet_size": "5", "status": "ok", "total_cost": "20.00", "savings": "1.00",
         "per_vehicle_profit": "0.25", "completion_time_s": "300.000", "runtime_s": ""},
        {"algorithm": "greedy", "fleet_size": "5", "status": "partial", "total_cost": "99.00", "savings": "",
         "per_vehicle_profit": "", "completion_time_s": "", "runtime_s": ""},
    ]
    (out,) = summarize(rows)
    assert (out["rows"], out["ok"]) == (3, 2)
    assert out["total_cost"] == 15.0 and out["completion_time_s"] == 200.0
    assert math.isnan(out["runtime_s"])


def test_groups_never_exceed_largest_vehicle():
    s = group_scenario(generate_scenario(40, 6, seed=2), target_groups=8, seed=2)
    largest = max(v.cap for v in s.vehicles)
    assert largest < 10
    assert max(g.size for g in s.groups) <= largest

import math
import random

import pytest

from ladsolve.exact import solve_exact
from ladsolve.experiments import generate_scenario, group_scenario
from ladsolve.geo import EuclideanTravel, TravelError, TravelModel
from ladsolve.greedy import solve_greedy
from ladsolve.segments import dump_segments, load_segments, precompute_segments
from ladsolve.seqsolve import route_distance, route_time

from support import direct_trip, scenario, vehicle

UNIT = EuclideanTravel(1.0, 60.0)


def test_examples():
    s = scenario([("g1", (3, 4), 1, 0), ("g2", (6, 8), 1, 0)], [vehicle("v", home=(0, 0))])
    c = precompute_segments(s, UNIT)
    assert c.d_fw["g1"] == 5.0
    assert c.d_ww[("g1", "g2")] == 5.0
    assert c.d_ww[("g1", "g1")] == 0.0
    assert c.d_vf["v"] == 0.0
    assert c.metric


def test_spot_checks_against_provider():
    s = group_scenario(generate_scenario(200, 30, seed=2), seed=2)
    m = EuclideanTravel()
    c = precompute_segments(s, m)
    rng = random.Random(0)
    gs, vs = list(s.groups), list(s.vehicles)
    for _ in range(100):
        kind = rng.randrange(3)
        if kind == 0:
            v = rng.choice(vs)
            assert c.d_vf[v.id] == m.distance(v.home, s.depot) and c.t_fv[v.id] == m.travel_time(s.depot, v.home)
        elif kind == 1:
            g = rng.choice(gs)
            assert c.d_fw[g.id] == m.distance(s.depot, g.waiting_location)
            assert c.t_wf[g.id] == m.travel_time(g.waiting_location, s.depot)
        else:
            a, b = rng.sample(gs, 2)
            assert c.d_ww[(a.id, b.id)] == m.distance(a.waiting_location, b.waiting_location)
            assert c.t_ww[(a.id, b.id)] == m.travel_time(a.waiting_location, b.waiting_location)


def test_route_totals_via_cache_match_provider():
    s = group_scenario(generate_scenario(120, 10, seed=5), seed=5)
    m = EuclideanTravel()
    c = precompute_segments(s, m)
    gi = s.group_index()
    rng = random.Random(1)
    for _ in range(50):
        v = rng.choice(s.vehicles)
        picked = rng.sample(sorted(gi), rng.randint(1, 6))
        cut = rng.randint(1, len(picked))
        trips = [picked[:cut], picked[cut:]] if cut < len(picked) else [picked]
        d = m.distance(v.home, s.depot)
        t = m.travel_time(v.home, s.depot)
        for trip in trips:
            pts = [gi[g].waiting_location for g in trip]
            d += direct_trip(m, s.depot, pts, lambda mm, a, b: mm.distance(a, b))
            t += v.t_load + direct_trip(m, s.depot, pts, lambda mm, a, b: mm.travel_time(a, b))
        d += m.distance(s.depot, v.home)
        t += m.travel_time(s.depot, v.home)
        assert route_distance(v, trips, c) == d
        t_wait = math.fsum(gi[g].t_delivery for trip in trips for g in trip)
        assert route_time(v, trips, c, gi) == {"t_tot": t + t_wait, "t_wait": t_wait}


class _Broken(TravelModel):
    def distance(self, a, b):
        if a != b and b.x == 6:
            raise TravelError("no road")
        return 1.0

    def travel_time(self, a, b):
        return 60.0


def test_provider_error_names_segment():
    s = scenario([("g1", (3, 4), 1, 0), ("g2", (6, 8), 1, 0)], [vehicle("v")])
    with pytest.raises(TravelError, match="g2"):
        precompute_segments(s, _Broken())


def test_non_metric_cache_flagged():
    class Detour(TravelModel):
        def distance(self, a, b):
            return 0.0 if a == b else (100.0 if {a.x, b.x} == {3.0, 6.0} else 1.0)

        def travel_time(self, a, b):
            return self.distance(a, b) * 60

    s = scenario([("g1", (3, 4), 1, 0), ("g2", (6, 8), 1, 0)], [vehicle("v")])
    assert not precompute_segments(s, Detour()).metric


def test_dump_load_substitution_gives_identical_results(tmp_path):
    s = group_scenario(generate_scenario(80, 6, seed=9), target_groups=9, seed=9)
    direct = precompute_segments(s, EuclideanTravel())
    path = tmp_path / "segments.csv"
    dump_segments(direct, s, path)
    loaded = load_segments(s, path)
    assert loaded == direct
    assert solve_greedy(s, loaded) == solve_greedy(s, direct)
    a = solve_exact(s, loaded, time_limit_s=30, allow_reload=True)
    b = solve_exact(s, direct, time_limit_s=30, allow_reload=True)
    assert (a.total_cost, a.routes) == (b.total_cost, b.routes)

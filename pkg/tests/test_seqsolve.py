import math
import random

import pytest

from ladsolve.geo import EuclideanTravel
from ladsolve.model import Group, Point, VehicleUsage
from ladsolve.segments import SegmentCache, precompute_segments
from ladsolve.seqsolve import (
    HELD_KARP_LIMIT,
    best_sequence,
    held_karp,
    nearest_neighbor_two_opt,
    route_distance,
    route_time,
    route_usage,
    trip_length,
)

from support import brute_tsp_cache, scenario, vehicle


def random_cache(rng, n, box=10.0):
    groups = [(f"g{j}", (rng.uniform(0, box), rng.uniform(0, box)), 1, 0) for j in range(n)]
    s = scenario(groups, [vehicle("v", home=(rng.uniform(0, box), rng.uniform(0, box)))], depot=(box / 2, box / 2))
    return s, precompute_segments(s, EuclideanTravel())


def hand_cache():
    """home = depot; d_fw1=5, d_w1w2=5, d_fw2=10; t segments 300/300/600."""
    d_fw = {"g1": 5.0, "g2": 10.0}
    t_fw = {"g1": 300.0, "g2": 600.0}
    ww = {("g1", "g2"): 5.0, ("g2", "g1"): 5.0, ("g1", "g1"): 0.0, ("g2", "g2"): 0.0}
    tw = {("g1", "g2"): 300.0, ("g2", "g1"): 300.0, ("g1", "g1"): 0.0, ("g2", "g2"): 0.0}
    return SegmentCache({"v": 0.0}, {"v": 0.0}, d_fw, dict(d_fw), ww, {"v": 0.0}, {"v": 0.0}, t_fw, dict(t_fw), tw)


HAND_GROUPS = {"g1": Group("g1", ("a",), Point(0, 0), 600.0), "g2": Group("g2", ("b",), Point(0, 0), 900.0)}


def test_single_group():
    _, c = random_cache(random.Random(0), 1)
    assert best_sequence(c, {"g0"}).sequence == ("g0",)


def test_unit_square():
    s = scenario([("a", (1, 0), 1, 0), ("b", (1, 1), 1, 0), ("c", (0, 1), 1, 0)], [vehicle("v")])
    c = precompute_segments(s, EuclideanTravel(1.0))
    tour = best_sequence(c, {"a", "b", "c"})
    assert tour.length == 4.0 and tour.exact
    assert tour.sequence in (("a", "b", "c"), ("c", "b", "a"))


def test_unknown_and_empty():
    _, c = random_cache(random.Random(0), 2)
    with pytest.raises(KeyError):
        best_sequence(c, {"g0", "nope"})
    with pytest.raises(ValueError):
        best_sequence(c, set())


def test_held_karp_equals_permutation_brute_force():
    rng = random.Random(7)
    for _ in range(150):
        n = rng.randint(1, 8)
        _, c = random_cache(rng, n)
        ids = sorted(c.d_fw)
        assert best_sequence(c, ids).length == brute_tsp_cache(c, ids)


def test_returned_sequence_has_returned_length():
    rng = random.Random(8)
    for _ in range(50):
        _, c = random_cache(rng, rng.randint(2, 9))
        tour = best_sequence(c, c.d_fw)
        assert trip_length(c, tour.sequence) == tour.length


def test_heuristic_beyond_limit():
    rng = random.Random(3)
    _, c = random_cache(rng, HELD_KARP_LIMIT + 3)
    tour = best_sequence(c, c.d_fw)
    assert not tour.exact and sorted(tour.sequence) == sorted(c.d_fw)


def test_two_opt_never_worse_than_nearest_neighbour():
    rng = random.Random(4)
    for _ in range(40):
        _, c = random_cache(rng, rng.randint(3, 20))
        ids = sorted(c.d_fw)
        # nearest-neighbour seed, rebuilt here with the same tie-break
        left, seq = list(ids), []
        while left:
            key = (lambda g: (c.d_ww[(seq[-1], g)], g)) if seq else (lambda g: (c.d_fw[g], g))
            nxt = min(left, key=key)
            seq.append(nxt)
            left.remove(nxt)
        assert nearest_neighbor_two_opt(c, ids)[1] <= trip_length(c, seq)


def test_held_karp_tiny_examples_against_itself_reversed():
    rng = random.Random(5)
    for _ in range(30):
        _, c = random_cache(rng, rng.randint(2, 6))
        seq, length = held_karp(c, sorted(c.d_fw))
        assert trip_length(c, seq[::-1]) == pytest.approx(length, rel=1e-12)


# -- route totals --------------------------------------------------------------


def test_route_distance_example():
    assert route_distance(vehicle("v"), [["g1", "g2"]], hand_cache()) == 20.0


def test_route_time_example():
    v = vehicle("v", t_load=600.0)
    out = route_time(v, [["g1", "g2"]], hand_cache(), HAND_GROUPS)
    assert out == {"t_tot": 3300.0, "t_wait": 1500.0}


def test_empty_route():
    c = hand_cache()
    assert route_distance(vehicle("v"), [], c) == 0.0
    assert route_time(vehicle("v"), [], c, HAND_GROUPS) == {"t_tot": 0.0, "t_wait": 0.0}


def test_reload_doubles_out_and_back():
    c = hand_cache()
    c.d_vf["v"] = c.d_fv["v"] = 2.0
    assert route_distance(vehicle("v"), [["g1"], ["g1"]], c) == 2.0 + 10 + 10 + 2.0
    one = route_time(vehicle("v"), [["g1"]], c, HAND_GROUPS)
    two = route_time(vehicle("v"), [["g1"], ["g2"]], c, HAND_GROUPS)
    assert two["t_tot"] - one["t_tot"] == 600.0 + 1200.0 + 900.0  # second load + trip + wait


def test_usage_combines_rates():
    v = vehicle("v", c_mob=0.1, c_stop=0.00013, f_mob=0.03, f_stop=0.0002)
    u = route_usage(v, [["g1", "g2"]], hand_cache(), HAND_GROUPS)
    assert u == VehicleUsage(20.0, 1500.0, 3300.0, 0.03 * 20 + 0.0002 * 1500, 0.1 * 20 + 0.00013 * 1500)
    assert u.cost == pytest.approx(2.195, abs=1e-12)


def test_unknown_ids_rejected():
    with pytest.raises(KeyError):
        route_distance(vehicle("v"), [["zz"]], hand_cache())
    with pytest.raises(ValueError):
        route_distance(vehicle("v"), [[]], hand_cache())


def test_reversal_invariance_on_symmetric_cache():
    rng = random.Random(9)
    for _ in range(30):
        s, c = random_cache(rng, 6)
        trip = rng.sample(sorted(c.d_fw), rng.randint(1, 6))
        v = s.vehicles[0]
        assert route_distance(v, [trip[::-1]], c) == pytest.approx(route_distance(v, [trip], c), rel=1e-12)

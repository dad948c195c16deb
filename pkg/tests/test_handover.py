import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from udnsim.deployment import ScnSite, screening_angle
from udnsim.handover import (CandidateSets, candidate_sets, select_target,
                             sinr_offset)
from udnsim.mobility import VuePlan, VueState, build_route_network
from udnsim.radio import RadioParams


def _vue(x, y, velocity=10.0, route_id=0):
    net = build_route_network()
    vue = VueState(plan=VuePlan(0, route_id, 0.0, velocity),
                   route=net.routes[route_id])
    vue.x, vue.y = x, y
    return vue, net


def _site(i, x, y):
    return ScnSite(i, float(x), float(y))


def test_sinr_offset_examples():
    assert sinr_offset(-3.0, -6.0, -8.0) == 9.0
    assert sinr_offset(-5.0, -5.0, -7.0) == 0.0
    assert sinr_offset(-5.0, -2.0, -4.0) == -9.0


def test_conventional_mode_all_in_range_candidates():
    vue, net = _vue(500.0, 500.0)
    serving = _site(0, 505.0, 500.0)
    sites = [serving] + [_site(i, 500.0 + 30 * i, 520.0) for i in range(1, 5)] \
        + [_site(5, 990.0, 990.0)]   # out of range
    cands = candidate_sets(vue, serving, sites, None, net, RadioParams())
    assert [s.id for s in cands.predicted] == [1, 2, 3, 4]
    assert cands.unpredicted == []
    assert cands.serving is serving


def test_prediction_mode_screens_by_cone():
    vue, net = _vue(500.0, 500.0, velocity=10.0, route_id=0)
    serving = _site(0, 495.0, 500.0)
    ahead = _site(1, 600.0, 500.0)      # on the predicted heading (east)
    behind = _site(2, 400.0, 500.0)     # 180 degrees off
    sites = [serving, ahead, behind]
    cands = candidate_sets(vue, serving, sites, 0, net, RadioParams())
    assert [s.id for s in cands.predicted] == [1]
    assert [s.id for s in cands.unpredicted] == [2]


def test_prediction_cone_axis_follows_predicted_route():
    # VUE physically past junction on route 0; prediction says route 1,
    # whose nearest segment runs north, so an eastern site is out of cone
    vue, net = _vue(100.0, 520.0, velocity=10.0, route_id=1)
    serving = _site(0, 100.0, 515.0)
    north = _site(1, 100.0, 620.0)
    east = _site(2, 200.0, 520.0)
    cands = candidate_sets(vue, serving, [serving, north, east], 1, net,
                           RadioParams())
    assert [s.id for s in cands.predicted] == [1]
    assert [s.id for s in cands.unpredicted] == [2]


def test_no_in_range_sites_gives_empty_sets():
    vue, net = _vue(500.0, 500.0)
    serving = _site(0, 2000.0, 2000.0)
    far = _site(1, -1500.0, -1500.0)
    cands = candidate_sets(vue, serving, [serving, far], None, net, RadioParams())
    assert cands.predicted == [] and cands.unpredicted == []


def test_select_target_penalty_worked_example():
    serving = _site(0, 0, 0)
    pred = _site(1, 1, 0)
    unpred = _site(2, 2, 0)
    cands = CandidateSets(predicted=[pred], unpredicted=[unpred], serving=serving)
    target, best = select_target(cands, {1: -6.0, 2: -3.0}, serving_sinr=-8.0)
    # ki=-3 penalised by 9 -> -12 < kj=-6, so the predicted cell wins
    assert target is pred
    assert best == -6.0


def test_select_target_conventional_argmax():
    serving = _site(0, 0, 0)
    a = _site(1, 1, 0)
    b = _site(2, 2, 0)
    cands = CandidateSets(predicted=[a, b], unpredicted=[], serving=serving)
    target, best = select_target(cands, {1: -2.0, 2: -5.0}, serving_sinr=-6.0)
    assert target is a and best == -2.0


def test_select_target_no_penalty_when_unpredicted_not_best():
    serving = _site(0, 0, 0)
    pred = _site(1, 1, 0)
    unpred = _site(2, 2, 0)
    cands = CandidateSets(predicted=[pred], unpredicted=[unpred], serving=serving)
    # ki=-5 < kx=-4: no penalty path; serving wins over kj=-6
    target, best = select_target(cands, {1: -6.0, 2: -5.0}, serving_sinr=-4.0)
    assert target is serving and best == -4.0


def test_select_target_empty_sets_returns_serving():
    serving = _site(0, 0, 0)
    cands = CandidateSets(predicted=[], unpredicted=[], serving=serving)
    assert select_target(cands, {}, -3.0) == (serving, -3.0)


def test_select_target_fallback_without_predicted():
    serving = _site(0, 0, 0)
    u1 = _site(1, 1, 0)
    u2 = _site(2, 2, 0)
    cands = CandidateSets(predicted=[], unpredicted=[u1, u2], serving=serving)
    target, best = select_target(cands, {1: -9.0, 2: -1.0}, serving_sinr=-5.0)
    assert target is u2 and best == -1.0


def test_select_target_tie_prefers_lowest_id():
    serving = _site(5, 0, 0)
    a = _site(1, 1, 0)
    b = _site(2, 2, 0)
    cands = CandidateSets(predicted=[b, a], unpredicted=[], serving=serving)
    target, _ = select_target(cands, {1: -3.0, 2: -3.0}, serving_sinr=-9.0)
    assert target is a


@given(st.floats(-30, 30), st.floats(-30, 30), st.floats(-30, 30))
@settings(max_examples=500, deadline=None)
def test_penalty_guarantee(ki, kj, kx):
    if ki > max(kj, kx):
        assert ki - sinr_offset(ki, kj, kx) < max(kj, kx)


@given(st.integers(0, 2**32))
@settings(max_examples=60, deadline=None)
def test_conventional_equals_all_covering_cone(seed):
    # a 180-degree half-angle cone with radius = communication range admits
    # everything in range, reproducing conventional candidate discovery
    rng = np.random.default_rng(seed)
    net = build_route_network()
    params = RadioParams()
    sites = [_site(i, x, y) for i, (x, y) in
             enumerate(rng.uniform(0, 1000, size=(12, 2)))]
    vue, _ = _vue(float(rng.uniform(0, 1000)), float(rng.uniform(0, 1000)))
    serving = sites[int(rng.integers(0, 12))]
    serving_sinr = float(rng.uniform(-20, 20))
    conventional = candidate_sets(vue, serving, sites, None, net, params)
    sinr_of = {s.id: float(rng.uniform(-20, 20))
               for s in conventional.predicted + conventional.unpredicted}
    t_conv, b_conv = select_target(conventional, sinr_of, serving_sinr)

    in_range = [s for s in sites if s.id != serving.id and
                math.hypot(s.x - vue.x, s.y - vue.y) <= params.communication_range_m]
    wide = CandidateSets(predicted=in_range, unpredicted=[], serving=serving)
    t_wide, b_wide = select_target(wide, sinr_of, serving_sinr)
    assert (t_conv.id, b_conv) == (t_wide.id, b_wide)


def test_screening_angle_shrinks_with_velocity():
    assert screening_angle(10) > screening_angle(30) > screening_angle(50)

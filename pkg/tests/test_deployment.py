import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from udnsim.deployment import (Area, ScnSite, ScreeningCone, bearing,
                               distance_2d, in_screening_cone,
                               load_deployment_csv, sample_ppp_deployment,
                               save_deployment_csv, screening_angle)
from udnsim.errors import ConfigurationError


def test_ppp_determinism():
    a = Area()
    first = sample_ppp_deployment(50, a, seed=99)
    second = sample_ppp_deployment(50, a, seed=99)
    assert first == second
    assert first != sample_ppp_deployment(50, a, seed=100)


def test_ppp_sites_inside_area_with_dense_ids():
    sites = sample_ppp_deployment(50, Area(), seed=3)
    assert [s.id for s in sites] == list(range(len(sites)))
    assert all(0 <= s.x <= 1000 and 0 <= s.y <= 1000 for s in sites)
    assert all(s.height == 15.0 and s.tx_power == 30.0 and s.antenna_gain == 15.0
               for s in sites)


def test_ppp_moments_match_poisson():
    # mean and variance of the count should both be ~50 at 50 sites/km^2
    counts = np.array([len(sample_ppp_deployment(50, Area(), seed=s))
                       for s in range(1000)])
    assert abs(counts.mean() - 50) < 5.0
    assert abs(counts.var() - 50) < 5.0


def test_ppp_negligible_density_gives_empty_layouts():
    # P(K >= 1) = 1 - exp(-1e-6) ~ 1e-6; 200 draws are all empty w.h.p.
    counts = [len(sample_ppp_deployment(1e-6, Area(), seed=s)) for s in range(200)]
    assert counts == [0] * 200


def test_ppp_rejects_bad_density():
    with pytest.raises(ConfigurationError):
        sample_ppp_deployment(0.0, Area(), seed=1)
    with pytest.raises(ConfigurationError):
        Area(width=0.0)


def test_distance_examples():
    assert distance_2d((0, 0), ScnSite(0, 3, 4)) == 5.0
    site = ScnSite(1, 12.5, -3.25)
    assert distance_2d((12.5, -3.25), site) == 0.0
    assert distance_2d((0, 0), (300, 0)) == 300.0


@given(st.tuples(*[st.floats(-1e4, 1e4) for _ in range(6)]))
@settings(max_examples=200, deadline=None)
def test_distance_triangle_inequality(coords):
    a, b, c = (coords[0], coords[1]), (coords[2], coords[3]), (coords[4], coords[5])
    assert distance_2d(a, c) <= distance_2d(a, b) + distance_2d(b, c) + 1e-9


def test_bearing_examples():
    assert bearing((0, 0), (1, 0)) == 0.0
    assert bearing((0, 0), (0, 5)) == 90.0
    assert bearing((0, 0), (-1, -1)) == 225.0
    with pytest.raises(ValueError):
        bearing((2.0, 3.0), (2.0, 3.0))


def test_screening_angle_formula():
    assert screening_angle(25) == pytest.approx(28.0, abs=1e-12)
    assert screening_angle(100) == pytest.approx(23.0, abs=1e-12)
    assert screening_angle(10) == pytest.approx(50 / math.sqrt(10) + 18, abs=1e-12)
    with pytest.raises(ConfigurationError):
        screening_angle(0)


def test_cone_membership_examples():
    cone = ScreeningCone(apex=(0, 0), axis_heading=0.0, half_angle=14.0, radius=300.0)
    assert in_screening_cone(cone, ScnSite(0, 100, 0))
    assert not in_screening_cone(cone, ScnSite(1, 100, 100))   # bearing 45 deg
    assert not in_screening_cone(cone, ScnSite(2, 400, 0))     # beyond radius
    assert in_screening_cone(cone, ScnSite(3, 0, 0))           # site at apex


def test_cone_wraparound():
    cone = ScreeningCone(apex=(0, 0), axis_heading=350.0, half_angle=15.0, radius=100.0)
    assert in_screening_cone(cone, ScnSite(0, 50.0, 2.0))      # bearing ~2.3 deg
    assert not in_screening_cone(cone, ScnSite(1, 50.0, 25.0))  # ~26.6 deg off-wrap


@pytest.mark.parametrize("quarter_turns", [1, 2, 3])
def test_cone_rotation_invariance(quarter_turns, rng):
    # rotating both the axis and the site by 90-degree multiples is exact in floats
    angle = 90.0 * quarter_turns
    c, s = {1: (0, 1), 2: (-1, 0), 3: (0, -1)}[quarter_turns]
    for _ in range(200):
        axis = float(rng.uniform(0, 360))
        half = float(rng.uniform(1, 179))
        x, y = rng.uniform(-200, 200, size=2)
        base = ScreeningCone((0.0, 0.0), axis, half, 300.0)
        rot = ScreeningCone((0.0, 0.0), (axis + angle) % 360.0, half, 300.0)
        rx, ry = c * x - s * y, s * x + c * y
        assert in_screening_cone(base, ScnSite(0, float(x), float(y))) == \
            in_screening_cone(rot, ScnSite(0, float(rx), float(ry)))


def test_cone_validation():
    with pytest.raises(ConfigurationError):
        ScreeningCone((0, 0), 0.0, 0.0, 300.0)
    with pytest.raises(ConfigurationError):
        ScreeningCone((0, 0), 0.0, 190.0, 300.0)
    with pytest.raises(ConfigurationError):
        ScreeningCone((0, 0), 0.0, 14.0, 0.0)


def test_deployment_csv_roundtrip(tmp_path):
    sites = sample_ppp_deployment(50, Area(), seed=8)
    path = tmp_path / "layout.csv"
    save_deployment_csv(sites, path)
    assert load_deployment_csv(path) == sites
    header = path.read_text().splitlines()[0]
    assert header == "id,x,y,height,tx_power,gain"

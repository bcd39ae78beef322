import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from isoscan.radar_core import DomainError, RadarConfig
from isoscan.scene import (
    Kind,
    Scatterer,
    ScatteringMatrix,
    Scenario,
    antenna_gain,
    direction_of,
    effective_rcs,
    to_cartesian,
)


def test_antenna_gain_examples():
    assert antenna_gain(28.0, 6.0, 0.0) == 28.0
    assert antenna_gain(28.0, 6.0, 3.0) == 25.0
    assert antenna_gain(20.0, 20.0, 10.0) == 17.0


@given(st.floats(-10, 40), st.floats(0.1, 90))
def test_half_power_at_half_beamwidth(g, w):
    assert antenna_gain(g, w, w / 2) == pytest.approx(g - 3.0, abs=1e-9)


@given(st.floats(0.1, 90), st.floats(0, 60), st.floats(0.01, 10))
def test_pattern_even_and_decreasing(w, a, da):
    assert antenna_gain(20.0, w, a) == antenna_gain(20.0, w, -a)
    assert antenna_gain(20.0, w, a + da) < antenna_gain(20.0, w, a)


def test_direction_examples():
    assert direction_of((0, 2.5, 0)) == (0.0, 0.0, 2.5)
    assert direction_of((0, 0, 1)) == (90.0, 0.0, 1.0)
    t, p, r = direction_of((1, 1, 0))
    assert (t, p) == (0.0, pytest.approx(45.0))
    assert r == pytest.approx(1.4142, abs=1e-4)


def test_direction_of_origin_fails():
    with pytest.raises(DomainError):
        direction_of((0, 0, 0))


@given(st.floats(-80, 80), st.floats(-170, 170), st.floats(0.01, 100))
def test_direction_round_trip(theta, phi, rng):
    x, y, z = to_cartesian(theta, phi, rng)
    back = to_cartesian(*direction_of((x, y, z)))
    np.testing.assert_allclose(back, (x, y, z), rtol=1e-9, atol=1e-9 * rng)


def _sensor(on=(0.1, 1.0), off=(2.0, 1.0)):
    return Scatterer("s", (0, 2, 0), Kind.SENSOR, ScatteringMatrix(*on), ScatteringMatrix(*off))


def test_effective_rcs_examples():
    pure = _sensor(on=(0.0, 1.0))
    assert effective_rcs(pure, "ON", "V") == -math.inf
    assert effective_rcs(pure, "ON", "H") == 0.0
    s = _sensor(off=(2.0, 1.0))
    assert effective_rcs(s, "OFF", "V") - effective_rcs(s, "OFF", "H") == pytest.approx(6.0206, abs=1e-4)


def test_clutter_ignores_state():
    c = Scatterer.clutter("c", (1, 2, 0), ScatteringMatrix(3.0, 0.1))
    assert effective_rcs(c, "ON", "V") == effective_rcs(c, "OFF", "V")


@given(st.floats(0.01, 10), st.floats(1.01, 100), st.floats(0.01, 10), st.floats(1.01, 100))
def test_faithful_sensor_polarization_ordering(on_vv, on_ratio, off_vh, off_ratio):
    s = _sensor(on=(on_vv, on_vv * on_ratio), off=(off_vh * off_ratio, off_vh))
    assert s.depolarizing
    assert effective_rcs(s, "ON", "H") > effective_rcs(s, "ON", "V")
    assert effective_rcs(s, "OFF", "V") > effective_rcs(s, "OFF", "H")


@pytest.mark.parametrize("vv, vh", [(0.0, 0.0), (-1.0, 1.0), (math.inf, 1.0), (math.nan, 1.0)])
def test_bad_matrix(vv, vh):
    with pytest.raises(ValueError):
        ScatteringMatrix(vv, vh)


def test_scenario_state_bookkeeping(small_grid):
    s = _sensor()
    c = Scatterer.clutter("c", (1, 2, 0), ScatteringMatrix(1.0, 0.1))
    Scenario([s, c], {"s": "ON"}, RadarConfig(), small_grid)
    with pytest.raises(ValueError, match="without a state"):
        Scenario([s, c], {}, RadarConfig(), small_grid)
    with pytest.raises(ValueError, match="non-sensors"):
        Scenario([s, c], {"s": "ON", "c": "OFF"}, RadarConfig(), small_grid)

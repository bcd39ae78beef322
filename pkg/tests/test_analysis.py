import numpy as np
import pytest

from isoscan.analysis import (
    ScenarioResult,
    SensorReading,
    SensorTarget,
    dynamic_range,
    format_report_csv,
    format_report_table,
    match_regions,
    read_report_csv,
    report,
    sensor_targets,
)
from isoscan.errors import AmbiguityError, ValidationError
from isoscan.imaging import PolarimetricImage, ScanGrid, Window, build_image, image_max_in_window
from isoscan.isolines import Region
from isoscan.radar_core import RadarConfig, RangeAxis
from isoscan.scenario_file import bundled, load_scenario
from isoscan.scene import Scatterer, ScatteringMatrix, to_cartesian

from .conftest import REFERENCE_TABLE


def _region(rid, theta, phi, rng):
    box = Window((theta - 1, theta + 1), (phi - 0.3, phi + 0.3), (rng, rng))
    return Region(rid, "VH", (0,), box, (0, 0), 0.0, (0, 0, 0), (theta, phi, rng))


def test_match_by_peak_within_gate(small_grid):
    bw = small_grid.range_axis.bin_width
    sensors = [SensorTarget("a", 0.0, 0.0, 2.0), SensorTarget("b", 2.0, 1.5, 3.0)]
    regions = [_region("R1", 1.0, 0.3, 2.0 + 2 * bw), _region("R2", 2.0, 1.5, 3.0 + 4 * bw)]
    m = match_regions(regions, [], sensors, small_grid)
    assert m["a"] == (regions[0], None)
    assert m["b"] == (None, None)  # 4 bins away: outside the gate


def test_nearest_region_wins(small_grid):
    sensors = [SensorTarget("a", 0.0, 0.0, 2.0)]
    far, near = _region("R1", 2.0, 0.0, 2.0), _region("R2", 1.0, 0.0, 2.0)
    assert match_regions([far, near], [], sensors, small_grid)["a"][0] is near


def test_shared_region_is_ambiguous(small_grid):
    sensors = [SensorTarget("a", 0.0, 0.0, 2.0), SensorTarget("b", 1.0, 0.0, 2.0)]
    with pytest.raises(AmbiguityError):
        match_regions([_region("R1", 0.0, 0.0, 2.0)], [], sensors, small_grid)


def test_duplicate_sensor_positions_rejected(small_grid):
    sensors = [SensorTarget("a", 0.0, 0.0, 2.0), SensorTarget("b", 0.0, 0.0, 2.0)]
    with pytest.raises(ValidationError):
        match_regions([], [], sensors, small_grid)


def test_dynamic_range_is_absolute(small_grid):
    on = np.full(small_grid.shape, -20.0)
    off = np.full(small_grid.shape, -20.0)
    on[4, 10, 26] = 3.0
    off[4, 10, 26] = 7.5
    win = Window((-1, 1), (-0.3, 0.3), (1.9, 2.0))
    e_on, e_off, delta = dynamic_range(PolarimetricImage(small_grid, on, on),
                                       PolarimetricImage(small_grid, off, off), win, "VV")
    assert (e_on, e_off, delta) == (3.0, 7.5, 4.5)


def test_dynamic_range_grid_mismatch(small_grid):
    other = ScanGrid(-4.0, 4.0, 1.0, -3.0, 3.0, 0.3, RangeAxis(64, 0.1))
    a = PolarimetricImage(small_grid, np.zeros(small_grid.shape), np.zeros(small_grid.shape))
    b = PolarimetricImage(other, np.zeros(other.shape), np.zeros(other.shape))
    with pytest.raises(ValidationError):
        dynamic_range(a, b, Window((-1, 1), (-1, 1), (0, 1)), "VH")


def test_calibration_report(image_on, image_off, targets):
    sensors = tuple(targets.values())
    rep = report(ScenarioResult(image_on, sensors), ScenarioResult(image_off, sensors))
    assert rep.unmatched == []
    assert [r.sensor_id for r in rep.readings] == ["sensor1", "sensor2", "sensor3", "sensor4"]
    for r in rep.readings:
        want = REFERENCE_TABLE[r.sensor_id]
        got = (r.range, r.e_max_vv_on, r.e_max_vv_off, r.delta_vv, r.e_max_vh_on, r.e_max_vh_off, r.delta_vh)
        assert abs(got[0] - want[0]) <= image_on.grid.range_axis.bin_width
        np.testing.assert_allclose(got[1:], want[1:], atol=0.3)
        assert r.delta_vv == pytest.approx(abs(r.e_max_vv_on - r.e_max_vv_off))


def test_sensor_sets_must_agree(image_on, image_off, targets):
    sensors = tuple(targets.values())
    with pytest.raises(ValidationError):
        report(ScenarioResult(image_on, sensors), ScenarioResult(image_off, sensors[:-1]))


def test_sensor_without_regions_is_unmatched(image_on, image_off, targets):
    ghost = SensorTarget("ghost", -20.0, 25.0, 7.0)
    sensors = tuple(targets.values()) + (ghost,)
    rep = report(ScenarioResult(image_on, sensors), ScenarioResult(image_off, sensors))
    assert rep.unmatched == ["ghost"]
    assert len(rep.readings) == 5


def test_report_csv_round_trip():
    rows = [SensorReading("s1", 2.47, -1.94, 3.71, 5.65, 2.6, -4.9, 7.5)]
    text = format_report_csv(rows)
    assert text.splitlines()[0] == "sensor,R_m,evv_on,evv_off,dvv,evh_on,evh_off,dvh"
    assert text.splitlines()[1] == "s1,2.5,-1.9,3.7,5.7,2.6,-4.9,7.5"
    back = read_report_csv(text)
    assert back[0] == SensorReading("s1", 2.5, -1.9, 3.7, 5.7, 2.6, -4.9, 7.5)
    assert format_report_csv(back) == text
    with pytest.raises(ValidationError):
        read_report_csv("a,b\n1,2\n")


def test_table_layout():
    text = format_report_table([SensorReading("s1", 2.5, -1.9, 3.7, 5.6, 2.6, -4.9, 7.5)])
    lines = text.splitlines()
    assert "e_max VV" in lines[0] and "e_max VH" in lines[0]
    assert lines[3].split() == ["s1", "2.5", "|", "-1.9", "3.7", "5.6", "|", "2.6", "-4.9", "7.5"]


def test_vv_vh_overlap_reported(image_on, image_off, targets):
    sensors = tuple(targets.values())
    rep = report(ScenarioResult(image_on, sensors), ScenarioResult(image_off, sensors))
    assert set(rep.overlap) == set(targets)
    assert all(v in (True, False, None) for v in rep.overlap.values())
    assert "VV/VH ON regions overlap" in rep.to_text()


def test_exact_location_matches(small_grid):
    s = SensorTarget("a", 1.0, 0.6, 2.0)
    reg = _region("R1", 1.0, 0.6, 2.0)
    assert match_regions([reg], [reg], [s], small_grid)["a"] == (reg, reg)


def test_dynamic_range_swap_and_identity(image_on, image_off, targets):
    t = targets["sensor1"]
    win = Window.around(image_on.grid, t.theta, t.phi, t.range)
    e_on, e_off, d = dynamic_range(image_on, image_off, win, "VV")
    assert dynamic_range(image_off, image_on, win, "VV") == (e_off, e_on, d)
    assert dynamic_range(image_on, image_on, win, "VH")[2] == 0.0


def test_table_examples_from_windows(image_on, image_off, targets):
    # sensor #3 VH ON level and sensor #2 VH OFF level read in the fallback window
    s3, s2 = targets["sensor3"], targets["sensor2"]
    on3, _ = image_max_in_window(image_on.vh, image_on.grid, Window.around(image_on.grid, s3.theta, s3.phi, s3.range))
    off2, _ = image_max_in_window(image_off.vh, image_off.grid, Window.around(image_off.grid, s2.theta, s2.phi, s2.range))
    assert on3 == pytest.approx(1.1, abs=0.2)
    assert off2 == pytest.approx(-17.3, abs=0.2)


def test_empty_sensor_list(image_on, image_off):
    rep = report(ScenarioResult(image_on, ()), ScenarioResult(image_off, ()))
    assert rep.readings == [] and rep.unmatched == []


def _smoke_pair(noise=True, extra=()):
    on = load_scenario(bundled("smoke_on.json"))
    off = load_scenario(bundled("smoke_off.json"))
    if not noise:
        on, off = on.replace(config=RadarConfig(noise_floor=None)), off.replace(config=RadarConfig(noise_floor=None))
    if extra:
        on = on.replace(scatterers=list(on.scatterers) + list(extra))
        off = off.replace(scatterers=list(off.scatterers) + list(extra))
    return on, off


def _run(on, off):
    targets = sensor_targets(on)
    return report(ScenarioResult(build_image(on, workers=1), targets),
                  ScenarioResult(build_image(off, workers=1), targets))


def test_identical_states_give_zero_delta():
    on, _ = _smoke_pair()
    s = on.sensors[0]
    same = Scatterer(s.id, s.position, s.kind, s.state_on, s.state_on)
    on = on.replace(scatterers=[same] + [c for c in on.scatterers if not c.is_sensor])
    off = on.replace(sensor_states={s.id: "OFF"})
    r = _run(on, off).readings[0]
    assert r.delta_vv == 0.0 and r.delta_vh == 0.0


def test_distant_clutter_leaves_readings_unchanged():
    post = Scatterer.clutter("far_post", to_cartesian(4.0, -5.0, 0.8), ScatteringMatrix(3.0, 0.3))
    base = _run(*_smoke_pair())
    more = _run(*_smoke_pair(extra=[post]))
    assert base.readings == more.readings

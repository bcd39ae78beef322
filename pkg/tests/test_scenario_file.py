import copy
import json

import pytest

from isoscan.scenario_file import ScenarioError, bundled, load_scenario, scenario_from_dict


@pytest.fixture
def doc():
    return json.loads(bundled("smoke_on.json").read_text())


def test_bundled_smoke_loads(doc):
    sc = scenario_from_dict(doc)
    assert [s.id for s in sc.sensors] == ["sensor1"]
    assert sc.grid.shape == (11, 41, 64)
    theta, phi, rng = sc.sensors[0].direction()
    assert (theta, phi, rng) == pytest.approx((0.0, 0.3, 2.0))


def test_calibration_scenarios_share_geometry(calib_on, calib_off):
    assert calib_on.grid == calib_off.grid
    assert [s.id for s in calib_on.scatterers] == [s.id for s in calib_off.scatterers]
    assert {calib_on.state_of(s).name for s in calib_on.sensors} == {"ON"}
    assert {calib_off.state_of(s).name for s in calib_off.sensors} == {"OFF"}


def test_cartesian_position(doc):
    doc["scatterers"][1] = {"id": "post", "kind": "clutter", "position": [0.0, 3.0, 0.0],
                            "matrix": {"s_vv": 1.0, "s_vh": 0.0}}
    sc = scenario_from_dict(doc)
    assert sc.scatterers[1].direction() == (0.0, 0.0, 3.0)


@pytest.mark.parametrize("edit, path", [
    (lambda d: d["scatterers"][0].update(colour="red"), "$.scatterers[0]"),
    (lambda d: d.update(extra=1), "$"),
    (lambda d: d["scatterers"][0]["state_on"].update(s_vv=-1.0), "$.scatterers[0].state_on.s_vv"),
    (lambda d: d["scatterers"][0].pop("state_off"), "$.scatterers[0]"),
    (lambda d: d["scatterers"][1].update(position=[1, 2, 3]), "$.scatterers[1]"),
    (lambda d: d["grid"]["theta"].update(step=0), "$.grid.theta.step"),
    (lambda d: d["sensor_states"].update(sensor1="MAYBE"), "$.sensor_states.sensor1"),
    (lambda d: d["config"].update(fft_size=500), "$.config"),
    (lambda d: d["sensor_states"].update(post="ON"), "$.sensor_states"),
])
def test_invalid_documents(doc, edit, path):
    bad = copy.deepcopy(doc)
    edit(bad)
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict(bad)
    assert err.value.path == path


def test_not_json(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("{nope")
    with pytest.raises(ScenarioError, match="not valid JSON"):
        load_scenario(p)

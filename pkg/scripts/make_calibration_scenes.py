#!/usr/bin/env python3
"""Regenerate the bundled calibration scenarios in src/isoscan/data/.

Sensor amplitudes are tuned by fixed-point iteration: simulate both
scenarios with the default seed, run the report, and scale each amplitude by
the remaining dB error until every echo maximum is within 0.005 dB of its
target. Clutter is left untouched.

    python scripts/make_calibration_scenes.py
"""

from __future__ import annotations

import copy
import json
import math
from pathlib import Path

from isoscan.analysis import ScenarioResult, report, sensor_targets
from isoscan.imaging import build_image
from isoscan.scenario_file import scenario_from_dict

DATA = Path(__file__).resolve().parents[1] / "src" / "isoscan" / "data"
SEED = 0
TOL_DB = 0.005

# id: (theta, phi, range, VV ON, VV OFF, VH ON, VH OFF) -- target echo maxima in dB
TARGETS = {
    "sensor1": (-2.0, -14.0, 2.5, -1.9, 3.7, 2.6, -4.9),
    "sensor2": (1.0, -5.0, 3.6, -4.9, -3.0, -0.9, -17.3),
    "sensor3": (-1.0, 5.0, 4.5, -0.1, -1.0, 1.1, -16.2),
    "sensor4": (2.0, 14.0, 5.8, -4.5, -1.6, 0.2, -9.7),
}

# id: (theta, phi, range, co-pol level dB on axis); cross-pol sits 25 dB lower
CLUTTER = {
    "ceiling_grid_a": (20.0, -8.0, 3.1, 6.0),
    "ceiling_grid_b": (22.0, 10.0, 5.0, 2.0),
    "pillar_left": (0.0, -25.0, 4.0, 5.0),
    "pillar_right": (0.0, 24.0, 3.2, 4.0),
    "floor": (-20.0, 0.0, 2.0, 0.0),
    "platform": (-8.0, 2.0, 5.2, -5.0),
    "cable": (-12.0, -10.0, 1.2, -2.0),
}
CLUTTER_XPOL_DB = -25.0

BASE = {
    "config": {
        "carrier_frequency": 23.8e9,
        "bandwidth": 2.0e9,
        "chirp_duration": 1.0e-3,
        "tx_gain": 28.0,
        "tx_hpbw": 6.0,
        "rx_gain_v": 20.0,
        "rx_gain_h": 20.0,
        "rx_hpbw": 20.0,
        "tx_power": 10.0,
        "noise_floor": -25.0,
        "noise_jitter_db": 0.5,
        "fft_size": 512,
        "range_max": 8.0,
        "cal_rcs": 0.0,
        "cal_range": 1.0,
    },
    "grid": {
        "theta": {"start": -30.0, "stop": 29.0, "step": 1.0},
        "phi": {"start": -30.0, "stop": 29.7, "step": 0.3},
        "range_bins": 512,
        "range_origin": 0.0,
    },
}


def amplitude(level_db: float, rng: float) -> float:
    # 0 dBsm at 1 m reads 0 dB on boresight
    return 10.0 ** ((level_db + 40.0 * math.log10(rng)) / 20.0)


def base_scatterers() -> list[dict]:
    out = []
    for sid, (t, p, r, vv_on, vv_off, vh_on, vh_off) in TARGETS.items():
        out.append({
            "id": sid, "kind": "sensor", "polar": {"theta": t, "phi": p, "range": r},
            "state_on": {"s_vv": amplitude(vv_on, r), "s_vh": amplitude(vh_on, r)},
            "state_off": {"s_vv": amplitude(vv_off, r), "s_vh": amplitude(vh_off, r)},
        })
    for cid, (t, p, r, level) in CLUTTER.items():
        out.append({
            "id": cid, "kind": "clutter", "polar": {"theta": t, "phi": p, "range": r},
            "matrix": {"s_vv": amplitude(level, r), "s_vh": amplitude(level + CLUTTER_XPOL_DB, r)},
        })
    return out


def docs(scatterers: list[dict]) -> tuple[dict, dict]:
    on = copy.deepcopy(BASE)
    on["name"] = "calibration scenario 2: all sensors ON"
    on["scatterers"] = copy.deepcopy(scatterers)
    on["sensor_states"] = {sid: "ON" for sid in TARGETS}
    off = copy.deepcopy(BASE)
    off["name"] = "calibration scenario 1: all sensors OFF"
    off["scatterers"] = copy.deepcopy(scatterers)
    off["sensor_states"] = {sid: "OFF" for sid in TARGETS}
    for d in (on, off):
        d["notes"] = ("Four depolarizing sensors at 2.5, 3.6, 4.5 and 5.8 m among co-polarized clutter. "
                      "Sensor amplitudes are tuned so the default seed reproduces the target echo maxima; "
                      "scan extents are a modelling choice covering every scatterer.")
    return on, off


def measure(on_doc: dict, off_doc: dict):
    on_sc, off_sc = scenario_from_dict(on_doc), scenario_from_dict(off_doc)
    targets = sensor_targets(on_sc)
    rep = report(ScenarioResult(build_image(on_sc, SEED), targets),
                 ScenarioResult(build_image(off_sc, SEED), targets))
    return {r.sensor_id: r for r in rep.readings}, rep.unmatched


def main() -> None:
    scatterers = base_scatterers()
    by_id = {s["id"]: s for s in scatterers}
    for it in range(30):
        readings, unmatched = measure(*docs(scatterers))
        worst = 0.0
        for sid, (_, _, _, vv_on, vv_off, vh_on, vh_off) in TARGETS.items():
            r = readings[sid]
            for state, key, target, got in (
                    ("state_on", "s_vv", vv_on, r.e_max_vv_on), ("state_off", "s_vv", vv_off, r.e_max_vv_off),
                    ("state_on", "s_vh", vh_on, r.e_max_vh_on), ("state_off", "s_vh", vh_off, r.e_max_vh_off)):
                err = target - got
                worst = max(worst, abs(err))
                by_id[sid][state][key] *= 10.0 ** (err / 20.0)
        print(f"iteration {it}: worst error {worst:.4f} dB, unmatched {unmatched}")
        if worst < TOL_DB:
            break
    on_doc, off_doc = docs(scatterers)
    # the loop adjusted amplitudes after the last measurement; re-check
    readings, unmatched = measure(on_doc, off_doc)
    DATA.mkdir(parents=True, exist_ok=True)
    (DATA / "calibration_on.json").write_text(json.dumps(on_doc, indent=2) + "\n")
    (DATA / "calibration_off.json").write_text(json.dumps(off_doc, indent=2) + "\n")
    for sid, r in readings.items():
        print(sid, f"{r.range:.2f}", [round(v, 2) for v in (r.e_max_vv_on, r.e_max_vv_off, r.delta_vv,
                                                              r.e_max_vh_on, r.e_max_vh_off, r.delta_vh)])
    print("unmatched:", unmatched)


if __name__ == "__main__":
    main()

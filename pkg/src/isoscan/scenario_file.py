"""Scenario files: JSON documents describing reader, scan grid and scene.

Layout::

    {
      "name": "scenario 2: all sensors ON",
      "config": {"carrier_frequency": 23.8e9, "noise_floor": -25.0, ...},
      "grid": {"theta": {"start": -30, "stop": 29, "step": 1},
               "phi": {"start": -30, "stop": 29.7, "step": 0.3},
               "range_bins": 512, "range_origin": 0.0},
      "scatterers": [
        {"id": "sensor1", "kind": "sensor",
         "polar": {"theta": -3, "phi": -15, "range": 2.5},
         "state_on": {"s_vv": 1.2, "s_vh": 2.4},
         "state_off": {"s_vv": 2.9, "s_vh": 0.9}},
        {"id": "pillar", "kind": "clutter", "position": [1.2, 2.9, 0.0],
         "matrix": {"s_vv": 4.0, "s_vh": 0.1}}
      ],
      "sensor_states": {"sensor1": "ON"}
    }

A scatterer gives either ``position`` (Cartesian x, y, z in metres) or
``polar`` (theta/phi in degrees, range in metres). Unknown keys are errors.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import jsonschema

from .imaging import ScanGrid
from .radar_core import RadarConfig, RangeAxis
from .scene import Kind, Scatterer, ScatteringMatrix, Scenario, to_cartesian

_NUM = {"type": "number"}
_MATRIX = {
    "type": "object",
    "properties": {"s_vv": {"type": "number", "minimum": 0}, "s_vh": {"type": "number", "minimum": 0}},
    "required": ["s_vv", "s_vh"],
    "additionalProperties": False,
}
_AXIS = {
    "type": "object",
    "properties": {"start": _NUM, "stop": _NUM, "step": {"type": "number", "exclusiveMinimum": 0}},
    "required": ["start", "stop", "step"],
    "additionalProperties": False,
}
_CONFIG_FIELDS = {
    "carrier_frequency": _NUM, "bandwidth": _NUM, "chirp_duration": _NUM, "tx_gain": _NUM,
    "tx_hpbw": _NUM, "rx_gain_v": _NUM, "rx_gain_h": _NUM, "rx_hpbw": _NUM, "tx_power": _NUM,
    "noise_floor": {"type": ["number", "null"]}, "noise_jitter_db": {"type": "number", "minimum": 0},
    "fft_size": {"type": "integer"}, "range_max": _NUM, "cal_rcs": _NUM, "cal_range": _NUM,
}

SCHEMA: dict[str, Any] = {
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "notes": {"type": "string"},
        "config": {"type": "object", "properties": _CONFIG_FIELDS, "additionalProperties": False},
        "grid": {
            "type": "object",
            "properties": {
                "theta": _AXIS, "phi": _AXIS,
                "range_bins": {"type": "integer", "minimum": 1},
                "range_origin": _NUM,
            },
            "required": ["theta", "phi"],
            "additionalProperties": False,
        },
        "scatterers": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "kind": {"enum": ["sensor", "clutter"]},
                    "position": {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3},
                    "polar": {
                        "type": "object",
                        "properties": {"theta": _NUM, "phi": _NUM, "range": {"type": "number", "exclusiveMinimum": 0}},
                        "required": ["theta", "phi", "range"],
                        "additionalProperties": False,
                    },
                    "matrix": _MATRIX,
                    "state_on": _MATRIX,
                    "state_off": _MATRIX,
                },
                "required": ["id", "kind"],
                "additionalProperties": False,
                "oneOf": [{"required": ["position"]}, {"required": ["polar"]}],
                "if": {"properties": {"kind": {"const": "sensor"}}},
                "then": {"required": ["state_on", "state_off"], "not": {"required": ["matrix"]}},
                "else": {"required": ["matrix"],
                         "not": {"anyOf": [{"required": ["state_on"]}, {"required": ["state_off"]}]}},
            },
        },
        "sensor_states": {"type": "object", "additionalProperties": {"enum": ["ON", "OFF"]}},
    },
    "required": ["config", "grid", "scatterers", "sensor_states"],
    "additionalProperties": False,
}


class ScenarioError(ValueError):
    """Invalid scenario document; ``path`` locates the offending field."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


def _path(parts) -> str:
    out = "$"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def validate(doc: Any) -> None:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = errors[0]
        raise ScenarioError(err.message, _path(err.absolute_path))


def _matrix(d: dict, path: str) -> ScatteringMatrix:
    try:
        return ScatteringMatrix(float(d["s_vv"]), float(d["s_vh"]))
    except ValueError as exc:
        raise ScenarioError(str(exc), path) from None


def scenario_from_dict(doc: dict) -> Scenario:
    validate(doc)
    try:
        config = RadarConfig(**doc["config"])
    except ValueError as exc:
        raise ScenarioError(str(exc), "$.config") from None

    g = doc["grid"]
    axis = RangeAxis.for_config(config, g.get("range_bins"), g.get("range_origin", 0.0))
    try:
        grid = ScanGrid(g["theta"]["start"], g["theta"]["stop"], g["theta"]["step"],
                        g["phi"]["start"], g["phi"]["stop"], g["phi"]["step"], axis)
    except ValueError as exc:
        raise ScenarioError(str(exc), "$.grid") from None

    scatterers = []
    for n, s in enumerate(doc["scatterers"]):
        path = f"$.scatterers[{n}]"
        if "polar" in s:
            p = s["polar"]
            position = to_cartesian(p["theta"], p["phi"], p["range"])
        else:
            position = tuple(s["position"])
        try:
            if s["kind"] == "sensor":
                sc = Scatterer(s["id"], position, Kind.SENSOR,
                               _matrix(s["state_on"], path + ".state_on"),
                               _matrix(s["state_off"], path + ".state_off"))
            else:
                sc = Scatterer.clutter(s["id"], position, _matrix(s["matrix"], path + ".matrix"))
        except ValueError as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(str(exc), path) from None
        scatterers.append(sc)

    try:
        return Scenario(scatterers, doc["sensor_states"], config, grid, name=doc.get("name", ""))
    except ValueError as exc:
        raise ScenarioError(str(exc), "$.sensor_states") from None


def load_scenario(path: str | Path) -> Scenario:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"not valid JSON ({exc.msg} at line {exc.lineno})") from None
    return scenario_from_dict(doc)


def bundled(name: str) -> Path:
    """Path of a scenario shipped in ``isoscan/data``."""
    return Path(__file__).parent / "data" / name

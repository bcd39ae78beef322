"""Polarimetric point scatterers, antenna patterns and scan geometry.

Coordinates: the radar sits at the origin and looks along +y. Elevation
``theta`` is measured up from the horizontal (x, y) plane, azimuth ``phi``
in that plane from +y towards +x. All angles are in degrees.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Mapping, Sequence

import numpy as np

from .radar_core import DomainError, RadarConfig

if TYPE_CHECKING:
    from .imaging import ScanGrid


class State(str, Enum):
    ON = "ON"
    OFF = "OFF"


class Kind(str, Enum):
    SENSOR = "sensor"
    CLUTTER = "clutter"


def antenna_gain(peak_gain, hpbw: float, off_axis):
    """Gaussian mainlobe in dBi: ``peak - 3 (2 off_axis / hpbw)**2``.

    Works on scalars and numpy arrays alike; there are no sidelobes.
    """
    if not hpbw > 0:
        raise ValueError(f"hpbw must be > 0, got {hpbw}")
    ratio = 2.0 * off_axis / hpbw
    return peak_gain - 3.0 * ratio * ratio


def direction_of(position: Sequence[float]) -> tuple[float, float, float]:
    """(theta, phi, range) of a Cartesian point seen from the radar."""
    x, y, z = (float(v) for v in position)
    rng = math.sqrt(x * x + y * y + z * z)
    if rng == 0.0:
        raise DomainError("direction of the zero vector is undefined")
    theta = math.degrees(math.atan2(z, math.hypot(x, y)))
    phi = math.degrees(math.atan2(x, y))
    return theta, phi, rng


def to_cartesian(theta: float, phi: float, rng: float) -> tuple[float, float, float]:
    """Inverse of :func:`direction_of`."""
    t = math.radians(theta)
    p = math.radians(phi)
    ct = math.cos(t)
    return rng * ct * math.sin(p), rng * ct * math.cos(p), rng * math.sin(t)


def unit_vectors(theta, phi) -> np.ndarray:
    """Unit pointing vectors for broadcastable theta/phi arrays, shape (..., 3)."""
    t = np.radians(np.asarray(theta, dtype=float))
    p = np.radians(np.asarray(phi, dtype=float))
    t, p = np.broadcast_arrays(t, p)
    ct = np.cos(t)
    return np.stack([ct * np.sin(p), ct * np.cos(p), np.sin(t)], axis=-1)


def off_axis_angle(beam: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Angle in degrees between unit beam vectors (..., 3) and one unit target vector."""
    cross = np.cross(beam, target)
    sin_a = np.linalg.norm(cross, axis=-1)
    cos_a = (beam * target).sum(axis=-1)
    return np.degrees(np.arctan2(sin_a, cos_a))


@dataclass(frozen=True)
class ScatteringMatrix:
    """Co- and cross-polarized amplitudes under V illumination."""

    s_vv: float
    s_vh: float

    def __post_init__(self) -> None:
        for name in ("s_vv", "s_vh"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")
        if self.s_vv == 0 and self.s_vh == 0:
            raise ValueError("at least one of s_vv, s_vh must be > 0")

    @staticmethod
    def _db(amplitude: float) -> float:
        return 20.0 * math.log10(amplitude) if amplitude > 0 else -math.inf

    @property
    def rcs_vv(self) -> float:
        return self._db(self.s_vv)

    @property
    def rcs_vh(self) -> float:
        return self._db(self.s_vh)

    def scaled(self, k: float) -> "ScatteringMatrix":
        return ScatteringMatrix(self.s_vv * k, self.s_vh * k)


@dataclass(frozen=True)
class Scatterer:
    id: str
    position: tuple[float, float, float]
    kind: Kind
    state_on: ScatteringMatrix
    state_off: ScatteringMatrix

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", tuple(float(v) for v in self.position))
        object.__setattr__(self, "kind", Kind(self.kind))
        if math.hypot(*self.position) == 0.0:
            raise ValueError(f"scatterer {self.id!r} sits on the radar")

    @classmethod
    def clutter(cls, id: str, position, matrix: ScatteringMatrix) -> "Scatterer":
        return cls(id, position, Kind.CLUTTER, matrix, matrix)

    @property
    def is_sensor(self) -> bool:
        return self.kind is Kind.SENSOR

    @property
    def depolarizing(self) -> bool:
        """True when ON is mainly cross-pol and OFF mainly co-pol."""
        return (self.state_on.s_vh > self.state_on.s_vv
                and self.state_off.s_vv > self.state_off.s_vh)

    def direction(self) -> tuple[float, float, float]:
        return direction_of(self.position)

    def matrix(self, state: State | str) -> ScatteringMatrix:
        if not self.is_sensor:
            return self.state_on
        return self.state_on if State(state) is State.ON else self.state_off

    def scaled(self, k: float) -> "Scatterer":
        return Scatterer(self.id, self.position, self.kind,
                         self.state_on.scaled(k), self.state_off.scaled(k))


def effective_rcs(scatterer: Scatterer, state: State | str, rx_pol: str) -> float:
    """RCS in dBsm seen by the V- or H-polarized receiver."""
    m = scatterer.matrix(state)
    pol = rx_pol.upper()
    if pol == "V":
        return m.rcs_vv
    if pol == "H":
        return m.rcs_vh
    raise ValueError(f"rx_pol must be 'V' or 'H', got {rx_pol!r}")


@dataclass(frozen=True)
class Scenario:
    """Scene plus reader configuration, scan grid and sensor states."""

    scatterers: tuple[Scatterer, ...]
    sensor_states: Mapping[str, State]
    config: RadarConfig
    grid: "ScanGrid"
    name: str = ""
    metadata: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "scatterers", tuple(self.scatterers))
        states = {k: State(v) for k, v in self.sensor_states.items()}
        object.__setattr__(self, "sensor_states", states)
        ids = [s.id for s in self.scatterers]
        if len(set(ids)) != len(ids):
            raise ValueError("scatterer ids must be unique")
        sensor_ids = {s.id for s in self.scatterers if s.is_sensor}
        missing = sensor_ids - states.keys()
        if missing:
            raise ValueError(f"sensors without a state: {sorted(missing)}")
        extra = states.keys() - sensor_ids
        if extra:
            raise ValueError(f"states given for non-sensors: {sorted(extra)}")

    @property
    def sensors(self) -> list[Scatterer]:
        return [s for s in self.scatterers if s.is_sensor]

    def state_of(self, scatterer: Scatterer) -> State:
        return self.sensor_states.get(scatterer.id, State.ON)

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)

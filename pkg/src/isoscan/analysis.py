"""Per-sensor echo maxima and ON/OFF dynamic range.

The dynamic range of a sensor in one polarization is ``|e_on - e_off|``,
where each ``e`` is the highest echo level inside that sensor's measurement
window. Windows come from the isoline regions matched to the sensor. When a
state yields no region (its echo stays under the isoline threshold) the
window of the other state is reused, and failing that a small box around
the sensor's known position.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import astuple, dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import AmbiguityError, ValidationError
from .imaging import PolarimetricImage, ScanGrid, Window, image_max_in_window
from .isolines import Region, boxes_intersect, cluster_regions, extract_isolines
from .scene import Scenario

GATE_BINS = 3
GATE_STEPS = 3
DEFAULT_MIN_THRESHOLD = -10.0


@dataclass(frozen=True)
class SensorTarget:
    id: str
    theta: float
    phi: float
    range: float


@dataclass(frozen=True)
class SensorReading:
    sensor_id: str
    range: float
    e_max_vv_on: float
    e_max_vv_off: float
    delta_vv: float
    e_max_vh_on: float
    e_max_vh_off: float
    delta_vh: float


@dataclass(frozen=True)
class ScenarioResult:
    image: PolarimetricImage
    sensors: tuple[SensorTarget, ...]


def sensor_targets(scenario: Scenario) -> tuple[SensorTarget, ...]:
    return tuple(SensorTarget(s.id, *s.direction()) for s in scenario.sensors)


def _gate_distance(region: Region, target: SensorTarget, grid: ScanGrid,
                   gate_bins: float, gate_steps: float) -> float:
    t, p, r = region.peak_position
    return max(abs(t - target.theta) / (gate_steps * grid.theta_step),
               abs(p - target.phi) / (gate_steps * grid.phi_step),
               abs(r - target.range) / (gate_bins * grid.range_axis.bin_width))


def _match_one(regions: Sequence[Region], sensors: Sequence[SensorTarget], grid: ScanGrid,
               gate_bins: float, gate_steps: float) -> dict[str, Region | None]:
    picked: dict[str, Region | None] = {}
    owner: dict[str, str] = {}
    for s in sensors:
        best, best_d = None, math.inf
        for reg in regions:
            d = _gate_distance(reg, s, grid, gate_bins, gate_steps)
            if d <= 1.0 and d < best_d:
                best, best_d = reg, d
        if best is not None:
            if best.id in owner:
                raise AmbiguityError(f"sensors {owner[best.id]!r} and {s.id!r} both match region {best.id}")
            owner[best.id] = s.id
        picked[s.id] = best
    return picked


def match_regions(on_regions: Sequence[Region], off_regions: Sequence[Region],
                  sensors: Sequence[SensorTarget], grid: ScanGrid, gate_bins: float = GATE_BINS,
                  gate_steps: float = GATE_STEPS) -> dict[str, tuple[Region | None, Region | None]]:
    """Associate regions with sensors by their peak position.

    A region is a candidate for a sensor when its peak lies within
    ``gate_bins`` range bins and ``gate_steps`` angular steps of the sensor;
    the nearest candidate wins. Missing regions map to ``None``.
    """
    ids = [s.id for s in sensors]
    if len(set(ids)) != len(ids):
        raise ValidationError("sensor ids must be unique")
    positions = [(s.theta, s.phi, s.range) for s in sensors]
    if len(set(positions)) != len(positions):
        raise ValidationError("sensor expected positions must be distinct")
    on = _match_one(on_regions, sensors, grid, gate_bins, gate_steps)
    off = _match_one(off_regions, sensors, grid, gate_bins, gate_steps)
    return {s.id: (on[s.id], off[s.id]) for s in sensors}


def _check_grids(a: PolarimetricImage, b: PolarimetricImage) -> None:
    if not a.grid.same_as(b.grid):
        raise ValidationError(f"image grids differ: {a.grid.shape} vs {b.grid.shape}")


def dynamic_range(on_image: PolarimetricImage, off_image: PolarimetricImage, window: Window,
                  polarization: str) -> tuple[float, float, float]:
    """(e_on, e_off, |e_on - e_off|) inside one shared window."""
    _check_grids(on_image, off_image)
    e_on, _ = image_max_in_window(on_image.field(polarization), on_image.grid, window)
    e_off, _ = image_max_in_window(off_image.field(polarization), off_image.grid, window)
    return e_on, e_off, abs(e_on - e_off)


@dataclass
class _PolReading:
    e_on: float
    e_off: float
    on_region: Region | None
    off_region: Region | None
    on_index: tuple[int, int, int]

    @property
    def matched(self) -> bool:
        return self.on_region is not None or self.off_region is not None


def _read_polarization(on_image, off_image, sensors, pol, min_threshold, levels):
    grid = on_image.grid
    regions_on = cluster_regions(extract_isolines(on_image, pol, levels, min_threshold), on_image)
    regions_off = cluster_regions(extract_isolines(off_image, pol, levels, min_threshold), off_image)
    matches = match_regions(regions_on, regions_off, sensors, grid)
    out = {}
    for s in sensors:
        r_on, r_off = matches[s.id]
        fallback = Window.around(grid, s.theta, s.phi, s.range)
        win_on = (r_on or r_off).bbox if (r_on or r_off) else fallback
        win_off = (r_off or r_on).bbox if (r_off or r_on) else fallback
        e_on, idx = image_max_in_window(on_image.field(pol), grid, win_on)
        e_off, _ = image_max_in_window(off_image.field(pol), grid, win_off)
        out[s.id] = _PolReading(e_on, e_off, r_on, r_off, idx)
    return out


@dataclass
class Report:
    readings: list[SensorReading]
    unmatched: list[str]
    # sensor id -> whether its ON-state VV and VH regions overlap (None: one is missing)
    overlap: dict[str, bool | None] = field(default_factory=dict)

    def to_csv(self) -> str:
        return format_report_csv(self.readings)

    def to_text(self) -> str:
        text = format_report_table(self.readings)
        if self.overlap:
            marks = {True: "yes", False: "no", None: "n/a"}
            text += "VV/VH ON regions overlap: " + ", ".join(
                f"{sid} {marks[v]}" for sid, v in self.overlap.items()) + "\n"
        return text


def report(on: ScenarioResult, off: ScenarioResult, min_threshold: float = DEFAULT_MIN_THRESHOLD,
           levels: Sequence[float] = ()) -> Report:
    """One reading per sensor, sorted by range.

    The reported range is the peak of the sensor's VH region in the ON
    image when there is one, else the known sensor range.
    """
    _check_grids(on.image, off.image)
    on_ids = {s.id for s in on.sensors}
    off_ids = {s.id for s in off.sensors}
    if on_ids != off_ids:
        raise ValidationError(f"sensors present in one scenario only: {sorted(on_ids ^ off_ids)}")
    sensors = list(on.sensors)
    if not sensors:
        return Report([], [])
    vv = _read_polarization(on.image, off.image, sensors, "VV", min_threshold, levels)
    vh = _read_polarization(on.image, off.image, sensors, "VH", min_threshold, levels)
    grid = on.image.grid
    readings, unmatched, overlap = [], [], {}
    for s in sensors:
        a, b = vv[s.id], vh[s.id]
        if not (a.matched and b.matched):
            unmatched.append(s.id)
        overlap[s.id] = (boxes_intersect(a.on_region.bbox, b.on_region.bbox)
                         if a.on_region is not None and b.on_region is not None else None)
        rng = float(grid.ranges[b.on_index[2]]) if b.on_region is not None else s.range
        readings.append(SensorReading(s.id, rng, a.e_on, a.e_off, abs(a.e_on - a.e_off),
                                      b.e_on, b.e_off, abs(b.e_on - b.e_off)))
    readings.sort(key=lambda r: (r.range, r.sensor_id))
    overlap = {r.sensor_id: overlap[r.sensor_id] for r in readings}
    return Report(readings, unmatched, overlap)


REPORT_COLUMNS = ("sensor", "R_m", "evv_on", "evv_off", "dvv", "evh_on", "evh_off", "dvh")


def format_report_csv(readings: Sequence[SensorReading]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for r in readings:
        w.writerow([r.sensor_id] + [f"{v:.1f}" for v in astuple(r)[1:]])
    return buf.getvalue()


def read_report_csv(source: str | Path) -> list[SensorReading]:
    text = Path(source).read_text() if isinstance(source, Path) else source
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != REPORT_COLUMNS:
        raise ValidationError("not a report CSV")
    return [SensorReading(row[0], *map(float, row[1:])) for row in rows[1:]]


def format_report_table(readings: Sequence[SensorReading]) -> str:
    head1 = f"{'sensor':<10}{'R (m)':>7} | {'e_max VV (dB)':^24} | {'e_max VH (dB)':^24}"
    head2 = f"{'':<10}{'':>7} | {'ON':>7} {'OFF':>7} {'delta':>8} | {'ON':>7} {'OFF':>7} {'delta':>8}"
    lines = [head1, head2, "-" * len(head2)]
    for r in readings:
        lines.append(f"{r.sensor_id:<10}{r.range:>7.1f} | {r.e_max_vv_on:>7.1f} {r.e_max_vv_off:>7.1f} "
                     f"{r.delta_vv:>8.1f} | {r.e_max_vh_on:>7.1f} {r.e_max_vh_off:>7.1f} {r.delta_vh:>8.1f}")
    return "\n".join(lines) + "\n"


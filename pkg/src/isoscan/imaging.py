"""Mechanical beam scan and 3D polarimetric image synthesis.

The dechirped spectrum is not simulated in the time domain. Each scatterer
deposits its echo into the range bins through the power response of a
Hann-windowed FFT, truncated at +/-4 resolution cells and normalised so the
bin nearest the true range carries the full echo level. Noise is drawn from a
counter-based Philox stream keyed by (seed, direction, polarization), so the
result does not depend on the order in which directions are computed.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .radar_core import RadarConfig, RangeAxis, RangeAxisError, echo_level, range_resolution
from .scene import Scatterer, Scenario, State, effective_rcs, off_axis_angle, unit_vectors

POLS = {"V": "vv", "H": "vh"}
KERNEL_HALF_WIDTH = 4  # resolution cells
_ANGLE_EPS = 1e-9


def _pol_key(rx_pol: str) -> str:
    pol = rx_pol.upper()
    if pol in ("VV", "V"):
        return "V"
    if pol in ("VH", "H"):
        return "H"
    raise ValueError(f"unknown polarization {rx_pol!r}")


@dataclass(frozen=True)
class ScanGrid:
    theta_start: float
    theta_stop: float
    theta_step: float
    phi_start: float
    phi_stop: float
    phi_step: float
    range_axis: RangeAxis

    def __post_init__(self) -> None:
        if not (self.theta_step > 0 and self.phi_step > 0):
            raise ValueError("angular steps must be > 0")
        if not (self.theta_start < self.theta_stop and self.phi_start < self.phi_stop):
            raise ValueError("angular start must be below stop")

    @staticmethod
    def _count(start: float, stop: float, step: float) -> int:
        return int(math.floor((stop - start) / step + 1e-9)) + 1

    @property
    def theta_count(self) -> int:
        return self._count(self.theta_start, self.theta_stop, self.theta_step)

    @property
    def phi_count(self) -> int:
        return self._count(self.phi_start, self.phi_stop, self.phi_step)

    @property
    def bin_count(self) -> int:
        return self.range_axis.bin_count

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.theta_count, self.phi_count, self.bin_count

    @property
    def thetas(self) -> np.ndarray:
        return self.theta_start + np.arange(self.theta_count) * self.theta_step

    @property
    def phis(self) -> np.ndarray:
        return self.phi_start + np.arange(self.phi_count) * self.phi_step

    @property
    def ranges(self) -> np.ndarray:
        return self.range_axis.centers()

    @property
    def theta_last(self) -> float:
        return self.theta_start + (self.theta_count - 1) * self.theta_step

    @property
    def phi_last(self) -> float:
        return self.phi_start + (self.phi_count - 1) * self.phi_step

    def contains(self, theta: float, phi: float) -> bool:
        return (self.theta_start - _ANGLE_EPS <= theta <= self.theta_last + _ANGLE_EPS
                and self.phi_start - _ANGLE_EPS <= phi <= self.phi_last + _ANGLE_EPS)

    def nearest_index(self, theta: float, phi: float) -> tuple[int, int]:
        i = int(np.clip(round((theta - self.theta_start) / self.theta_step), 0, self.theta_count - 1))
        j = int(np.clip(round((phi - self.phi_start) / self.phi_step), 0, self.phi_count - 1))
        return i, j

    def same_as(self, other: "ScanGrid") -> bool:
        return self.shape == other.shape and np.allclose(
            [self.theta_start, self.theta_step, self.phi_start, self.phi_step,
             self.range_axis.bin_width, self.range_axis.origin],
            [other.theta_start, other.theta_step, other.phi_start, other.phi_step,
             other.range_axis.bin_width, other.range_axis.origin],
            rtol=0, atol=1e-9)


@dataclass(frozen=True)
class Window:
    """Closed box in physical (theta deg, phi deg, range m) coordinates."""

    theta: tuple[float, float]
    phi: tuple[float, float]
    range: tuple[float, float]

    @classmethod
    def around(cls, grid: ScanGrid, theta: float, phi: float, rng: float,
               n_theta: float = 3, n_phi: float = 3, n_bins: float = 3) -> "Window":
        dt = n_theta * grid.theta_step
        dp = n_phi * grid.phi_step
        dr = n_bins * grid.range_axis.bin_width
        return cls((theta - dt, theta + dt), (phi - dp, phi + dp), (rng - dr, rng + dr))

    def expanded(self, grid: ScanGrid, n: float = 1) -> "Window":
        dt, dp, dr = n * grid.theta_step, n * grid.phi_step, n * grid.range_axis.bin_width
        return Window((self.theta[0] - dt, self.theta[1] + dt),
                      (self.phi[0] - dp, self.phi[1] + dp),
                      (self.range[0] - dr, self.range[1] + dr))

    def index_slices(self, grid: ScanGrid) -> tuple[slice, slice, slice]:
        """Grid nodes inside the box; raises if the box misses the grid."""
        out = []
        for (lo, hi), start, step, count in (
                (self.theta, grid.theta_start, grid.theta_step, grid.theta_count),
                (self.phi, grid.phi_start, grid.phi_step, grid.phi_count),
                (self.range, grid.range_axis.origin, grid.range_axis.bin_width, grid.bin_count)):
            i0 = max(0, math.ceil((lo - start) / step - 1e-9))
            i1 = min(count - 1, math.floor((hi - start) / step + 1e-9))
            if i1 < i0:
                raise RangeAxisError(f"window {self} does not intersect the grid")
            out.append(slice(i0, i1 + 1))
        return tuple(out)


@dataclass(frozen=True)
class PolarimetricImage:
    """VV and VH echo levels in dB indexed (theta, phi, range bin).

    Fields are float32 unless built as float64; ISC1 files always hold float32.
    """

    grid: ScanGrid
    vv: np.ndarray
    vh: np.ndarray

    def __post_init__(self) -> None:
        for name in ("vv", "vh"):
            arr = np.asarray(getattr(self, name))
            if arr.dtype not in (np.float32, np.float64):
                arr = arr.astype(np.float32)
            if arr.shape != self.grid.shape:
                raise ValueError(f"{name} shape {arr.shape} does not match grid {self.grid.shape}")
            if np.isnan(arr).any() or np.isposinf(arr).any():
                raise ValueError(f"{name} contains NaN or +inf")
            object.__setattr__(self, name, arr)

    def field(self, polarization: str) -> np.ndarray:
        return getattr(self, POLS[_pol_key(polarization)])


def hann_response(x) -> np.ndarray:
    """Power response of a Hann-windowed FFT at ``x`` resolution cells off peak."""
    x = np.asarray(x, dtype=float)
    denom = 1.0 - x * x
    singular = np.abs(denom) < 1e-12
    amp = np.sinc(x) / np.where(singular, 1.0, denom)
    amp = np.where(singular, 0.5, amp)
    return amp * amp


def range_kernel(axis: RangeAxis, range_m: float, resolution: float) -> tuple[int, np.ndarray]:
    """Bins reached by a point at ``range_m``: (first bin, weights).

    Weights are peak-normalised on the nearest bin. Returns an empty weight
    array when the support misses the axis.
    """
    pos = (range_m - axis.origin) / axis.bin_width
    nearest = math.floor(pos + 0.5)
    reach = KERNEL_HALF_WIDTH * resolution / axis.bin_width
    k0 = max(0, math.ceil(pos - reach))
    k1 = min(axis.bin_count - 1, math.floor(pos + reach))
    if k1 < k0:
        return 0, np.zeros(0)
    centers = axis.origin + np.arange(k0, k1 + 1) * axis.bin_width
    peak = hann_response((axis.origin + nearest * axis.bin_width - range_m) / resolution)
    return k0, hann_response((centers - range_m) / resolution) / peak


def _worker_count() -> int:
    env = os.environ.get("ISOSCAN_THREADS")
    cap = os.cpu_count() or 1
    if env:
        try:
            return max(1, min(int(env), cap))
        except ValueError:
            pass
    return cap


def deposit(power: np.ndarray, beams: np.ndarray, scatterer: Scatterer, state: State,
            rx_pol: str, config: RadarConfig, axis: RangeAxis) -> None:
    """Add one scatterer's echo power (linear) into ``power`` in place.

    ``power`` has shape beams.shape[:-1] + (bin_count,).
    """
    rcs = effective_rcs(scatterer, state, rx_pol)
    if rcs == -math.inf:
        return
    theta, phi, rng = scatterer.direction()
    k0, weights = range_kernel(axis, rng, range_resolution(config))
    if weights.size == 0:
        return
    alpha = off_axis_angle(beams, unit_vectors(theta, phi))
    level = echo_level(config, rcs, rng, alpha, alpha, rx_pol)
    lin = np.power(10.0, np.asarray(level) / 10.0)
    power[..., k0:k0 + weights.size] += lin[..., None] * weights


def noise_power(config: RadarConfig, seed: int, direction_index: int, rx_pol: str,
                bin_count: int) -> np.ndarray | None:
    """Noise power per bin for one direction, or None when noise is disabled."""
    if config.noise_floor is None:
        return None
    if config.noise_jitter_db == 0:
        return np.full(bin_count, 10.0 ** (config.noise_floor / 10.0))
    stream = 2 * int(direction_index) + (0 if _pol_key(rx_pol) == "V" else 1)
    key = np.array([int(seed) & 0xFFFFFFFFFFFFFFFF, stream], dtype=np.uint64)
    rng = np.random.Generator(np.random.Philox(key=key))
    level = config.noise_floor + config.noise_jitter_db * rng.standard_normal(bin_count)
    return np.power(10.0, level / 10.0)


def _spectra(scenario: Scenario, theta: np.ndarray, phi: np.ndarray, rx_pol: str,
             seed: int, direction_index: np.ndarray) -> np.ndarray:
    """Linear power spectra for broadcast (theta, phi) directions."""
    grid = scenario.grid
    beams = unit_vectors(theta, phi)
    power = np.zeros(beams.shape[:-1] + (grid.bin_count,))
    for s in scenario.scatterers:
        deposit(power, beams, s, scenario.state_of(s), rx_pol, scenario.config, grid.range_axis)
    flat = power.reshape(-1, grid.bin_count)
    for n, d in enumerate(np.asarray(direction_index).reshape(-1)):
        noise = noise_power(scenario.config, seed, int(d), rx_pol, grid.bin_count)
        if noise is not None:
            flat[n] += noise
    return power


def _to_db(power: np.ndarray, dtype=np.float32) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return (10.0 * np.log10(power)).astype(dtype)


def beat_spectrum(scenario: Scenario, direction: tuple[float, float], rx_pol: str,
                  seed: int = 0, dtype=np.float32) -> np.ndarray:
    """Echo level (dB) versus range bin for one beam direction."""
    theta, phi = direction
    grid = scenario.grid
    if not grid.contains(theta, phi):
        raise RangeAxisError(f"direction ({theta}, {phi}) outside the scan grid")
    i, j = grid.nearest_index(theta, phi)
    power = _spectra(scenario, np.array([theta]), np.array([phi]), _pol_key(rx_pol), seed,
                     np.array([i * grid.phi_count + j]))
    return _to_db(power[0], dtype)


def _row(scenario: Scenario, i: int, seed: int, dtype) -> tuple[np.ndarray, np.ndarray]:
    grid = scenario.grid
    theta = np.full(grid.phi_count, grid.thetas[i])
    idx = i * grid.phi_count + np.arange(grid.phi_count)
    vv = _to_db(_spectra(scenario, theta, grid.phis, "V", seed, idx), dtype)
    vh = _to_db(_spectra(scenario, theta, grid.phis, "H", seed, idx), dtype)
    return vv, vh


def build_image(scenario: Scenario, seed: int = 0, workers: int | None = None,
                dtype=np.float32) -> PolarimetricImage:
    """Scan every grid direction and assemble the VV/VH image.

    Rows of constant elevation are independent and may run on a thread pool
    (capped by ``ISOSCAN_THREADS``); the output is identical either way.
    """
    grid = scenario.grid
    vv = np.empty(grid.shape, dtype=dtype)
    vh = np.empty(grid.shape, dtype=dtype)
    workers = _worker_count() if workers is None else max(1, workers)
    rows: Iterable[tuple[np.ndarray, np.ndarray]]
    if workers == 1:
        rows = (_row(scenario, i, seed, dtype) for i in range(grid.theta_count))
        for i, (a, b) in enumerate(rows):
            vv[i], vh[i] = a, b
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for i, (a, b) in enumerate(pool.map(lambda i: _row(scenario, i, seed, dtype),
                                                range(grid.theta_count))):
                vv[i], vh[i] = a, b
    return PolarimetricImage(grid, vv, vh)


def image_max_in_window(field: np.ndarray, grid: ScanGrid,
                        window: Window) -> tuple[float, tuple[int, int, int]]:
    """Largest value inside ``window`` and its first location in scan order."""
    st, sp, sr = window.index_slices(grid)
    sub = field[st, sp, sr]
    flat = int(np.argmax(sub))
    a, b, c = np.unravel_index(flat, sub.shape)
    return float(sub[a, b, c]), (st.start + int(a), sp.start + int(b), sr.start + int(c))

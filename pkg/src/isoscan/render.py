"""Static PNG rendering of image slices or max projections, with isoline overlays.

Pixel rows run from the highest elevation (top) to the lowest; columns from
the smallest azimuth (left) to the largest. Each grid node becomes a
``scale`` x ``scale`` block.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image, ImageDraw

from .errors import RangeAxisError
from .imaging import PolarimetricImage, ScanGrid
from .voxio import IsolineRecord

OVERLAY_COLOR = (255, 0, 0)


def projection(image: PolarimetricImage, polarization: str, range_bin: int | None = None) -> np.ndarray:
    """A (theta, phi) slice at ``range_bin`` or, with None, the max over range."""
    data = image.field(polarization)
    if range_bin is None:
        return data.max(axis=2)
    if not 0 <= range_bin < image.grid.bin_count:
        raise RangeAxisError(f"slice {range_bin} outside [0, {image.grid.bin_count})")
    return data[:, :, range_bin]


def to_gray(values: np.ndarray, vmin: float | None = None, vmax: float | None = None) -> np.ndarray:
    """Linear dB-to-uint8 mapping; -inf maps to black, a flat field to uniform black."""
    finite = np.isfinite(values)
    if vmin is None:
        vmin = float(values[finite].min()) if finite.any() else 0.0
    if vmax is None:
        vmax = float(values[finite].max()) if finite.any() else 0.0
    span = vmax - vmin
    if span <= 0:
        out = np.zeros(values.shape, dtype=np.uint8)
    else:
        scaled = np.clip((np.where(finite, values, vmin) - vmin) / span, 0.0, 1.0)
        out = np.round(scaled * 255.0).astype(np.uint8)
    return out


def node_to_pixel(grid: ScanGrid, theta: float, phi: float, scale: int) -> tuple[float, float]:
    x = (phi - grid.phi_start) / grid.phi_step * scale + (scale - 1) / 2.0
    y = (grid.theta_last - theta) / grid.theta_step * scale + (scale - 1) / 2.0
    return x, y


def render_array(grid: ScanGrid, values: np.ndarray, overlay: Sequence[IsolineRecord] = (),
                 scale: int = 4, vmin: float | None = None, vmax: float | None = None) -> Image.Image:
    gray = to_gray(values, vmin, vmax)[::-1, :]  # highest theta on top
    img = Image.fromarray(np.ascontiguousarray(gray))
    if scale != 1:
        img = img.resize((gray.shape[1] * scale, gray.shape[0] * scale), Image.NEAREST)
    if overlay:
        img = img.convert("RGB")
        draw = ImageDraw.Draw(img)
        for rec in overlay:
            pts = [node_to_pixel(grid, t, p, scale) for t, p in rec.vertices]
            pts = [(round(x), round(y)) for x, y in pts]
            if len(pts) >= 2:
                draw.line(pts, fill=OVERLAY_COLOR, width=1)
    return img


def render(image: PolarimetricImage, out: str | Path, polarization: str = "VH",
           range_bin: int | None = None, overlay: Sequence[IsolineRecord] = (),
           scale: int = 4) -> Image.Image:
    """Write a PNG of one slice (or the max projection) and return it.

    For a slice, only overlay isolines lying in that range bin are drawn.
    """
    values = projection(image, polarization, range_bin)
    if range_bin is not None and overlay:
        axis = image.grid.range_axis
        centre = axis.origin + range_bin * axis.bin_width
        overlay = [r for r in overlay if abs(r.range_m - centre) < axis.bin_width / 2]
    img = render_array(image.grid, values, overlay, scale)
    img.save(out, format="PNG", optimize=False)
    return img

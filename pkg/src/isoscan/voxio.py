"""ISC1 voxel files and the CSV exports of slices, isolines and regions.

ISC1 layout (all little-endian)::

    offset  size  field
    0       4     magic b"ISC1"
    4       2     version (uint16, = 1)
    6       2     reserved (uint16, = 0)
    8       48    theta start, stop, step; phi start, stop, step (float64)
    56      12    theta count, phi count, bin count (uint32)
    68      16    bin width (m), range origin (m) (float64)
    84      ...   vv then vh, float32, C order (theta, phi, bin)

Scan order is theta-major, then phi, then range bin. ``-inf`` marks voxels
with no echo at all.
"""

from __future__ import annotations

import csv
import io
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DecodeError, ValidationError
from .imaging import PolarimetricImage, ScanGrid, Window
from .isolines import Isoline, IsolineSet, Region
from .radar_core import RangeAxis, range_to_bin

MAGIC = b"ISC1"
VERSION = 1
_HEADER = struct.Struct("<4sHH6d3I2d")
HEADER_SIZE = _HEADER.size  # 84
_COUNT_OFFSET = 56


def encode_image(image: PolarimetricImage) -> bytes:
    g = image.grid
    head = _HEADER.pack(MAGIC, VERSION, 0, g.theta_start, g.theta_stop, g.theta_step,
                        g.phi_start, g.phi_stop, g.phi_step, *g.shape,
                        g.range_axis.bin_width, g.range_axis.origin)
    body = [np.ascontiguousarray(a, dtype="<f4").tobytes() for a in (image.vv, image.vh)]
    return head + b"".join(body)


def decode_image(data: bytes) -> PolarimetricImage:
    if len(data) < HEADER_SIZE:
        raise DecodeError(f"truncated header ({len(data)} of {HEADER_SIZE} bytes)", len(data))
    (magic, version, _reserved, t0, t1, dt, p0, p1, dp,
     nt, np_, nb, width, origin) = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise DecodeError(f"bad magic {magic!r}", 0)
    if version != VERSION:
        raise DecodeError(f"unsupported version {version}", 4)
    try:
        grid = ScanGrid(t0, t1, dt, p0, p1, dp, RangeAxis(nb, width, origin))
    except ValueError as exc:
        raise DecodeError(f"invalid grid header: {exc}", 8) from None
    if grid.shape != (nt, np_, nb):
        raise DecodeError(f"counts {(nt, np_, nb)} disagree with grid bounds {grid.shape}", _COUNT_OFFSET)
    n = nt * np_ * nb
    expected = HEADER_SIZE + 8 * n
    if len(data) != expected:
        raise DecodeError(f"payload size {len(data) - HEADER_SIZE}, expected {8 * n}",
                          min(len(data), expected))
    vv = np.frombuffer(data, dtype="<f4", count=n, offset=HEADER_SIZE).reshape(nt, np_, nb)
    vh = np.frombuffer(data, dtype="<f4", count=n, offset=HEADER_SIZE + 4 * n).reshape(nt, np_, nb)
    for name, arr, off in (("vv", vv, HEADER_SIZE), ("vh", vh, HEADER_SIZE + 4 * n)):
        bad = np.flatnonzero(np.isnan(arr) | np.isposinf(arr))
        if bad.size:
            raise DecodeError(f"{name} holds NaN/+inf", off + 4 * int(bad[0]))
    return PolarimetricImage(grid, vv.astype(np.float32), vh.astype(np.float32))


def write_image(image: PolarimetricImage, path: str | Path) -> None:
    Path(path).write_bytes(encode_image(image))


def read_image(path: str | Path) -> PolarimetricImage:
    return decode_image(Path(path).read_bytes())


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_rows(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _read_rows(text: str, header: Sequence[str]) -> list[list[str]]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != tuple(header):
        raise ValidationError(f"expected CSV columns {list(header)}")
    return rows[1:]


# -- 2D slices ---------------------------------------------------------------

SLICE_COLUMNS = ("theta_deg", "phi_deg", "level_db")


def slice_csv(image: PolarimetricImage, polarization: str, range_bin: int) -> str:
    g = image.grid
    if not 0 <= range_bin < g.bin_count:
        raise IndexError(f"range bin {range_bin} outside [0, {g.bin_count})")
    data = image.field(polarization)[:, :, range_bin]
    rows = ((_fmt(t), _fmt(p), _fmt(data[i, j]))
            for i, t in enumerate(g.thetas) for j, p in enumerate(g.phis))
    return _write_rows(SLICE_COLUMNS, rows)


def read_slice_csv(text: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(thetas, phis, values[theta, phi]) from :func:`slice_csv` output."""
    rows = np.array([[float(x) for x in r] for r in _read_rows(text, SLICE_COLUMNS)])
    thetas = np.unique(rows[:, 0])
    phis = np.unique(rows[:, 1])
    return thetas, phis, rows[:, 2].reshape(thetas.size, phis.size)


# -- isolines ----------------------------------------------------------------

ISOLINE_COLUMNS = ("polarization", "level_dB", "range_m", "vertex_index", "theta_deg", "phi_deg", "closed")


def isolines_csv(isoset: IsolineSet) -> str:
    axis = isoset.grid.range_axis

    def rows():
        for iso in isoset.isolines:
            rng = _fmt(axis.origin + iso.range_bin * axis.bin_width)
            for n, (t, p) in enumerate(iso.vertices):
                yield (isoset.polarization, _fmt(iso.level), rng, n, _fmt(t), _fmt(p), int(iso.closed))

    return _write_rows(ISOLINE_COLUMNS, rows())


@dataclass
class IsolineRecord:
    polarization: str
    level: float
    range_m: float
    vertices: np.ndarray
    closed: bool


def read_isolines_csv(text: str) -> list[IsolineRecord]:
    out: list[IsolineRecord] = []
    current: list[tuple[float, float]] = []
    meta = None
    for row in _read_rows(text, ISOLINE_COLUMNS):
        pol, level, rng, idx, t, p, closed = row
        if int(idx) == 0:
            if meta is not None:
                out.append(IsolineRecord(*meta[:3], np.array(current), meta[3]))
            meta = (pol, float(level), float(rng), bool(int(closed)))
            current = []
        current.append((float(t), float(p)))
    if meta is not None:
        out.append(IsolineRecord(*meta[:3], np.array(current), meta[3]))
    return out


def records_to_isolines(records: Sequence[IsolineRecord], axis: RangeAxis) -> list[Isoline]:
    return [Isoline(r.level, range_to_bin(axis, r.range_m), r.vertices, r.closed) for r in records]


# -- regions -----------------------------------------------------------------

REGION_COLUMNS = ("region_id", "polarization", "theta_min", "theta_max", "phi_min", "phi_max",
                  "range_min_m", "range_max_m", "bin_min", "bin_max", "peak_db", "peak_theta_idx",
                  "peak_phi_idx", "peak_bin", "peak_theta_deg", "peak_phi_deg", "peak_range_m", "members")


def regions_csv(regions: Sequence[Region]) -> str:
    rows = ((r.id, r.polarization, *map(_fmt, r.bbox.theta), *map(_fmt, r.bbox.phi),
             *map(_fmt, r.bbox.range), *r.bins, _fmt(r.peak_value), *r.peak_index,
             *map(_fmt, r.peak_position), " ".join(map(str, r.members))) for r in regions)
    return _write_rows(REGION_COLUMNS, rows)


def read_regions_csv(text: str) -> list[Region]:
    out = []
    for row in _read_rows(text, REGION_COLUMNS):
        f = [float(x) for x in row[2:8]]
        out.append(Region(
            id=row[0], polarization=row[1],
            members=tuple(int(m) for m in row[17].split()),
            bbox=Window((f[0], f[1]), (f[2], f[3]), (f[4], f[5])),
            bins=(int(row[8]), int(row[9])), peak_value=float(row[10]),
            peak_index=(int(row[11]), int(row[12]), int(row[13])),
            peak_position=(float(row[14]), float(row[15]), float(row[16]))))
    return out

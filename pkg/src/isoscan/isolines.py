"""Constant-level isolines of 3D radar images and their grouping into regions.

Each range slice is contoured independently with marching squares; contours
of neighbouring slices are stacked, not stitched into surfaces. A node is
"above" a level when its value is strictly greater. Saddle cells are resolved
with the average of the four corners.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import ValidationError
from .imaging import PolarimetricImage, ScanGrid, Window, _pol_key, image_max_in_window

MIN_VERTICES = 3
DEFAULT_LEVEL_STEP = 2.0

# Cell edges: 0 top (a-b), 1 right (b-c), 2 bottom (d-c), 3 left (a-d), with
# corners a=(i, j), b=(i, j+1), c=(i+1, j+1), d=(i+1, j).
_CORNER_EDGES = ((0, 3), (0, 1), (1, 2), (2, 3))  # a, b, c, d


@dataclass
class Isoline:
    level: float
    range_bin: int
    vertices: np.ndarray  # (n, 2): theta, phi in degrees
    closed: bool

    @property
    def distinct_vertex_count(self) -> int:
        return len(self.vertices) - 1 if self.closed else len(self.vertices)

    def bounds(self) -> tuple[float, float, float, float]:
        t, p = self.vertices[:, 0], self.vertices[:, 1]
        return float(t.min()), float(t.max()), float(p.min()), float(p.max())


@dataclass
class IsolineSet:
    polarization: str
    min_threshold: float
    levels: list[float]
    isolines: list[Isoline]
    grid: ScanGrid | None = None

    def __len__(self) -> int:
        return len(self.isolines)

    def count_by_level(self) -> dict[float, int]:
        counts = {lv: 0 for lv in self.levels}
        for iso in self.isolines:
            counts[iso.level] += 1
        return counts


@dataclass
class Region:
    id: str
    polarization: str
    members: tuple[int, ...]
    bbox: Window
    bins: tuple[int, int]
    peak_value: float
    peak_index: tuple[int, int, int]
    peak_position: tuple[float, float, float] = field(default=(0.0, 0.0, 0.0))


def _edge_points(v: np.ndarray, level: float, theta: np.ndarray, phi: np.ndarray):
    """Crossing flags and vertex coordinates on horizontal and vertical edges."""
    above = v > level
    h_cross = above[:, :-1] != above[:, 1:]
    v_cross = above[:-1, :] != above[1:, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        th = (level - v[:, :-1]) / (v[:, 1:] - v[:, :-1])
        tv = (level - v[:-1, :]) / (v[1:, :] - v[:-1, :])
    # a -inf node pushes the crossing onto its finite neighbour
    th = np.where(np.isnan(th), 1.0, th)
    tv = np.where(np.isnan(tv), 1.0, tv)
    h_phi = phi[:-1][None, :] + th * np.diff(phi)[None, :]
    v_theta = theta[:-1][:, None] + tv * np.diff(theta)[:, None]
    return above, h_cross, v_cross, h_phi, v_theta


def extract_slice_contours(field2d: np.ndarray, level: float, theta: Sequence[float] | None = None,
                           phi: Sequence[float] | None = None, range_bin: int = 0) -> list[Isoline]:
    """Marching-squares isolines of one (theta, phi) slice at ``level``.

    ``theta``/``phi`` give the node coordinates (default: indices). Contours
    leaving the slice are open, all others closed with the first vertex
    repeated at the end. ``-inf`` nodes count as below every level.
    """
    v = np.asarray(field2d, dtype=float)
    if v.ndim != 2 or v.shape[0] < 2 or v.shape[1] < 2:
        raise ValueError(f"slice must be at least 2x2, got {v.shape}")
    if not math.isfinite(level):
        raise ValueError("level must be finite")
    n_rows, n_cols = v.shape
    theta = np.arange(n_rows, dtype=float) if theta is None else np.asarray(theta, dtype=float)
    phi = np.arange(n_cols, dtype=float) if phi is None else np.asarray(phi, dtype=float)

    above, h_cross, v_cross, h_phi, v_theta = _edge_points(v, level, theta, phi)
    n_h = n_rows * (n_cols - 1)

    # edge ids of every cell: top, right, bottom, left
    ci, cj = np.meshgrid(np.arange(n_rows - 1), np.arange(n_cols - 1), indexing="ij")
    cell_edges = np.stack([
        ci * (n_cols - 1) + cj,
        n_h + ci * n_cols + cj + 1,
        (ci + 1) * (n_cols - 1) + cj,
        n_h + ci * n_cols + cj,
    ], axis=-1)
    crossed = np.stack([h_cross[:-1, :], v_cross[:, 1:], h_cross[1:, :], v_cross[:, :-1]], axis=-1)
    n_crossed = crossed.sum(axis=-1)

    segments: list[tuple[int, int]] = []
    simple = np.nonzero(n_crossed == 2)
    if simple[0].size:
        e = cell_edges[simple]
        which = np.nonzero(crossed[simple])[1].reshape(-1, 2)
        pairs = np.take_along_axis(e, which, axis=1)
        segments.extend(map(tuple, pairs.tolist()))
    for i, j in zip(*np.nonzero(n_crossed == 4)):
        corners = (v[i, j], v[i, j + 1], v[i + 1, j + 1], v[i + 1, j])
        center_above = float(np.mean(corners)) > level
        corner_above = (above[i, j], above[i, j + 1], above[i + 1, j + 1], above[i + 1, j])
        for k in range(4):
            if corner_above[k] != center_above:
                e0, e1 = _CORNER_EDGES[k]
                segments.append((int(cell_edges[i, j, e0]), int(cell_edges[i, j, e1])))

    if not segments:
        return []

    def point(edge: int) -> tuple[float, float]:
        if edge < n_h:
            r, c = divmod(edge, n_cols - 1)
            return theta[r], float(h_phi[r, c])
        r, c = divmod(edge - n_h, n_cols)
        return float(v_theta[r, c]), phi[c]

    return [Isoline(float(level), int(range_bin),
                    np.array([point(e) for e in chain], dtype=float), closed)
            for chain, closed in _chain(segments)]


def _chain(segments: list[tuple[int, int]]) -> list[tuple[list[int], bool]]:
    """Join segments sharing an edge into polylines of edge ids."""
    incident: dict[int, list[int]] = {}
    for s, (a, b) in enumerate(segments):
        incident.setdefault(a, []).append(s)
        incident.setdefault(b, []).append(s)
    used = [False] * len(segments)

    def walk(start: int) -> list[int]:
        chain = [start]
        edge = start
        while True:
            nxt = next((s for s in incident[edge] if not used[s]), None)
            if nxt is None:
                return chain
            used[nxt] = True
            a, b = segments[nxt]
            edge = b if a == edge else a
            chain.append(edge)

    out = []
    for e in sorted(k for k, segs in incident.items() if len(segs) == 1):
        if not used[incident[e][0]]:
            out.append((walk(e), False))
    for s, (a, _) in enumerate(segments):
        if not used[s]:
            chain = walk(a)
            out.append((chain, chain[0] == chain[-1] and len(chain) > 1))
    return out


def default_levels(min_threshold: float, step: float = DEFAULT_LEVEL_STEP) -> list[float]:
    if min_threshold > 0:
        return [float(min_threshold)]
    n = int(math.floor(-min_threshold / step + 1e-9))
    return [float(min_threshold + k * step) for k in range(n + 1)]


def level_schedule(min_threshold: float, extra: Sequence[float] = ()) -> list[float]:
    bad = [lv for lv in extra if lv < min_threshold]
    if bad:
        raise ValidationError(f"levels {bad} lie below the minimum threshold {min_threshold}")
    return sorted(set(default_levels(min_threshold)) | {float(lv) for lv in extra})


def extract_isolines(image: PolarimetricImage, polarization: str,
                     levels: Sequence[float] = (), min_threshold: float = -10.0) -> IsolineSet:
    """Isolines of every range slice at the default schedule plus ``levels``."""
    pol = "VV" if _pol_key(polarization) == "V" else "VH"
    schedule = level_schedule(min_threshold, levels)
    grid = image.grid
    data = image.field(pol)
    slice_max = data.max(axis=(0, 1))
    thetas, phis = grid.thetas, grid.phis
    found: list[Isoline] = []
    for k in np.nonzero(slice_max > schedule[0])[0]:
        sl = data[:, :, k]
        for level in schedule:
            if not slice_max[k] > level:
                break
            found.extend(iso for iso in extract_slice_contours(sl, level, thetas, phis, int(k))
                         if iso.distinct_vertex_count >= MIN_VERTICES)
    return IsolineSet(pol, float(min_threshold), schedule, found, grid)


def _linked_pairs(boxes: np.ndarray, bins: np.ndarray, d_theta: float, d_phi: float,
                  d_bins: int) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(bins, kind="stable")
    sb = bins[order]
    rows, cols = [], []
    for n, i in enumerate(order):
        hi = np.searchsorted(sb, sb[n] + d_bins, side="right")
        cand = order[n + 1:hi]
        if cand.size == 0:
            continue
        gap_t = np.maximum(boxes[cand, 0] - boxes[i, 1], boxes[i, 0] - boxes[cand, 1])
        gap_p = np.maximum(boxes[cand, 2] - boxes[i, 3], boxes[i, 2] - boxes[cand, 3])
        hit = cand[(gap_t <= d_theta + 1e-9) & (gap_p <= d_phi + 1e-9)]
        rows.extend([i] * hit.size)
        cols.extend(hit.tolist())
    return np.array(rows, dtype=int), np.array(cols, dtype=int)


def _snap_out(lo: float, hi: float, start: float, step: float) -> tuple[float, float]:
    i0 = math.floor((lo - start) / step + 1e-9)
    i1 = math.ceil((hi - start) / step - 1e-9)
    return start + i0 * step, start + i1 * step


def cluster_regions(isolines: IsolineSet, image: PolarimetricImage, theta_steps: float = 2,
                    phi_steps: float = 2, range_bins: int = 3) -> list[Region]:
    """Single-linkage grouping of isolines with nearby bounding boxes.

    Region boxes are widened to the enclosing grid nodes. Regions come back
    sorted by (first range bin, theta, phi) so that the labelling does not
    depend on the order of the input isolines.
    """
    grid = image.grid
    n = len(isolines.isolines)
    if n == 0:
        return []
    boxes = np.array([iso.bounds() for iso in isolines.isolines])
    bins = np.array([iso.range_bin for iso in isolines.isolines])
    rows, cols = _linked_pairs(boxes, bins, theta_steps * grid.theta_step,
                               phi_steps * grid.phi_step, range_bins)
    adj = coo_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))
    _, labels = connected_components(adj, directed=False)

    field3d = image.field(isolines.polarization)
    axis = grid.range_axis
    groups = []
    for lab in np.unique(labels):
        members = np.nonzero(labels == lab)[0]
        b = boxes[members]
        k0, k1 = int(bins[members].min()), int(bins[members].max())
        bbox = Window(_snap_out(b[:, 0].min(), b[:, 1].max(), grid.theta_start, grid.theta_step),
                      _snap_out(b[:, 2].min(), b[:, 3].max(), grid.phi_start, grid.phi_step),
                      (axis.origin + k0 * axis.bin_width, axis.origin + k1 * axis.bin_width))
        groups.append(((k0, bbox.theta[0], bbox.phi[0], k1, bbox.theta[1], bbox.phi[1]),
                       members, bbox, (k0, k1)))
    groups.sort(key=lambda g: g[0])

    regions = []
    for r, (_, members, bbox, kk) in enumerate(groups, start=1):
        value, idx = image_max_in_window(field3d, grid, bbox)
        regions.append(Region(
            id=f"R{r}", polarization=isolines.polarization,
            members=tuple(int(m) for m in members), bbox=bbox, bins=kk,
            peak_value=value, peak_index=idx,
            peak_position=(float(grid.thetas[idx[0]]), float(grid.phis[idx[1]]),
                           float(grid.ranges[idx[2]]))))
    return regions


def boxes_intersect(a: Window, b: Window) -> bool:
    return all(lo1 <= hi2 and lo2 <= hi1
               for (lo1, hi1), (lo2, hi2) in ((a.theta, b.theta), (a.phi, b.phi), (a.range, b.range)))


def region_overlap(first: Sequence[Region], second: Sequence[Region]) -> list[tuple[str, str]]:
    """Id pairs of regions from two sets (e.g. VV and VH) whose boxes intersect.

    VV and VH regions are extracted independently; this is how their
    co-location is checked rather than assumed.
    """
    return [(a.id, b.id) for a in first for b in second if boxes_intersect(a.bbox, b.bbox)]

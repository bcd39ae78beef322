import numpy as np
import pytest
from PIL import Image

from isoscan.errors import RangeAxisError
from isoscan.imaging import PolarimetricImage
from isoscan.render import node_to_pixel, projection, render, render_array, to_gray
from isoscan.voxio import IsolineRecord


@pytest.fixture
def ramp(small_grid):
    t = small_grid.thetas[:, None, None]
    field = np.broadcast_to(t, small_grid.shape).astype(np.float32).copy()
    return PolarimetricImage(small_grid, field, field)


def test_to_gray_limits():
    g = to_gray(np.array([[-np.inf, 0.0], [5.0, 10.0]]))
    assert g.tolist() == [[0, 0], [128, 255]]
    assert not to_gray(np.full((3, 3), 4.0)).any()


def test_highest_theta_on_top(ramp):
    img = render_array(ramp.grid, projection(ramp, "VV"), scale=1)
    arr = np.asarray(img)
    assert arr.shape == (9, 21)
    assert arr[0, 0] == 255 and arr[-1, 0] == 0


def test_scale_blocks(ramp):
    arr = np.asarray(render_array(ramp.grid, projection(ramp, "VV"), scale=3))
    assert arr.shape == (27, 63)
    assert (arr[:3, :3] == arr[0, 0]).all()


def test_projection_slice_bounds(ramp):
    assert projection(ramp, "VH", 3).shape == (9, 21)
    with pytest.raises(RangeAxisError):
        projection(ramp, "VH", 64)


def test_node_to_pixel_centres(small_grid):
    assert node_to_pixel(small_grid, small_grid.theta_last, small_grid.phi_start, 4) == (1.5, 1.5)


def test_overlay_drawn_in_red(ramp, tmp_path):
    rec = IsolineRecord("VV", 0.0, 1.0, np.array([[0.0, -2.0], [0.0, 2.0]]), False)
    out = tmp_path / "o.png"
    render(ramp, out, "VV", None, [rec], scale=4)
    arr = np.asarray(Image.open(out))
    assert arr.ndim == 3
    reds = (arr[..., 0] == 255) & (arr[..., 1] == 0)
    assert reds.any()


def test_slice_overlay_filtered_by_range(ramp, tmp_path):
    bw = ramp.grid.range_axis.bin_width
    rec = IsolineRecord("VV", 0.0, 10 * bw, np.array([[0.0, -2.0], [0.0, 2.0]]), False)
    img = render(ramp, tmp_path / "s.png", "VV", 3, [rec])
    assert img.mode == "L"  # nothing left to draw, stays grayscale
    img = render(ramp, tmp_path / "s.png", "VV", 10, [rec])
    assert img.mode == "RGB"


def test_render_is_byte_stable(ramp, tmp_path):
    render(ramp, tmp_path / "a.png")
    render(ramp, tmp_path / "b.png")
    assert (tmp_path / "a.png").read_bytes() == (tmp_path / "b.png").read_bytes()

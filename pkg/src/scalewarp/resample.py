"""Apply warp grids to rasters and map boxes into warped space.

Warping resamples the source at the grid's output->source coordinates,
producing output of identical size (the in-place pixel budget). Unwarping
resamples a warped raster back through the piecewise-linear inverse and
accepts lower-resolution feature maps, whose geometry is rescaled
proportionally the way a backbone stride scales coordinates.
"""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from .errors import ShapeMismatchError
from .geometry import BBox, Raster
from .grid import InverseGrid, WarpGrid

log = logging.getLogger(__name__)

INTERP_MODES = ("bilinear", "nearest")


def _check_interp(interp: str) -> None:
    if interp not in INTERP_MODES:
        raise ValueError(f"interp must be one of {INTERP_MODES}, got {interp!r}")


def _gather_axis(data: np.ndarray, coords: np.ndarray, axis: int, interp: str) -> np.ndarray:
    """Resample one axis of (H, W, C) data at fractional coordinates."""
    n = data.shape[axis]
    coords = np.clip(coords, 0.0, n - 1.0)
    if interp == "nearest":
        idx = np.rint(coords).astype(np.intp)
        return np.take(data, idx, axis=axis)
    lo = np.clip(np.floor(coords).astype(np.intp), 0, n - 2)
    frac = coords - lo
    shape = [1, 1, 1]
    shape[axis] = len(coords)
    frac = frac.reshape(shape)
    a = np.take(data, lo, axis=axis)
    b = np.take(data, lo + 1, axis=axis)
    return a * (1.0 - frac) + b * frac


def warp_raster(img: Raster, grid: WarpGrid, interp: str = "bilinear") -> Raster:
    """Resample an image through the warp grid; output dims equal input dims."""
    _check_interp(interp)
    if (img.height, img.width) != (grid.image_h, grid.image_w):
        raise ShapeMismatchError((grid.image_h, grid.image_w), (img.height, img.width), "image")
    sx = grid.source_x(np.arange(img.width, dtype=np.float64))
    sy = grid.source_y(np.arange(img.height, dtype=np.float64))
    out = _gather_axis(img.data, sx, axis=1, interp=interp)
    out = _gather_axis(out, sy, axis=0, interp=interp)
    return Raster(out)


def unwarp_raster(feat: Raster, inv: InverseGrid, interp: str = "bilinear") -> Raster:
    """Resample a warped raster back to unwarped geometry at its own resolution."""
    _check_interp(interp)
    if feat.height < 2 or feat.width < 2:
        raise ShapeMismatchError((2, 2), (feat.height, feat.width), "feature raster (minimum)")
    rx = (feat.width - 1.0) / (inv.image_w - 1.0)
    ry = (feat.height - 1.0) / (inv.image_h - 1.0)
    wx = inv.output_x(np.arange(feat.width, dtype=np.float64) / rx) * rx
    wy = inv.output_y(np.arange(feat.height, dtype=np.float64) / ry) * ry
    out = _gather_axis(feat.data, wx, axis=1, interp=interp)
    out = _gather_axis(out, wy, axis=0, interp=interp)
    return Raster(out)


def warp_boxes(boxes: Sequence[BBox], grid: WarpGrid) -> tuple[list[BBox], int]:
    """Map boxes into warped output space via the forward (source->output) map.

    Corner coordinates are clamped to the image rectangle before mapping
    (grids are endpoint-pinned, so this only guards sub-pixel overhang).
    Boxes entirely outside the image are skipped; the count of skipped
    boxes is returned alongside the mapped list.
    """
    w1, h1 = grid.image_w - 1.0, grid.image_h - 1.0
    inv_x_src, inv_x_out = grid.map_x, grid.knots_x
    inv_y_src, inv_y_out = grid.map_y, grid.knots_y
    out: list[BBox] = []
    skipped = 0
    for b in boxes:
        if b.x2 < 0 or b.x1 > w1 or b.y2 < 0 or b.y1 > h1:
            skipped += 1
            continue
        x1, x2 = np.clip([b.x1, b.x2], 0.0, w1)
        y1, y2 = np.clip([b.y1, b.y2], 0.0, h1)
        if not (x2 > x1 and y2 > y1):
            skipped += 1
            continue
        nx1, nx2 = np.interp([x1, x2], inv_x_src, inv_x_out)
        ny1, ny2 = np.interp([y1, y2], inv_y_src, inv_y_out)
        out.append(BBox.from_corners(float(nx1), float(ny1), float(nx2), float(ny2), b.class_id))
    if skipped:
        log.warning("warp_boxes skipped %d out-of-range box(es)", skipped)
    return out, skipped

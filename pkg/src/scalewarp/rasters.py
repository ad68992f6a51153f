"""Portable raster and grid file formats.

Images travel as PNG (8-bit, via Pillow). Float rasters (saliency fields,
feature maps, dense grids) use a minimal self-describing binary: a 4-byte
magic, uint32 height/width/channels, then float32 little-endian row-major
payload. Warp grids serialize as CSV with two rows of knots (x then y);
because endpoints are pinned to the image extent, the image dims are
recoverable from the knot values alone.
"""

from __future__ import annotations

import io
import struct
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import InputError, InvalidGridError
from .geometry import Raster
from .grid import WarpGrid

RAS_MAGIC = b"RAS1"
_PNG_MODES = {1: "L", 3: "RGB", 4: "RGBA"}


def write_raster(raster: Raster, path: str | Path) -> None:
    """Write PNG for uint8 data or the float32 binary for everything else."""
    path = Path(path)
    if path.suffix.lower() == ".png":
        if raster.dtype != np.uint8:
            raise InputError(f"PNG output requires uint8 data, got {raster.dtype}")
        mode = _PNG_MODES.get(raster.channels)
        if mode is None:
            raise InputError(f"PNG output supports 1/3/4 channels, got {raster.channels}")
        arr = raster.data[:, :, 0] if raster.channels == 1 else raster.data
        Image.fromarray(np.ascontiguousarray(arr), mode=mode).save(path, format="PNG")
        return
    payload = np.ascontiguousarray(raster.data, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(RAS_MAGIC)
        fh.write(struct.pack("<III", raster.height, raster.width, raster.channels))
        fh.write(payload.tobytes())


def read_raster(path: str | Path) -> Raster:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read raster: {exc}") from exc
    if path.suffix.lower() == ".png":
        try:
            img = Image.open(io.BytesIO(blob))
            img.load()
        except Exception as exc:
            raise InputError(f"cannot decode PNG {path}: {exc}") from exc
        return Raster(np.asarray(img))
    if len(blob) < 16 or blob[:4] != RAS_MAGIC:
        raise InputError(f"{path} is not a portable raster (bad magic)")
    h, w, c = struct.unpack("<III", blob[4:16])
    expected = 16 + 4 * h * w * c
    if len(blob) != expected:
        raise InputError(f"{path} truncated: expected {expected} bytes, got {len(blob)}")
    data = np.frombuffer(blob, dtype="<f4", offset=16).reshape(h, w, c)
    if not np.isfinite(data).all():
        raise InputError(f"{path} contains non-finite values")
    return Raster(data)


def _format_row(values) -> str:
    return ",".join(repr(float(v)) for v in values)


def write_grid_csv(grid: WarpGrid, path: str | Path) -> None:
    """Two CSV rows: x knots then y knots, full float precision."""
    text = _format_row(grid.map_x) + "\n" + _format_row(grid.map_y) + "\n"
    Path(path).write_text(text)


def read_grid_csv(path: str | Path) -> WarpGrid:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read grid: {exc}") from exc
    rows = [line for line in lines if line.strip()]
    if len(rows) != 2:
        raise InputError(f"grid CSV must have exactly 2 rows, got {len(rows)}")
    try:
        map_x = np.array([float(v) for v in rows[0].split(",")])
        map_y = np.array([float(v) for v in rows[1].split(",")])
    except ValueError as exc:
        raise InputError(f"malformed grid CSV: {exc}") from exc
    image_w = int(round(map_x[-1])) + 1
    image_h = int(round(map_y[-1])) + 1
    try:
        return WarpGrid(map_x, map_y, image_h, image_w)
    except InvalidGridError as exc:
        raise InputError(f"invalid grid in {path}: {exc}") from exc


def grid_raster(grid: WarpGrid) -> Raster:
    """Dense per-pixel source coordinates as a 2-channel float raster."""
    sx = grid.source_x(np.arange(grid.image_w, dtype=np.float64))
    sy = grid.source_y(np.arange(grid.image_h, dtype=np.float64))
    out = np.empty((grid.image_h, grid.image_w, 2), dtype=np.float32)
    out[:, :, 0] = sx[None, :]
    out[:, :, 1] = sy[:, None]
    return Raster(out)

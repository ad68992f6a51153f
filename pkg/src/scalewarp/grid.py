"""Separable axis-aligned warp grids and their piecewise-linear inverses.

A warp grid is a pair of strictly increasing 1-D maps from output
coordinates to source coordinates, built by kernel-weighted averaging of
source positions against the marginalized saliency. Whole rows or columns
stretch or compress; the warp is fold-free by construction because the
weighted mean of source positions is strictly increasing in the kernel
center for positive weights.

The kernel window extends past the image borders with edge-replicated
saliency so that uniform guidance yields an identity map everywhere; a
final affine rescale pins the endpoints to the exact image extent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidGridError, OutOfRangeError
from .saliency import SaliencyMap

DEFAULT_GRID = 31
# Default kernel bandwidth, in units of the knot lattice spacing.
KERNEL_SIGMA_LATTICE_FRACTION = 1.0 / 16.0
KERNEL_TRUNCATION_SIGMAS = 4.0


def default_kernel_sigma(n_knots: int, extent_px: int) -> float:
    """Bandwidth of n_knots/16 lattice units expressed in pixels."""
    spacing = (extent_px - 1.0) / (n_knots - 1.0)
    return KERNEL_SIGMA_LATTICE_FRACTION * n_knots * spacing


def _validate_axis_map(values: np.ndarray, extent_px: int, axis: str) -> None:
    if values.ndim != 1 or len(values) < 2:
        raise InvalidGridError(f"map_{axis} must be 1-D with at least 2 knots")
    if not np.isfinite(values).all():
        raise InvalidGridError(f"map_{axis} contains non-finite values")
    if not np.all(np.diff(values) > 0):
        raise InvalidGridError(f"map_{axis} is not strictly increasing")
    if values[0] != 0.0 or values[-1] != extent_px - 1.0:
        raise InvalidGridError(
            f"map_{axis} endpoints must be pinned to [0, {extent_px - 1}], "
            f"got [{values[0]}, {values[-1]}]"
        )


@dataclass(frozen=True)
class WarpGrid:
    """Monotone output->source coordinate maps for the two image axes."""

    map_x: np.ndarray = field(repr=False)
    map_y: np.ndarray = field(repr=False)
    image_h: int
    image_w: int

    def __post_init__(self):
        mx = np.asarray(self.map_x, dtype=np.float64).copy()
        my = np.asarray(self.map_y, dtype=np.float64).copy()
        _validate_axis_map(mx, self.image_w, "x")
        _validate_axis_map(my, self.image_h, "y")
        mx.setflags(write=False)
        my.setflags(write=False)
        object.__setattr__(self, "map_x", mx)
        object.__setattr__(self, "map_y", my)

    @property
    def knots_x(self) -> np.ndarray:
        """Output-space positions of the x knots (pixels)."""
        return np.linspace(0.0, self.image_w - 1.0, len(self.map_x))

    @property
    def knots_y(self) -> np.ndarray:
        return np.linspace(0.0, self.image_h - 1.0, len(self.map_y))

    def source_x(self, u) -> np.ndarray:
        """Source x for output x coordinates, by linear interpolation."""
        return np.interp(u, self.knots_x, self.map_x)

    def source_y(self, v) -> np.ndarray:
        return np.interp(v, self.knots_y, self.map_y)

    @classmethod
    def identity(
        cls, image_h: int, image_w: int, grid_h: int = DEFAULT_GRID, grid_w: int = DEFAULT_GRID
    ) -> "WarpGrid":
        return cls(
            np.linspace(0.0, image_w - 1.0, grid_w),
            np.linspace(0.0, image_h - 1.0, grid_h),
            image_h,
            image_w,
        )


@dataclass(frozen=True)
class InverseGrid:
    """Piecewise-linear source->output maps, stored as exact breakpoints.

    Breakpoint arrays pair strictly increasing source coordinates with the
    output coordinates whose warp lands there, so ``inv(map(knot)) == knot``
    holds exactly at every knot of the originating grid.
    """

    src_x: np.ndarray = field(repr=False)
    out_x: np.ndarray = field(repr=False)
    src_y: np.ndarray = field(repr=False)
    out_y: np.ndarray = field(repr=False)
    image_h: int
    image_w: int

    def __post_init__(self):
        for name in ("src_x", "out_x", "src_y", "out_y"):
            arr = np.asarray(getattr(self, name), dtype=np.float64).copy()
            if not np.all(np.diff(arr) > 0):
                raise InvalidGridError(f"inverse breakpoints {name} must be strictly increasing")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if len(self.src_x) != len(self.out_x) or len(self.src_y) != len(self.out_y):
            raise InvalidGridError("inverse breakpoint arrays must pair up")

    def output_x(self, x) -> np.ndarray:
        """Output x for source x coordinates."""
        return np.interp(x, self.src_x, self.out_x)

    def output_y(self, y) -> np.ndarray:
        return np.interp(y, self.src_y, self.out_y)


def _axis_map(
    marginal: np.ndarray,
    node_coords: np.ndarray,
    knot_coords: np.ndarray,
    sigma: float,
    extent_px: int,
) -> np.ndarray:
    """Kernel-weighted mean of source positions at each output knot."""
    spacing = node_coords[1] - node_coords[0]
    # Window never truncates inside the domain: replicate the border
    # saliency outward past the kernel radius.
    radius = max(KERNEL_TRUNCATION_SIGMAS * sigma, 2.0 * spacing)
    n_pad = int(math.ceil(radius / spacing)) + 1
    left = node_coords[0] - spacing * np.arange(n_pad, 0, -1)
    right = node_coords[-1] + spacing * np.arange(1, n_pad + 1)
    nodes = np.concatenate([left, node_coords, right])
    values = np.concatenate(
        [np.full(n_pad, marginal[0]), marginal, np.full(n_pad, marginal[-1])]
    )

    dist = nodes[None, :] - knot_coords[:, None]
    kern = np.exp(-0.5 * (dist / sigma) ** 2)
    kern[np.abs(dist) > radius] = 0.0
    weights = kern * values[None, :]
    denom = weights.sum(axis=1)
    if not (denom > 0).all():
        raise InvalidGridError("zero kernel mass at a knot; saliency is not finalized")
    raw = (weights * nodes[None, :]).sum(axis=1) / denom

    span = raw[-1] - raw[0]
    if not span > 0:
        raise InvalidGridError("degenerate axis map: zero source span")
    scaled = (raw - raw[0]) * ((extent_px - 1.0) / span)
    scaled[0] = 0.0
    scaled[-1] = extent_px - 1.0
    return scaled


def build_grid(
    sal: SaliencyMap,
    kernel_sigma: float | None = None,
    grid_h: int = DEFAULT_GRID,
    grid_w: int = DEFAULT_GRID,
) -> WarpGrid:
    """Build the inverse transform knots from a finalized saliency map.

    ``kernel_sigma`` is in pixels; ``None`` selects the default bandwidth
    of one sixteenth of the knot count, in knot-lattice units, per axis.
    The saliency is marginalized with the mean along the orthogonal axis;
    a mean reacts less to isolated spikes than a max would.
    """
    if grid_h < 2 or grid_w < 2:
        raise ValueError("warp grid must have at least 2 knots per axis")
    vals = sal.values
    if not (vals > 0).all():
        raise InvalidGridError("saliency must be finalized (strictly positive everywhere)")
    total = vals.sum()
    if not total > 0:
        raise InvalidGridError("saliency has zero total mass")

    marg_x = vals.mean(axis=0)
    marg_y = vals.mean(axis=1)
    sigma_x = kernel_sigma if kernel_sigma is not None else default_kernel_sigma(grid_w, sal.image_w)
    sigma_y = kernel_sigma if kernel_sigma is not None else default_kernel_sigma(grid_h, sal.image_h)
    if not (sigma_x > 0 and sigma_y > 0):
        raise ValueError(f"kernel sigma must be positive, got {kernel_sigma}")

    knots_x = np.linspace(0.0, sal.image_w - 1.0, grid_w)
    knots_y = np.linspace(0.0, sal.image_h - 1.0, grid_h)
    map_x = _axis_map(marg_x, sal.x_coords, knots_x, sigma_x, sal.image_w)
    map_y = _axis_map(marg_y, sal.y_coords, knots_y, sigma_y, sal.image_h)
    return WarpGrid(map_x, map_y, sal.image_h, sal.image_w)


def _invert_axis(map_vals: np.ndarray, knot_coords: np.ndarray, samples: int | None):
    src = map_vals
    out = knot_coords
    if samples is not None:
        if samples < 2:
            raise ValueError("source lattice size must be >= 2")
        uniform = np.linspace(src[0], src[-1], samples)
        merged = np.union1d(src, uniform)
        return merged, np.interp(merged, src, out)
    return src.copy(), out.copy()


def invert_grid(grid: WarpGrid, samples: int | None = None) -> InverseGrid:
    """Exact piecewise-linear inverse of a warp grid.

    ``samples`` optionally densifies the breakpoint arrays with a uniform
    source lattice of that size; the original knots are always kept, so
    the inverse stays exact everywhere.
    """
    sx, ox = _invert_axis(grid.map_x, grid.knots_x, samples)
    sy, oy = _invert_axis(grid.map_y, grid.knots_y, samples)
    return InverseGrid(sx, ox, sy, oy, grid.image_h, grid.image_w)


def forward_map_point(grid: WarpGrid, p: tuple[float, float]) -> tuple[float, float]:
    """Map a source-image point into warped output space.

    Applies the piecewise-linear inverse of each axis map with linear
    interpolation between knots.
    """
    x, y = float(p[0]), float(p[1])
    if not (0.0 <= x <= grid.image_w - 1.0 and 0.0 <= y <= grid.image_h - 1.0):
        raise OutOfRangeError(
            f"point ({x}, {y}) outside image rectangle "
            f"[0, {grid.image_w - 1}] x [0, {grid.image_h - 1}]"
        )
    ox = float(np.interp(x, grid.map_x, grid.knots_x))
    oy = float(np.interp(y, grid.map_y, grid.knots_y))
    return (ox, oy)

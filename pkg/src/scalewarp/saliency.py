"""Saliency guidance fields that attract sampling density during warping.

Three generators are provided: instance-level (sum of unit-peak Gaussians
at annotated boxes), a static dataset-average prior, and a geometric
vanishing-point prior. Maps are finalized by clipping to [0, U] and adding
a small uniform floor so object-free images drive an identity warp and the
warp integrals never divide by zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateDistributionError
from .geometry import BBox, ScaleDistribution

DEFAULT_P = 2.0 ** 8
DEFAULT_U = 1.0
DEFAULT_FLOOR_EPS = 1e-2
DEFAULT_LATTICE = 64


@dataclass(frozen=True)
class SaliencyParams:
    """Knobs shared by all saliency generators."""

    P: float = DEFAULT_P
    U: float = DEFAULT_U
    floor_eps: float = DEFAULT_FLOOR_EPS
    grid_h: int = DEFAULT_LATTICE
    grid_w: int = DEFAULT_LATTICE

    def __post_init__(self):
        if not self.P > 0:
            raise ValueError(f"P must be positive, got {self.P}")
        if not self.U > 0:
            raise ValueError(f"U must be positive, got {self.U}")
        if not 0 < self.floor_eps < self.U:
            raise ValueError(f"floor_eps must lie in (0, U), got {self.floor_eps}")
        if self.grid_h < 2 or self.grid_w < 2:
            raise ValueError("saliency lattice must be at least 2x2")


@dataclass(frozen=True)
class SaliencyMap:
    """Nonnegative guidance field on a coarse lattice over the image.

    ``values[r, c]`` sits at image coordinates ``(y_coords[r], x_coords[c])``;
    the lattice spans the full image extent. Finalized maps satisfy
    ``floor_eps <= value <= U + floor_eps`` cellwise.
    """

    values: np.ndarray = field(repr=False)
    image_h: int
    image_w: int

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 2 or arr.shape[1] < 2:
            raise ValueError(f"saliency lattice must be 2-D and >= 2x2, got {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("saliency values must be finite")
        if not (arr > 0).any():
            raise ValueError("saliency map must not be all-zero")
        if self.image_h < 2 or self.image_w < 2:
            raise ValueError("image dims must be >= 2")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def grid_h(self) -> int:
        return self.values.shape[0]

    @property
    def grid_w(self) -> int:
        return self.values.shape[1]

    @property
    def x_coords(self) -> np.ndarray:
        return np.linspace(0.0, self.image_w - 1.0, self.grid_w)

    @property
    def y_coords(self) -> np.ndarray:
        return np.linspace(0.0, self.image_h - 1.0, self.grid_h)

    @classmethod
    def from_external(cls, values, image_h: int, image_w: int, params: SaliencyParams) -> "SaliencyMap":
        """Adopt an externally produced field, forcing it into finalized form.

        Values are clipped to [0, U] and floored with ``max`` so that an
        already-finalized map passes through unchanged.
        """
        arr = np.asarray(values, dtype=np.float64)
        arr = np.clip(arr, 0.0, params.U + params.floor_eps)
        arr = np.maximum(arr, params.floor_eps)
        return cls(arr, image_h, image_w)


def floor_log2(x: float) -> int:
    """Exact floor(log2(x)) for positive finite floats via the exponent bits."""
    if not (x > 0 and math.isfinite(x)):
        raise ValueError(f"floor_log2 requires a positive finite value, got {x}")
    m, e = math.frexp(x)  # x = m * 2**e with m in [0.5, 1)
    return e - 1


def expansion_factor(dist: ScaleDistribution) -> int:
    """Power-of-two warping strength from the small/medium/large fractions.

    Sums the consecutive fraction ratios (small/medium + medium/large),
    takes floor(log2) and clamps at zero, so the result is always an
    integer power of two >= 1.
    """
    if dist.is_empty:
        raise DegenerateDistributionError("cannot derive an expansion factor from an empty distribution")
    if dist.psi_medium == 0 or dist.psi_large == 0:
        raise DegenerateDistributionError(
            f"zero denominator fraction in {dist.as_tuple()}; substitute f=1 if appropriate"
        )
    ratio_sum = dist.psi_small / dist.psi_medium + dist.psi_medium / dist.psi_large
    return 2 ** max(floor_log2(ratio_sum), 0)


def saliency_scale(P: float, f: float) -> float:
    """Kernel bandwidth s = P / f; stronger warps use tighter kernels."""
    if not P > 0:
        raise ValueError(f"P must be positive, got {P}")
    if not f >= 1:
        raise ValueError(f"expansion factor must be >= 1, got {f}")
    return P / f


def box_kde(
    boxes: Sequence[BBox],
    s: float,
    x_coords: np.ndarray,
    y_coords: np.ndarray,
) -> np.ndarray:
    """Sum of unit-peak Gaussians at box centers, evaluated on a lattice.

    Each box contributes a Gaussian with covariance ``s * diag(w, h)`` in
    px^2. Peak amplitude is one (not pdf-normalized) so the clip bound U
    is meaningful. Returns the raw, un-clipped sum.
    """
    if not s > 0:
        raise ValueError(f"saliency scale must be positive, got {s}")
    out = np.zeros((len(y_coords), len(x_coords)), dtype=np.float64)
    if not boxes:
        return out
    # Separable per box: g(u, v) = gx(u) * gy(v).
    gx = np.empty((len(boxes), len(x_coords)))
    gy = np.empty((len(boxes), len(y_coords)))
    for i, b in enumerate(boxes):
        gx[i] = np.exp(-0.5 * (x_coords - b.cx) ** 2 / (s * b.w))
        gy[i] = np.exp(-0.5 * (y_coords - b.cy) ** 2 / (s * b.h))
    np.einsum("iy,ix->yx", gy, gx, out=out)
    return out


def _finalize(raw: np.ndarray, params: SaliencyParams) -> np.ndarray:
    return np.clip(raw, 0.0, params.U) + params.floor_eps


def instance_saliency(
    boxes: Sequence[BBox],
    s: float,
    params: SaliencyParams,
    image_h: int,
    image_w: int,
) -> SaliencyMap:
    """Per-image guidance from that image's annotated boxes.

    An empty box list yields the uniform floor map (identity warp).
    """
    x = np.linspace(0.0, image_w - 1.0, params.grid_w)
    y = np.linspace(0.0, image_h - 1.0, params.grid_h)
    raw = box_kde(boxes, s, x, y)
    return SaliencyMap(_finalize(raw, params), image_h, image_w)


def static_prior_saliency(
    boxes: Iterable[BBox],
    s: float,
    params: SaliencyParams,
    image_h: int,
    image_w: int,
) -> SaliencyMap:
    """Dataset-average spatial prior: KDE over all boxes, peak-normalized.

    The pre-clip field is rescaled so its maximum is one, making the map a
    dataset-level location prior rather than a per-image density.
    """
    boxes = list(boxes)
    x = np.linspace(0.0, image_w - 1.0, params.grid_w)
    y = np.linspace(0.0, image_h - 1.0, params.grid_h)
    raw = box_kde(boxes, s, x, y)
    peak = raw.max()
    if peak > 0:
        raw = raw / peak
    return SaliencyMap(_finalize(raw, params), image_h, image_w)


def geometric_prior_saliency(
    vp: tuple[float, float],
    spread: float,
    params: SaliencyParams,
    image_h: int,
    image_w: int,
) -> SaliencyMap:
    """Single isotropic unit-peak Gaussian at a vanishing point.

    The vanishing point may lie outside the image rectangle.
    """
    if not spread > 0:
        raise ValueError(f"spread must be positive, got {spread}")
    vx, vy = float(vp[0]), float(vp[1])
    if not (math.isfinite(vx) and math.isfinite(vy)):
        raise ValueError("vanishing point must be finite")
    x = np.linspace(0.0, image_w - 1.0, params.grid_w)
    y = np.linspace(0.0, image_h - 1.0, params.grid_h)
    var = spread * spread
    raw = np.exp(-0.5 * (y[:, None] - vy) ** 2 / var) * np.exp(-0.5 * (x[None, :] - vx) ** 2 / var)
    return SaliencyMap(_finalize(raw, params), image_h, image_w)

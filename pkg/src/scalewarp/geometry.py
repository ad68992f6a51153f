"""Core value types: boxes, size classes, scale distributions, rasters.

All types are immutable after construction and safe to share between
threads. Boxes are stored in center/size form because the saliency
kernels consume that parameterization; corner form is derived on demand.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError

# COCO object-size convention: small < 32^2 px^2 <= medium < 96^2 px^2 <= large.
COCO_T1 = 32.0 * 32.0
COCO_T2 = 96.0 * 96.0

FRACTION_TOL = 1e-9


class SizeClass(enum.IntEnum):
    SMALL = 0
    MEDIUM = 1
    LARGE = 2


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in pixel coordinates, center/size form."""

    cx: float
    cy: float
    w: float
    h: float
    class_id: int = 0

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise ValueError(f"box sides must be positive, got w={self.w}, h={self.h}")
        for v in (self.cx, self.cy, self.w, self.h):
            if not math.isfinite(v):
                raise ValueError("box coordinates must be finite")

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def x1(self) -> float:
        return self.cx - self.w / 2.0

    @property
    def y1(self) -> float:
        return self.cy - self.h / 2.0

    @property
    def x2(self) -> float:
        return self.cx + self.w / 2.0

    @property
    def y2(self) -> float:
        return self.cy + self.h / 2.0

    @classmethod
    def from_corners(cls, x1: float, y1: float, x2: float, y2: float, class_id: int = 0) -> "BBox":
        return cls(cx=(x1 + x2) / 2.0, cy=(y1 + y2) / 2.0, w=x2 - x1, h=y2 - y1, class_id=class_id)


def classify_size(box: BBox, t1: float = COCO_T1, t2: float = COCO_T2) -> SizeClass:
    """Classify a box by area against ordered thresholds.

    Area exactly at a threshold belongs to the upper class.
    """
    if not t1 < t2:
        raise ConfigError(f"size thresholds must satisfy t1 < t2, got t1={t1}, t2={t2}")
    area = box.area
    if area < t1:
        return SizeClass.SMALL
    if area < t2:
        return SizeClass.MEDIUM
    return SizeClass.LARGE


@dataclass(frozen=True)
class ScaleDistribution:
    """Fractions of small/medium/large objects over a box multiset.

    An empty input yields the distinguished empty state (``total == 0``,
    all fractions zero) rather than NaN.
    """

    psi_small: float
    psi_medium: float
    psi_large: float
    total: int

    def __post_init__(self):
        if self.total < 0:
            raise ValueError("total must be >= 0")
        if self.total == 0:
            if any((self.psi_small, self.psi_medium, self.psi_large)):
                raise ValueError("empty distribution must have zero fractions")
            return
        s = self.psi_small + self.psi_medium + self.psi_large
        if any(p < 0 for p in (self.psi_small, self.psi_medium, self.psi_large)):
            raise ValueError("fractions must be nonnegative")
        if abs(s - 1.0) > FRACTION_TOL:
            raise ValueError(f"fractions must sum to 1, got {s}")

    @property
    def is_empty(self) -> bool:
        return self.total == 0

    @classmethod
    def empty(cls) -> "ScaleDistribution":
        return cls(0.0, 0.0, 0.0, 0)

    @classmethod
    def from_counts(cls, n_small: int, n_medium: int, n_large: int) -> "ScaleDistribution":
        total = n_small + n_medium + n_large
        if total == 0:
            return cls.empty()
        return cls(n_small / total, n_medium / total, n_large / total, total)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.psi_small, self.psi_medium, self.psi_large)

    def to_dict(self) -> dict:
        d = {"total": self.total}
        if not self.is_empty:
            d.update(
                psi_small=self.psi_small,
                psi_medium=self.psi_medium,
                psi_large=self.psi_large,
            )
        return d


def scale_distribution(
    boxes: Iterable[BBox], t1: float = COCO_T1, t2: float = COCO_T2
) -> ScaleDistribution:
    """Fraction of boxes per size class; empty input gives the empty state."""
    counts = [0, 0, 0]
    for box in boxes:
        counts[classify_size(box, t1, t2)] += 1
    return ScaleDistribution.from_counts(*counts)


@dataclass(frozen=True)
class Raster:
    """H x W x C array of finite scalars; shared shape for images and features.

    ``data`` is always a read-only (H, W, C) array; single-channel inputs
    are normalized to C=1.
    """

    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3:
            raise ValueError(f"raster must be 2-D or 3-D, got ndim={arr.ndim}")
        if arr.size == 0:
            raise ValueError("raster must be non-empty")
        if np.issubdtype(arr.dtype, np.floating):
            if not np.isfinite(arr).all():
                raise ValueError("raster values must be finite")
        elif not np.issubdtype(arr.dtype, np.integer) and arr.dtype != np.bool_:
            raise ValueError(f"unsupported raster dtype {arr.dtype}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def plane(self, c: int = 0) -> np.ndarray:
        """Single channel as a 2-D view."""
        return self.data[:, :, c]

    @classmethod
    def from_array(cls, arr: Sequence) -> "Raster":
        return cls(np.asarray(arr))

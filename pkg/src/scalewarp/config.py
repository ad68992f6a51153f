"""Pipeline configuration: one TOML file, flag-overridable.

Defaults follow the tuned operating point: saliency product P = 2^8 with
upper bound U = 1.00, COCO size thresholds, a 64x64 saliency lattice and
31x31 warp-grid knots.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .geometry import COCO_T1, COCO_T2
from .grid import DEFAULT_GRID
from .saliency import DEFAULT_FLOOR_EPS, DEFAULT_LATTICE, DEFAULT_P, DEFAULT_U, SaliencyParams

PRIORS = ("instance", "static", "geometric")


@dataclass(frozen=True)
class WarpConfig:
    P: float = DEFAULT_P
    U: float = DEFAULT_U
    floor_eps: float = DEFAULT_FLOOR_EPS
    kernel_sigma: float | None = None  # px; None selects the per-axis default
    saliency_grid_h: int = DEFAULT_LATTICE
    saliency_grid_w: int = DEFAULT_LATTICE
    warp_grid_h: int = DEFAULT_GRID
    warp_grid_w: int = DEFAULT_GRID
    t1: float = COCO_T1
    t2: float = COCO_T2
    prior: str = "instance"
    vp: tuple[float, float] | None = None
    spread: float | None = None
    foreground_classes: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.prior not in PRIORS:
            raise ConfigError(f"unknown prior {self.prior!r}; expected one of {PRIORS}")
        if not self.t1 < self.t2:
            raise ConfigError(f"thresholds must satisfy t1 < t2, got t1={self.t1}, t2={self.t2}")
        if self.kernel_sigma is not None and not self.kernel_sigma > 0:
            raise ConfigError(f"kernel_sigma must be positive, got {self.kernel_sigma}")
        if self.spread is not None and not self.spread > 0:
            raise ConfigError(f"spread must be positive, got {self.spread}")
        if min(self.warp_grid_h, self.warp_grid_w) < 2:
            raise ConfigError("warp grid must have at least 2 knots per axis")
        try:
            self.saliency_params()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def saliency_params(self) -> SaliencyParams:
        return SaliencyParams(
            P=self.P,
            U=self.U,
            floor_eps=self.floor_eps,
            grid_h=self.saliency_grid_h,
            grid_w=self.saliency_grid_w,
        )

    def with_overrides(self, **kwargs) -> "WarpConfig":
        provided = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **provided) if provided else self


_FIELDS = {f.name for f in fields(WarpConfig)}


def _coerce(key: str, value):
    if key in ("saliency_grid", "warp_grid"):
        if not (isinstance(value, (list, tuple)) and len(value) == 2):
            raise ConfigError(f"{key} must be a [height, width] pair, got {value!r}")
        return {f"{key}_h": int(value[0]), f"{key}_w": int(value[1])}
    if key == "vp":
        if not (isinstance(value, (list, tuple)) and len(value) == 2):
            raise ConfigError(f"vp must be an [x, y] pair, got {value!r}")
        return {"vp": (float(value[0]), float(value[1]))}
    if key == "foreground_classes":
        return {"foreground_classes": tuple(int(v) for v in value)}
    if key in ("P", "U", "floor_eps", "kernel_sigma", "t1", "t2", "spread"):
        return {key: float(value)}
    if key == "prior":
        return {"prior": str(value)}
    raise ConfigError(f"unknown config key {key!r}")


def load_config(path: str | Path | None) -> WarpConfig:
    """Load a TOML config; a missing path argument yields the defaults."""
    if path is None:
        return WarpConfig()
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config TOML: {exc}") from exc

    kwargs: dict = {}
    for key, value in doc.items():
        if key in ("saliency_grid_h", "saliency_grid_w", "warp_grid_h", "warp_grid_w"):
            kwargs[key] = int(value)
            continue
        kwargs.update(_coerce(key, value))
    unknown = set(kwargs) - _FIELDS
    if unknown:
        raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
    return WarpConfig(**kwargs)

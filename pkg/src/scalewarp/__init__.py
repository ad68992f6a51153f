"""Saliency-guided in-place image warping for shifting object scale distributions."""

from .config import WarpConfig, load_config
from .dataset import (
    AnnotationSet,
    ImageInfo,
    ShiftReport,
    boxes_from_segmentation,
    load_annotations,
    shift_report,
)
from .errors import (
    ConfigError,
    DegenerateDistributionError,
    InputError,
    InvalidGridError,
    OutOfRangeError,
    ScaleWarpError,
    ShapeMismatchError,
)
from .geometry import (
    BBox,
    Raster,
    ScaleDistribution,
    SizeClass,
    classify_size,
    scale_distribution,
)
from .grid import InverseGrid, WarpGrid, build_grid, forward_map_point, invert_grid
from .rasters import grid_raster, read_grid_csv, read_raster, write_grid_csv, write_raster
from .resample import unwarp_raster, warp_boxes, warp_raster
from .saliency import (
    SaliencyMap,
    SaliencyParams,
    expansion_factor,
    geometric_prior_saliency,
    instance_saliency,
    saliency_scale,
    static_prior_saliency,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotationSet",
    "BBox",
    "ConfigError",
    "DegenerateDistributionError",
    "ImageInfo",
    "InputError",
    "InvalidGridError",
    "InverseGrid",
    "OutOfRangeError",
    "Raster",
    "SaliencyMap",
    "SaliencyParams",
    "ScaleDistribution",
    "ScaleWarpError",
    "ShapeMismatchError",
    "ShiftReport",
    "SizeClass",
    "WarpConfig",
    "WarpGrid",
    "boxes_from_segmentation",
    "build_grid",
    "classify_size",
    "expansion_factor",
    "forward_map_point",
    "geometric_prior_saliency",
    "grid_raster",
    "instance_saliency",
    "invert_grid",
    "load_annotations",
    "load_config",
    "read_grid_csv",
    "read_raster",
    "saliency_scale",
    "scale_distribution",
    "shift_report",
    "static_prior_saliency",
    "unwarp_raster",
    "warp_boxes",
    "warp_raster",
    "write_grid_csv",
    "write_raster",
]

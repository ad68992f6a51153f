"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: configuration/usage problems
exit 1, input/format problems exit 2, violated internal invariants exit 3.
"""


class ScaleWarpError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(ScaleWarpError):
    """Invalid configuration value or combination (e.g. t1 >= t2)."""


class InputError(ScaleWarpError):
    """Unreadable or malformed input data (files, annotations, rasters)."""


class ShapeMismatchError(InputError):
    """Raster/grid dimensions do not agree."""

    def __init__(self, expected, got, what="raster"):
        self.expected = tuple(expected)
        self.got = tuple(got)
        super().__init__(f"{what} shape mismatch: expected {self.expected}, got {self.got}")


class DegenerateDistributionError(ScaleWarpError):
    """A scale distribution has a zero denominator fraction (or is empty)."""


class InvalidGridError(ScaleWarpError):
    """A warp grid violates strict monotonicity or endpoint pinning."""


class OutOfRangeError(ScaleWarpError):
    """A point or box lies outside the image rectangle."""

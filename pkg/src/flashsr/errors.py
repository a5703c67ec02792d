"""Exception types shared across the package.

Plain ``ValueError`` is used for bad arguments at public entry points; the
classes here mark conditions a caller may want to catch specifically
(unreadable checkpoints, malformed config files, numerically failed filter
realizations, undefined score conversions).
"""


class FlashSRError(Exception):
    """Base class for package-specific errors."""


class CheckpointError(FlashSRError):
    """Checkpoint file is missing, truncated, or fails validation."""


class ConfigError(FlashSRError):
    """Config file could not be parsed or contains unknown/invalid keys."""


class FilterRealizationError(FlashSRError):
    """A sampled filter design produced a non-finite or unstable output."""


class UndefinedScoreError(FlashSRError, ZeroDivisionError):
    """Score conversion requested at a point where sigma(t) == 0."""

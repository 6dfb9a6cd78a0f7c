"""Exception types shared across the toolkit.

All errors derive from ValueError so callers that do not care about the
fine-grained class can catch a single base.
"""


class ScanFormatError(ValueError):
    """An on-disk scan or image file violates the container format."""


class DimensionError(ScanFormatError):
    """A manifest's declared shape disagrees with the blob payload."""


class IncompatibleScanError(ValueError):
    """Two scans that must share geometry/frequency axis do not."""


class IncompatibleInputError(ValueError):
    """Reconstruction inputs disagree in shape (signals vs geometry)."""


class ConfigurationError(ValueError):
    """A parameter combination is invalid for the requested operation."""


class UndefinedMetricError(ValueError):
    """A quality metric is undefined for the given image/region."""

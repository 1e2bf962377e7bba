"""Exception types shared across the package."""


class AddBasisError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(AddBasisError, ValueError):
    """A parameter is out of its documented range; message names the field."""


class ThresholdRangeError(AddBasisError, ValueError):
    """Threshold radicand is non-positive: the shift puts p below anything expressible."""


class ResourceLimitError(AddBasisError, RuntimeError):
    """A configured resource cap (bitmap size, enumeration bound) would be exceeded."""


class EnumerationLimitError(AddBasisError, ValueError):
    """Exhaustive enumeration was requested beyond the supported ground-set size."""

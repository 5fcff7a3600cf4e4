"""Exception types."""


class ShapingError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(ShapingError, ValueError):
    """Codebook, source and target sizes do not agree."""


class SupportError(ShapingError, ValueError):
    """A probability needed to be positive but was zero."""


class InfeasibleRate(ShapingError, ValueError):
    """No code with the requested expansion factor (or budget) exists."""


class ZeroMinCost(ShapingError, ValueError):
    """The cheapest symbol is free, so total cost has no finite minimizer."""


class CorruptStream(ShapingError, ValueError):
    """An encoded stream cannot be parsed."""


class TreeMismatch(ShapingError, ValueError):
    """A stream was produced with a different code tree."""

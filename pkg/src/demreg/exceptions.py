"""Exception and warning classes raised across demreg."""


class DemregError(Exception):
    """Base class for every error raised by this package."""


# -- grid_io -----------------------------------------------------------------

class GridFormatError(DemregError, ValueError):
    """An ASCII grid could not be parsed.

    ``lineno`` is the 1-based line of the offending token when known.
    """

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class MalformedHeader(GridFormatError):
    pass


class CellCountMismatch(GridFormatError):
    pass


class NonFiniteValue(GridFormatError):
    pass


class MalformedValue(GridFormatError):
    pass


class IndexOutOfRange(DemregError, IndexError):
    pass


class OutOfBounds(DemregError, ValueError):
    pass


# -- tiling ------------------------------------------------------------------

class InvalidTileSize(DemregError, ValueError):
    pass


class InconsistentCellsize(DemregError, ValueError):
    pass


class GapOrOverlap(DemregError, ValueError):
    pass


# -- control points ----------------------------------------------------------

class MalformedLine(DemregError, ValueError):
    def __init__(self, message, lineno):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class BorderCell(DemregError, ValueError):
    pass


class NodataInRing(DemregError, ValueError):
    pass


# -- correspondence ----------------------------------------------------------

class DuplicateCell(DemregError, ValueError):
    pass


class TooFewPoints(DemregError, ValueError):
    pass


class InsufficientMatches(DemregError):
    """The largest geometrically consistent match set is below ``min_support``."""

    def __init__(self, message, support=0, min_support=0):
        super().__init__(message)
        self.support = support
        self.min_support = min_support


# -- registration / metrics / render / synth ---------------------------------

class CellsizeMismatch(DemregError, ValueError):
    pass


class NoOverlap(DemregError, ValueError):
    pass


class EmptySurface(DemregError, ValueError):
    pass


class NoInteriorCells(DemregError, ValueError):
    pass


class TooFewSamples(DemregError, ValueError):
    pass


class AllNodata(DemregError, ValueError):
    pass


class EmptyWindow(DemregError, ValueError):
    pass


class EmptyOverlapWarning(UserWarning):
    """Merged grids do not overlap; the mosaic is still produced."""


class DuplicateControlPointWarning(UserWarning):
    pass


class MetricDegeneracyWarning(UserWarning):
    """A metric could not be evaluated on the given difference surface."""

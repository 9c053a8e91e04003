"""Exception and warning types raised across the package."""


class GlarsError(Exception):
    """Base class for all package errors."""


class SingularGram(GlarsError):
    """A Gram matrix that must be inverted is numerically singular."""


class InvalidComponentCount(GlarsError):
    """Requested number of principal components is outside ``[1, q]``."""


class InvalidSpec(GlarsError, ValueError):
    """Estimator parameters violate their constraints."""


class ConstantColumn(GlarsError):
    def __init__(self, column):
        super().__init__(f"column {column} is constant and cannot be standardized")
        self.column = column


class TooFewRows(GlarsError):
    pass


class ZeroDirection(GlarsError):
    """The path direction vanished (response orthogonal to every predictor)."""


class OutOfRange(GlarsError, ValueError):
    pass


class DimensionMismatch(GlarsError, ValueError):
    pass


class EmptyGrid(GlarsError, ValueError):
    pass


class DataError(GlarsError):
    """Problems with input files; carries location info where available."""


class MissingColumn(DataError):
    def __init__(self, column, path=None):
        where = f" in {path}" if path else ""
        super().__init__(f"column {column!r} not found{where}")
        self.column = column


class NonNumericCell(DataError):
    def __init__(self, row, column, value, path=None):
        where = f"{path}: " if path else ""
        super().__init__(f"{where}row {row}, column {column!r}: non-numeric value {value!r}")
        self.row = row
        self.column = column


class EmptyFile(DataError):
    pass


class CorruptBundle(DataError):
    pass


class NonConvergenceWarning(RuntimeWarning):
    """The path hit its step cap before reaching the terminal breakpoint."""


class DegenerateSpectrumWarning(RuntimeWarning):
    """Largest eigenvalue is not separated; a deterministic fallback was used."""

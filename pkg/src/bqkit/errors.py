"""Exception hierarchy shared by all bqkit modules."""


class BqError(Exception):
    """Base class for all errors raised by bqkit."""


class ParseError(BqError):
    """Malformed DSL input; carries a 1-based line/column position."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = "line %d, column %d: %s" % (line, column, message)
        super().__init__(message)


class QuiverError(BqError):
    """Invalid quiver, path or walk data."""


class FieldError(BqError):
    """Invalid scalar or field operation."""


class IdealError(BqError):
    """Invalid relation/ideal data, or a query on mismatched ideals."""


class HomotopyError(BqError):
    """Invalid homotopy query (non-parallel walks, disconnected quiver)."""


class UnresolvedError(BqError):
    """A homotopy decision that had to be certified came back Unknown."""


class TransformError(BqError):
    """Invalid automorphism, derivation, or decomposition input."""


class GammaError(BqError):
    """Failure while exploring the quiver of homotopy relations."""


class CoverError(BqError):
    """Invalid covering data or an unconstructible lift."""

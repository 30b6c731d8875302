"""Exception types raised across the package."""


class HyperLaplaceError(Exception):
    """Base class for every package-specific failure."""


class ParseError(HyperLaplaceError):
    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


class NonSplittingError(HyperLaplaceError):
    """A principal symbol or characteristic polynomial has a non-linear irreducible factor."""

    def __init__(self, message, factor=None):
        self.factor = factor
        super().__init__(message)


class NotHyperbolicError(HyperLaplaceError):
    """Repeated characteristic roots or a degenerate leading form."""


class DependentOperatorsError(HyperLaplaceError):
    """Two characteristic operators are proportional."""


class RepresentationError(HyperLaplaceError):
    """An operator cannot be written in the requested normal form."""

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


class TransformUndefinedError(HyperLaplaceError):
    """A Laplace substitution needs a nonzero invariant or pivot that vanishes."""


class CertificationError(HyperLaplaceError):
    """An internal exact identity failed; indicates a bug, never expected."""


class IntegrationError(HyperLaplaceError):
    """A first-order equation could not be integrated in closed form."""


class RealizationError(HyperLaplaceError):
    """Numeric verification lacks realizations or usable sample points."""

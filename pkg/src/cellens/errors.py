"""Exception types shared across the package."""


class CellensError(Exception):
    """Base class for all package-specific errors."""


class NotPositiveDefinite(CellensError):
    """A Cholesky-style factorization hit a non-positive pivot.

    Signals a degenerate (exactly collinear) set of variables; callers in
    the selection loop reject the offending proposal rather than aborting.
    """


class RankDeficient(CellensError):
    """A least-squares design is singular within tolerance."""


class DegenerateColumn(CellensError):
    """A column has zero robust scale (constant or near-constant).

    Carries the offending column index (and optionally a name) so callers
    can report which predictor to drop.
    """

    def __init__(self, column: int, name: str | None = None):
        self.column = column
        self.name = name
        label = name if name is not None else f"column {column}"
        super().__init__(f"degenerate column: {label} has zero robust scale")


class TooFewColumns(CellensError):
    """Cell prediction needs at least two columns."""


class InvalidConfig(CellensError):
    """A configuration value is inconsistent or out of range."""


class ShapeMismatch(CellensError):
    """Array dimensions do not agree with the expected layout."""


class EmptyTruth(CellensError):
    """Selection scoring requires a non-empty true active set."""


class InvariantViolation(CellensError):
    """A numerical invariant of the path state failed beyond tolerance."""

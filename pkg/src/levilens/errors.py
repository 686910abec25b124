"""Exception hierarchy.

Every error raised for a mathematically invalid input derives from
``DomainError`` so the command line can map it to a single exit code.
"""


class DomainError(ValueError):
    """Input is well formed but lies outside the domain of the computation."""


class DegenerateBoundary(DomainError):
    """The defining function has vanishing differential at the point."""


class NotOnBoundary(DomainError):
    """The point is not on the zero set of the defining function."""


class DegenerateLevi(DomainError):
    """Some Levi eigenvalue lies within the zero tolerance."""


class WrongDegree(DomainError):
    """The requested form degree does not match the Levi signature."""


class MetricError(DomainError):
    """The Hermitian metric is not positive definite at the point."""

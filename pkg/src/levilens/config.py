from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared by the geometric routines.

    ``zero`` decides when a Levi eigenvalue counts as degenerate, ``herm``
    bounds the anti-Hermitian residue of a computed Levi matrix relative to
    its size, and ``surface`` bounds ``|r(p)|`` for a point to count as a
    boundary point.
    """

    zero: float = 1e-9
    herm: float = 1e-10
    surface: float = 1e-8


DEFAULT_TOLERANCES = Tolerances()

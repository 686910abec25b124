"""Levi data, phase jets, leading kernel coefficients and singularity expansions
for non-degenerate CR hypersurfaces, with brute-force oracles on model domains."""

from .config import Tolerances
from .errors import (
    DegenerateBoundary,
    DegenerateLevi,
    DomainError,
    MetricError,
    NotOnBoundary,
    WrongDegree,
)
from .geometry import (
    DefiningFunctionSpec,
    LeviData,
    MetricSpec,
    condition_Y,
    condition_Z,
    contact_form,
    eval_jet2,
    gamma_q_membership,
    holomorphic_tangent_frame,
    levi_form,
    normalize_defining,
)

__version__ = "0.1.0"

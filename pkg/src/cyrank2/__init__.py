"""Rank-two hypersurface Cox rings: chambers, smoothness, factoriality, invariants."""

from .grading import (
    DegreeMatrix,
    GradingError,
    GradingGroup,
    SpecifyingData,
    Weight,
    canonical_form,
    det2,
    gale_dual,
    generates_group,
    is_primitive,
    make_sd,
    smith_normal_form,
)

__all__ = [
    "DegreeMatrix", "GradingError", "GradingGroup", "SpecifyingData", "Weight",
    "canonical_form", "det2", "gale_dual", "generates_group", "is_primitive",
    "make_sd", "smith_normal_form",
]

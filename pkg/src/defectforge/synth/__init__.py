"""Defect synthesis operators grouped by support-primitive dimension."""

from .curve import (
    GeodesicSupport,
    RegionField,
    deform_1d,
    expand_region,
    geodesic_support,
    punch_hole,
    select_anchors,
)
from .freeform import (
    GaussianKernel,
    TangentPatch,
    build_patch,
    deform_freeform,
    freeform_from_patch,
    height_field,
    hull_mask,
    smooth_local,
    synthesize_freeform,
)
from .planar import (
    HingeAxis,
    PlaneBand,
    bend,
    bend_weights,
    crack,
    extract_band,
    fit_hinge,
    sample_plane,
    signed_distances,
)

__all__ = [
    "GeodesicSupport",
    "RegionField",
    "select_anchors",
    "geodesic_support",
    "expand_region",
    "deform_1d",
    "punch_hole",
    "PlaneBand",
    "HingeAxis",
    "signed_distances",
    "extract_band",
    "fit_hinge",
    "bend",
    "bend_weights",
    "crack",
    "sample_plane",
    "GaussianKernel",
    "TangentPatch",
    "hull_mask",
    "build_patch",
    "height_field",
    "deform_freeform",
    "smooth_local",
    "synthesize_freeform",
    "freeform_from_patch",
]

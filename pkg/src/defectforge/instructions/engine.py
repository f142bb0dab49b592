"""Candidate resolution and instruction dispatch."""

from __future__ import annotations

import numpy as np

from ..errors import ContractError, DefectForgeError, FormatError
from ..geometry import PointCloud, build_knn_graph, estimate_normals
from ..rng import derive_seed
from ..synth.curve import deform_1d, expand_region, geodesic_support, punch_hole
from ..synth.freeform import GaussianKernel, build_patch, freeform_from_patch, hull_mask
from ..synth.planar import bend, crack
from .schema import TYPE_TO_OPERATOR, CategoryMetadata, SynthesisInstruction, parse_instruction
from .templates import fallback_template
from .validator import ResolvedInstruction, materialize, validate

ORIGIN_MODEL = "model"
ORIGIN_RULE = "rule"


def resolve(
    candidate: str | None,
    u: str,
    cloud: PointCloud,
    meta: CategoryMetadata | None = None,
    profile=None,
    seed: int = 0,
) -> tuple[SynthesisInstruction, str]:
    """Two-branch instruction choice.

    A candidate that parses, matches the requested type and validates
    against the cloud wins; anything else falls back to the rule
    template. Returns (instruction, origin) with origin "model" or
    "rule" for provenance records.
    """
    if u not in TYPE_TO_OPERATOR:
        raise ContractError(f"unknown defect type {u!r}")
    if candidate is not None:
        try:
            instr = parse_instruction(candidate)
        except FormatError:
            instr = None
        if instr is not None and instr.type == u and validate(instr, cloud, profile).valid:
            return instr, ORIGIN_MODEL
    return fallback_template(u, meta, seed), ORIGIN_RULE


def _resolve_kernels(patch, kernel_specs) -> list[GaussianKernel]:
    """Map unit-square kernel specs onto the patch's (u, v) box."""
    lo = patch.coords.min(axis=0)
    hi = patch.coords.max(axis=0)
    span = hi - lo
    extent = max(float(span.max()), 1e-12)
    kernels = []
    for spec in kernel_specs:
        center = lo + np.asarray(spec["center"], dtype=np.float64) * span
        kernels.append(
            GaussianKernel(
                amplitude=spec["amp"],
                center=center,
                sigma=spec["sigma"] * extent,
            )
        )
    return kernels


def _dispatch(
    resolved: ResolvedInstruction, cloud: PointCloud
) -> tuple[PointCloud, np.ndarray, dict]:
    instr = resolved.instruction
    p = resolved.params
    extra: dict = {}

    if instr.operator == "mpas1d":
        anchors = resolved.anchors
        graph = build_knn_graph(cloud, min(8, len(cloud) - 1)) if len(anchors) > 1 else None
        support = geodesic_support(cloud, graph, anchors)
        field = expand_region(cloud, support, p["r"])
        if instr.type == "hole":
            out, mask, removed = punch_hole(cloud, field, p["dir"], p["d"], p["removal_frac"])
            extra["removed"] = len(removed)
        else:
            out, mask = deform_1d(cloud, field, p["dir"], p["d"])
    elif instr.operator == "mpas2d-bend":
        out, mask = bend(cloud, resolved.plane, p["delta"], p["theta"])
    elif instr.operator == "mpas2d-crack":
        out, mask, removed = crack(
            cloud,
            resolved.plane,
            p["tau"],
            p["sigma"],
            p["r_c"],
            derive_seed(instr.seed, "crack-noise"),
        )
        extra["removed"] = len(removed)
    else:
        members = hull_mask(cloud, resolved.anchors, p["eps"])
        patch = build_patch(cloud, members)
        kernels = _resolve_kernels(patch, p["kernels"])
        out, mask, info = freeform_from_patch(
            cloud, patch, kernels, p["k_smooth"], p["lam"], p["h_min"]
        )
        extra["support"] = len(info["support"])
    return out, mask, extra


def execute(
    instr: SynthesisInstruction,
    cloud: PointCloud,
    profile=None,
    origin: str | None = None,
) -> tuple[PointCloud, np.ndarray, dict]:
    """Run the operator an instruction names and record provenance.

    The caller is expected to have validated instr against this cloud.
    Output is a pure function of (cloud, instr, profile).
    """
    if not cloud.has_normals:
        cloud = estimate_normals(cloud, min(16, len(cloud) - 1))
    resolved = materialize(instr, cloud, profile)
    try:
        out, mask, extra = _dispatch(resolved, cloud)
    except DefectForgeError as exc:
        raise type(exc)(
            f"{instr.type} instruction (seed {instr.seed}) failed: {exc}"
        ) from exc

    provenance = {
        "instruction": instr.to_dict(),
        "origin": origin or "user",
        "operator": instr.operator,
        "scale": float(resolved.scale),
        "region": {},
        "outputs": {
            "points": len(out),
            "masked": int(mask.sum()),
            **extra,
        },
    }
    if resolved.anchors is not None:
        provenance["region"]["anchors"] = [int(a) for a in resolved.anchors]
    if resolved.plane is not None:
        provenance["region"]["plane"] = {
            "normal": [float(x) for x in resolved.plane.normal],
            "point": [float(x) for x in resolved.plane.point],
        }
    return out, mask, provenance

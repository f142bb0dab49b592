"""Geometry-aware instruction validation and region resolution.

`materialize` turns the relative, possibly region-free instruction into
absolute operator inputs (anchors, cutting plane, lengths in model
units). `validate` runs every admissibility rule and returns a report;
it never raises and never stops at the first failure. Both are pure and
deterministic: sampled regions come from sub-seeds derived from the
instruction seed, so validation and execution see the same geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateGeometryError
from ..geometry import Plane, PointCloud, coplanarity_ratio, min_bounding_sphere
from ..rng import derive_seed
from ..synth.curve import select_anchors
from ..synth.planar import sample_plane
from .schema import SynthesisInstruction

REL_MIN = 1e-4
REL_MAX = 0.5
SIDE_FRACTION = 0.10
COPLANAR_RATIO = 1e-10
_ANCHOR_RESAMPLE_TRIES = 10

# defect type -> (anchor-count rule, pinned displacement direction)
DIRECTION_PINS = {
    "bump": ("exactly-1", 1),
    "dent": ("exactly-1", -1),
    "hole": ("exactly-1", -1),
    "scratch": ("at-least-2", -1),
    "groove": ("at-least-2", -1),
}


@dataclass
class ValidationReport:
    valid: bool
    violations: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"valid": self.valid, "violations": self.violations}


@dataclass
class ResolvedInstruction:
    """Absolute-unit view of an instruction against one cloud.

    `params` lengths are in model units. Free-form kernels keep their
    patch-relative center/sigma (the tangent patch exists only at
    execution time); only their amplitudes are scaled here.
    """

    instruction: SynthesisInstruction
    scale: float
    anchors: np.ndarray | None = None
    plane: Plane | None = None
    params: dict = field(default_factory=dict)


def reference_radius(cloud: PointCloud, profile=None) -> float:
    """Length scale that relative instruction parameters refer to."""
    if profile is not None:
        return float(profile.radius)
    return min_bounding_sphere(cloud.points).radius


def _box_hint(cloud: PointCloud, region: dict) -> np.ndarray | None:
    box = region.get("box")
    if box is None:
        return None
    lo = np.asarray(box[0], dtype=np.float64)
    hi = np.asarray(box[1], dtype=np.float64)
    inside = np.all((cloud.points >= lo) & (cloud.points <= hi), axis=1)
    hint = np.flatnonzero(inside)
    if len(hint) == 0:
        raise DegenerateGeometryError("region box contains no points")
    return hint


def _resolve_anchors(instr: SynthesisInstruction, cloud: PointCloud) -> np.ndarray:
    if "anchors" in instr.region:
        return np.asarray(instr.region["anchors"], dtype=np.int64)
    hint = _box_hint(cloud, instr.region)
    m = instr.params["m"]
    if instr.operator != "mpas3d":
        return select_anchors(cloud, m, derive_seed(instr.seed, "region"), hint)
    # hull anchors must span 3D; resample a bounded number of times
    for t in range(_ANCHOR_RESAMPLE_TRIES):
        anchors = select_anchors(
            cloud, m, derive_seed(instr.seed, f"region:{t}"), hint
        )
        if coplanarity_ratio(cloud.points[anchors]) > COPLANAR_RATIO:
            return anchors
    raise DegenerateGeometryError(
        f"could not sample non-coplanar hull anchors in {_ANCHOR_RESAMPLE_TRIES} tries"
    )


def _resolve_plane(instr: SynthesisInstruction, cloud: PointCloud, width: float) -> Plane:
    spec = instr.region.get("plane")
    if spec is not None:
        return Plane(normal=np.asarray(spec["normal"]), point=np.asarray(spec["point"]))
    return sample_plane(cloud, derive_seed(instr.seed, "plane"), width, SIDE_FRACTION)


def materialize(
    instr: SynthesisInstruction, cloud: PointCloud, profile=None
) -> ResolvedInstruction:
    """Resolve regions and convert relative lengths to model units.

    Raises DegenerateGeometryError when a sampled region cannot be
    grounded (empty box, no admissible plane, coplanar hull anchors).
    """
    scale = reference_radius(cloud, profile)
    p = instr.params
    resolved = ResolvedInstruction(instruction=instr, scale=scale)

    if instr.operator == "mpas1d":
        resolved.anchors = _resolve_anchors(instr, cloud)
        resolved.params = {
            "m": p["m"],
            "r": p["r"] * scale,
            "d": p["d"] * scale,
            "dir": p["dir"],
            "removal_frac": p.get("removal_frac", 0.8),
        }
    elif instr.operator == "mpas2d-bend":
        resolved.params = {"delta": p["delta"] * scale, "theta": p["theta"]}
        resolved.plane = _resolve_plane(instr, cloud, resolved.params["delta"])
    elif instr.operator == "mpas2d-crack":
        resolved.params = {
            "tau": p["tau"] * scale,
            "sigma": p["sigma"] * scale,
            "r_c": p["r_c"] * scale,
        }
        resolved.plane = _resolve_plane(instr, cloud, resolved.params["tau"])
    elif instr.operator == "mpas3d":
        resolved.anchors = _resolve_anchors(instr, cloud)
        resolved.params = {
            "m": p["m"],
            "eps": p["eps"] * scale,
            "kernels": [
                {
                    "amp": k["amp"] * scale,
                    "center": list(k["center"]),
                    "sigma": k["sigma"],
                }
                for k in p["kernels"]
            ],
            "k_smooth": p.get("k_smooth", 8),
            "lam": p.get("lam", 0.5),
            "h_min": p["h_min"] * scale if "h_min" in p else None,
        }
    else:
        raise DegenerateGeometryError(f"unknown operator {instr.operator!r}")
    return resolved


def _finite(value) -> bool:
    return isinstance(value, (int, float)) and math.isfinite(value)


class _Rules:
    """Collects violations; one instance per validate call."""

    def __init__(self):
        self.violations: list[dict] = []

    def add(self, field_name: str, rule: str, message: str) -> None:
        self.violations.append({"field": field_name, "rule": rule, "message": message})

    def rel_range(self, field_name: str, value, magnitude: bool = False) -> None:
        if not _finite(value):
            self.add(field_name, "range", "value must be a finite number")
            return
        x = abs(value) if magnitude else value
        if not REL_MIN <= x <= REL_MAX:
            self.add(
                field_name,
                "range",
                f"{'|value|' if magnitude else 'value'} must lie in "
                f"[{REL_MIN}, {REL_MAX}] of the reference radius, got {value}",
            )

    def positive(self, field_name: str, value) -> bool:
        if not _finite(value) or value <= 0:
            self.add(field_name, "range", f"value must be a positive number, got {value}")
            return False
        return True


def _check_anchor_region(instr, n: int, rules: _Rules) -> bool:
    """Static anchor/region checks. Returns False when grounding must be skipped."""
    ok = True
    anchors = instr.region.get("anchors")
    m = instr.params.get("m")
    if anchors is not None:
        bad = [a for a in anchors if not 0 <= a < n]
        if bad:
            rules.add(
                "region.anchors",
                "anchor-range",
                f"indices {bad} out of range for a {n}-point cloud",
            )
            ok = False
        if len(set(anchors)) != len(anchors):
            rules.add("region.anchors", "anchor-range", "duplicate anchor indices")
            ok = False
        if isinstance(m, int) and m != len(anchors):
            rules.add(
                "region.anchors",
                "anchor-count",
                f"params.m = {m} but {len(anchors)} anchors given",
            )
            ok = False
    if isinstance(m, int) and m > n:
        rules.add("params.m", "anchor-count", f"m = {m} exceeds cloud size {n}")
        ok = False

    pin = DIRECTION_PINS.get(instr.type)
    if pin is not None:
        count_rule, pinned_dir = pin
        if count_rule == "exactly-1" and m != 1:
            rules.add("params.m", "anchor-count", f"{instr.type} requires m = 1, got {m}")
            ok = False
        if count_rule == "at-least-2" and (not isinstance(m, int) or m < 2):
            rules.add("params.m", "anchor-count", f"{instr.type} requires m >= 2, got {m}")
            ok = False
        direction = instr.params.get("dir")
        if direction != pinned_dir:
            rules.add(
                "params.dir",
                "dir-pin",
                f"{instr.type} requires dir = {pinned_dir:+d}, got {direction}",
            )
    if instr.type == "freeform" and (not isinstance(m, int) or m < 4):
        rules.add("params.m", "anchor-count", f"freeform requires m >= 4, got {m}")
        ok = False
    return ok


def _check_params(instr, rules: _Rules) -> bool:
    """Range rules. Returns False when grounding inputs are unusable."""
    p = instr.params
    groundable = True
    if instr.operator == "mpas1d":
        rules.rel_range("params.r", p["r"])
        rules.rel_range("params.d", p["d"])
        if p["dir"] not in (1, -1):
            rules.add("params.dir", "range", f"dir must be +1 or -1, got {p['dir']}")
        frac = p.get("removal_frac")
        if frac is not None and (not _finite(frac) or not 0 < frac <= 1):
            rules.add("params.removal_frac", "range", f"must lie in (0, 1], got {frac}")
    elif instr.operator == "mpas2d-bend":
        groundable &= rules.positive("params.delta", p["delta"])
        theta = p["theta"]
        if not _finite(theta):
            rules.add("params.theta", "theta-range", "theta must be a finite number")
        elif abs(theta) > math.pi / 2:
            rules.add(
                "params.theta",
                "theta-range",
                f"|theta| must be <= pi/2, got {theta}",
            )
    elif instr.operator == "mpas2d-crack":
        rules.rel_range("params.tau", p["tau"])
        groundable &= _finite(p["tau"]) and p["tau"] > 0
        rules.rel_range("params.r_c", p["r_c"])
        sigma = p["sigma"]
        if not _finite(sigma) or sigma < 0:
            rules.add("params.sigma", "range", f"sigma must be >= 0, got {sigma}")
    elif instr.operator == "mpas3d":
        rules.rel_range("params.eps", p["eps"])
        groundable &= _finite(p["eps"]) and p["eps"] > 0
        for i, k in enumerate(p["kernels"]):
            rules.rel_range(f"params.kernels[{i}].amp", k["amp"], magnitude=True)
            sigma = k["sigma"]
            if not _finite(sigma) or not 0 < sigma <= 1:
                rules.add(
                    f"params.kernels[{i}].sigma",
                    "kernel-sigma",
                    f"sigma must lie in (0, 1] of the patch extent, got {sigma}",
                )
            for axis, c in zip(("u", "v"), k["center"]):
                if not _finite(c) or not 0 <= c <= 1:
                    rules.add(
                        f"params.kernels[{i}].center",
                        "kernel-center",
                        f"{axis} must lie in [0, 1] of the patch box, got {c}",
                    )
        lam = p.get("lam")
        if lam is not None and (not _finite(lam) or not 0 <= lam <= 1):
            rules.add("params.lam", "range", f"lambda must lie in [0, 1], got {lam}")
        k_smooth = p.get("k_smooth")
        if k_smooth is not None and k_smooth < 1:
            rules.add("params.k_smooth", "range", f"k_smooth must be >= 1, got {k_smooth}")
        h_min = p.get("h_min")
        if h_min is not None and (not _finite(h_min) or h_min <= 0):
            rules.add("params.h_min", "range", f"h_min must be positive, got {h_min}")
    return groundable


def _ground(instr, cloud: PointCloud, profile, rules: _Rules) -> None:
    """Checks that need the resolved geometry."""
    try:
        resolved = materialize(instr, cloud, profile)
    except DegenerateGeometryError as exc:
        rules.add("region", "degenerate-region", str(exc))
        return

    n = len(cloud)
    if resolved.plane is not None:
        width = resolved.params["delta" if instr.operator == "mpas2d-bend" else "tau"]
        width_field = "params.delta" if instr.operator == "mpas2d-bend" else "params.tau"
        s = (cloud.points - resolved.plane.point) @ resolved.plane.normal
        if not (np.abs(s) < width / 2.0).any():
            rules.add("region.plane", "empty-band", "cutting plane misses the cloud")
        lo = int(np.count_nonzero(s <= -width / 2.0))
        hi = int(np.count_nonzero(s >= width / 2.0))
        need = SIDE_FRACTION * n
        if lo < need or hi < need:
            rules.add(
                width_field,
                "side-balance",
                f"band leaves {lo} and {hi} points on the two sides; "
                f"each side needs at least {SIDE_FRACTION:.0%} of {n}",
            )
    if instr.operator == "mpas3d":
        ratio = coplanarity_ratio(cloud.points[resolved.anchors])
        if ratio <= COPLANAR_RATIO:
            rules.add(
                "region.anchors",
                "coplanar-anchors",
                "hull anchors are coplanar within tolerance",
            )


def validate(
    instr: SynthesisInstruction, cloud: PointCloud, profile=None
) -> ValidationReport:
    """Run every admissibility rule; report all violations at once.

    profile supplies the category reference radius; without one the
    cloud's own bounding-sphere radius is used.
    """
    rules = _Rules()
    region_ok = _check_anchor_region(instr, len(cloud), rules)
    params_ok = _check_params(instr, rules)
    if region_ok and params_ok:
        _ground(instr, cloud, profile, rules)
    return ValidationReport(valid=not rules.violations, violations=rules.violations)

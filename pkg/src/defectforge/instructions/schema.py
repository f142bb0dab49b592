"""Synthesis instruction schema: parsing, typing, serialization.

An instruction is a JSON document:

    {
      "schema_version": 1,
      "type": "scratch",              defect tag
      "operator": "mpas1d",           which synthesis operator runs
      "region": {"anchors": [3, 41]}, where (see below)
      "params": {...},                operator parameters
      "seed": 7
    }

Region forms: {"anchors": [...]} explicit indices; {"plane": {"normal",
"point"}} explicit cutting plane; {"box": [[min],[max]]} restricts seeded
sampling; {} samples over the whole cloud. Length-like parameters are
fractions of the category reference radius so instructions transfer
across object scales; angles are radians; kernel centers live in the
unit square of the patch's tangent bounding box.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..errors import FormatError

SCHEMA_VERSION = 1

DEFECT_TYPES = ("bump", "dent", "scratch", "groove", "hole", "bend", "crack", "freeform")
OPERATORS = ("mpas1d", "mpas2d-bend", "mpas2d-crack", "mpas3d")

TYPE_TO_OPERATOR = {
    "bump": "mpas1d",
    "dent": "mpas1d",
    "scratch": "mpas1d",
    "groove": "mpas1d",
    "hole": "mpas1d",
    "bend": "mpas2d-bend",
    "crack": "mpas2d-crack",
    "freeform": "mpas3d",
}

# required parameter name -> expected python type(s)
_NUM = (int, float)
REQUIRED_PARAMS: dict[str, dict[str, tuple]] = {
    "mpas1d": {"m": (int,), "r": _NUM, "d": _NUM, "dir": (int,)},
    "mpas2d-bend": {"delta": _NUM, "theta": _NUM},
    "mpas2d-crack": {"tau": _NUM, "sigma": _NUM, "r_c": _NUM},
    "mpas3d": {"m": (int,), "eps": _NUM, "kernels": (list,)},
}
OPTIONAL_PARAMS: dict[str, dict[str, tuple]] = {
    "mpas1d": {"removal_frac": _NUM},
    "mpas2d-bend": {},
    "mpas2d-crack": {},
    "mpas3d": {"k_smooth": (int,), "lam": _NUM, "h_min": _NUM},
}


@dataclass
class SynthesisInstruction:
    type: str
    operator: str
    region: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    seed: int = 0
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "type": self.type,
            "operator": self.operator,
            "region": self.region,
            "params": self.params,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass
class CategoryMetadata:
    """Design-side knowledge attached to a category."""

    name: str
    t_spec: str = ""
    e_prior: str = ""
    images: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.name:
            raise FormatError("category name must be nonempty")


def _type_name(t: tuple) -> str:
    return " or ".join(x.__name__ for x in t)


def _check_params(operator: str, params: dict, problems: list[str]) -> None:
    required = REQUIRED_PARAMS[operator]
    optional = OPTIONAL_PARAMS[operator]
    for key, types in required.items():
        if key not in params:
            problems.append(f"params.{key}: required for {operator}")
        elif not isinstance(params[key], types) or isinstance(params[key], bool):
            problems.append(f"params.{key}: expected {_type_name(types)}")
    for key, value in params.items():
        if key in required:
            continue
        if key not in optional:
            problems.append(f"params.{key}: unknown parameter for {operator}")
        elif not isinstance(value, optional[key]) or isinstance(value, bool):
            problems.append(f"params.{key}: expected {_type_name(optional[key])}")
    if operator == "mpas3d" and isinstance(params.get("kernels"), list):
        if len(params["kernels"]) == 0:
            problems.append("params.kernels: at least one kernel required")
        for i, k in enumerate(params["kernels"]):
            if not isinstance(k, dict):
                problems.append(f"params.kernels[{i}]: expected object")
                continue
            for kk, types in (("amp", _NUM), ("center", (list,)), ("sigma", _NUM)):
                if kk not in k:
                    problems.append(f"params.kernels[{i}].{kk}: required")
                elif not isinstance(k[kk], types) or isinstance(k[kk], bool):
                    problems.append(f"params.kernels[{i}].{kk}: expected {_type_name(types)}")
            center = k.get("center")
            if isinstance(center, list) and (
                len(center) != 2
                or not all(isinstance(c, _NUM) and not isinstance(c, bool) for c in center)
            ):
                problems.append(f"params.kernels[{i}].center: expected [u, v] numbers")


def _check_region(region, problems: list[str]) -> None:
    if not isinstance(region, dict):
        problems.append("region: expected object")
        return
    known = {"anchors", "plane", "box"}
    for key in region:
        if key not in known:
            problems.append(f"region.{key}: unknown region key")
    if "anchors" in region:
        a = region["anchors"]
        if not isinstance(a, list) or not all(
            isinstance(i, int) and not isinstance(i, bool) for i in a
        ):
            problems.append("region.anchors: expected list of integers")
    if "plane" in region:
        p = region["plane"]
        if not isinstance(p, dict):
            problems.append("region.plane: expected object")
        else:
            for kk in ("normal", "point"):
                v = p.get(kk)
                if (
                    not isinstance(v, list)
                    or len(v) != 3
                    or not all(isinstance(c, _NUM) and not isinstance(c, bool) for c in v)
                ):
                    problems.append(f"region.plane.{kk}: expected [x, y, z] numbers")
    if "box" in region:
        b = region["box"]
        ok = (
            isinstance(b, list)
            and len(b) == 2
            and all(
                isinstance(corner, list)
                and len(corner) == 3
                and all(isinstance(c, _NUM) and not isinstance(c, bool) for c in corner)
                for corner in b
            )
        )
        if not ok:
            problems.append("region.box: expected [[xmin,ymin,zmin],[xmax,ymax,zmax]]")


def parse_instruction(text) -> SynthesisInstruction:
    """Parse and type-check an instruction document.

    Accepts a JSON string/bytes or an already-decoded dict. All schema
    problems are reported together in one error.
    """
    if isinstance(text, (str, bytes)):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"instruction is not valid JSON: {exc}") from exc
    else:
        doc = text
    if not isinstance(doc, dict):
        raise FormatError("instruction must be a JSON object")

    problems: list[str] = []
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        problems.append(f"schema_version: unsupported version {version!r}")

    u = doc.get("type")
    if u not in DEFECT_TYPES:
        problems.append(f"type: unknown defect type {u!r}")
    operator = doc.get("operator")
    if operator is None and u in TYPE_TO_OPERATOR:
        operator = TYPE_TO_OPERATOR[u]  # operator may be inferred from type
    if operator not in OPERATORS:
        problems.append(f"operator: unknown operator {operator!r}")
    if u in TYPE_TO_OPERATOR and operator in OPERATORS:
        if TYPE_TO_OPERATOR[u] != operator:
            problems.append(
                f"operator: {operator!r} inconsistent with type {u!r} "
                f"(expected {TYPE_TO_OPERATOR[u]!r})"
            )

    seed = doc.get("seed")
    if not isinstance(seed, int) or isinstance(seed, bool):
        problems.append("seed: required integer")

    params = doc.get("params", {})
    if not isinstance(params, dict):
        problems.append("params: expected object")
        params = {}
    elif operator in OPERATORS:
        _check_params(operator, params, problems)

    region = doc.get("region", {})
    _check_region(region, problems)

    if problems:
        raise FormatError("invalid instruction: " + "; ".join(problems))
    return SynthesisInstruction(
        type=u,
        operator=operator,
        region=region,
        params=params,
        seed=seed,
        schema_version=version,
    )

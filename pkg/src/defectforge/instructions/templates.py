"""Built-in per-type instruction templates.

Each template draws operator parameters uniformly from a fixed range
table (lengths as fractions of the reference radius) and leaves the
region empty so it is sampled at materialization time. Draws are
deterministic under (type, category, seed) and every produced
instruction passes the validator on any reasonably dense cloud.
"""

from __future__ import annotations

import math

from ..errors import ContractError
from ..rng import derive_seed, make_rng
from .schema import TYPE_TO_OPERATOR, CategoryMetadata, SynthesisInstruction


def _uniform(rng, lo: float, hi: float) -> float:
    return float(lo + (hi - lo) * rng.random())


def _int_between(rng, lo: int, hi: int) -> int:
    return int(rng.integers(lo, hi + 1))


def _sign(rng) -> float:
    return 1.0 if rng.random() < 0.5 else -1.0


def fallback_template(u: str, category: CategoryMetadata | None = None, seed: int = 0) -> SynthesisInstruction:
    """Deterministic rule-based instruction for defect type u."""
    if u not in TYPE_TO_OPERATOR:
        raise ContractError(f"unknown defect type {u!r}")
    tag = f"template:{u}" if category is None else f"template:{u}:{category.name}"
    rng = make_rng(derive_seed(seed, tag))

    # Radii stay well above the point spacing of a few-thousand-point
    # cloud (~0.05-0.1 of the reference radius); narrower supports touch
    # 0-2 samples and degenerate into single-point defects.
    if u in ("bump", "dent"):
        params = {
            "m": 1,
            "r": _uniform(rng, 0.12, 0.22),
            "d": _uniform(rng, 0.03, 0.06),
            "dir": 1 if u == "bump" else -1,
        }
    elif u == "hole":
        # support wide enough that a rim survives the removal threshold
        params = {
            "m": 1,
            "r": _uniform(rng, 0.15, 0.22),
            "d": _uniform(rng, 0.02, 0.04),
            "dir": -1,
            "removal_frac": 0.8,
        }
    elif u == "scratch":
        # narrow shallow cut along a multi-anchor path
        params = {
            "m": _int_between(rng, 3, 5),
            "r": _uniform(rng, 0.06, 0.10),
            "d": _uniform(rng, 0.02, 0.04),
            "dir": -1,
        }
    elif u == "groove":
        # wider and deeper channel than a scratch
        params = {
            "m": _int_between(rng, 2, 4),
            "r": _uniform(rng, 0.10, 0.16),
            "d": _uniform(rng, 0.04, 0.07),
            "dir": -1,
        }
    elif u == "bend":
        params = {
            "delta": _uniform(rng, 0.2, 0.4),
            "theta": _sign(rng) * _uniform(rng, math.pi / 12, math.pi / 4),
        }
    elif u == "crack":
        params = {
            "tau": _uniform(rng, 0.10, 0.20),
            "sigma": _uniform(rng, 0.0, 0.01),
            "r_c": _uniform(rng, 0.04, 0.08),
        }
    else:  # freeform
        kernels = [
            {
                "amp": _sign(rng) * _uniform(rng, 0.03, 0.08),
                "center": [_uniform(rng, 0.2, 0.8), _uniform(rng, 0.2, 0.8)],
                "sigma": _uniform(rng, 0.15, 0.4),
            }
            for _ in range(_int_between(rng, 2, 5))
        ]
        params = {
            "m": _int_between(rng, 5, 7),
            "eps": _uniform(rng, 0.15, 0.30),
            "kernels": kernels,
            "k_smooth": 8,
            "lam": 0.5,
        }

    return SynthesisInstruction(
        type=u,
        operator=TYPE_TO_OPERATOR[u],
        region={},
        params=params,
        seed=seed,
    )

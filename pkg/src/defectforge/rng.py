"""Deterministic random sampling helpers.

All stochastic code in the toolkit draws from numpy Generators created
through this module so that a single integer seed pins every artifact.
Sub-streams are derived by hashing, never by sharing generator state,
which keeps results stable when call order changes.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(master: int, tag: str) -> int:
    """Derive a 64-bit sub-seed from a master seed and a string tag."""
    digest = hashlib.blake2b(f"{master}:{tag}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def gaussian(rng: np.random.Generator, size, sigma: float = 1.0) -> np.ndarray:
    """Standard-normal samples via the Box-Muller transform.

    Built from uniform draws so the bit pattern depends only on the
    generator's uniform stream, not on numpy's internal normal
    algorithm (which has changed between releases).
    """
    n = int(np.prod(size)) if not np.isscalar(size) else int(size)
    m = (n + 1) // 2
    # open interval (0,1] for u1 to keep log() finite
    u1 = 1.0 - rng.random(m)
    u2 = rng.random(m)
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate([r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)])[:n]
    out = z * sigma
    if np.isscalar(size):
        return out
    return out.reshape(size)


def unit_vector(rng: np.random.Generator) -> np.ndarray:
    """Uniform random direction on the unit sphere."""
    # rejection-free: z uniform in [-1,1], azimuth uniform
    z = rng.uniform(-1.0, 1.0)
    phi = rng.uniform(0.0, 2.0 * np.pi)
    s = np.sqrt(max(0.0, 1.0 - z * z))
    return np.array([s * np.cos(phi), s * np.sin(phi), z])


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform random rotation matrix (Shoemake's quaternion method)."""
    u1, u2, u3 = rng.random(3)
    q = np.array(
        [
            np.sqrt(1.0 - u1) * np.sin(2.0 * np.pi * u2),
            np.sqrt(1.0 - u1) * np.cos(2.0 * np.pi * u2),
            np.sqrt(u1) * np.sin(2.0 * np.pi * u3),
            np.sqrt(u1) * np.cos(2.0 * np.pi * u3),
        ]
    )
    x, y, z, w = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def rotation_about_axis(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rotation matrix for a given axis and angle (Rodrigues form)."""
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n == 0.0:
        raise ValueError("rotation axis must be nonzero")
    ux, uy, uz = axis / n
    c, s = np.cos(angle), np.sin(angle)
    k = np.array([[0.0, -uz, uy], [uz, 0.0, -ux], [-uy, ux, 0.0]])
    return np.eye(3) * c + s * k + (1.0 - c) * np.outer([ux, uy, uz], [ux, uy, uz])

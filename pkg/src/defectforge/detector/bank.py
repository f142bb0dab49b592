"""Prototype bank: farthest-point sampling over normal training features."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ContractError, FormatError
from .features import FeatureMatrix

BANK_SCHEMA_VERSION = 1
DEFAULT_BANK_SIZE = 2048


@dataclass
class PrototypeBank:
    prototypes: np.ndarray
    fingerprint: dict
    profile_ref: str | None = None

    def __post_init__(self):
        self.prototypes = np.asarray(self.prototypes, dtype=np.float64)
        if self.prototypes.ndim != 2 or len(self.prototypes) < 1:
            raise ContractError("bank needs at least one prototype row")
        if self.prototypes.shape[1] != self.fingerprint.get("dim"):
            raise ContractError(
                f"prototype dim {self.prototypes.shape[1]} does not match "
                f"fingerprint dim {self.fingerprint.get('dim')}"
            )

    def __len__(self) -> int:
        return len(self.prototypes)


def _stack(features) -> tuple[np.ndarray, dict]:
    mats = [features] if isinstance(features, FeatureMatrix) else list(features)
    if not mats:
        raise ContractError("at least one feature matrix required")
    fingerprint = mats[0].fingerprint
    for m in mats[1:]:
        if m.fingerprint != fingerprint:
            raise ContractError(
                f"mixed extractor fingerprints: {m.fingerprint} vs {fingerprint}"
            )
    return np.vstack([m.features for m in mats]), fingerprint


def farthest_point_indices(rows: np.ndarray, k: int) -> np.ndarray:
    """Greedy max-min selection; start at the max-norm row (ties: lowest index)."""
    start = int(np.argmax(np.linalg.norm(rows, axis=1)))
    selected = np.empty(k, dtype=np.int64)
    selected[0] = start
    min_dist = np.linalg.norm(rows - rows[start], axis=1)
    for i in range(1, k):
        nxt = int(np.argmax(min_dist))
        selected[i] = nxt
        np.minimum(min_dist, np.linalg.norm(rows - rows[nxt], axis=1), out=min_dist)
    return selected


def build_prototypes(features, k: int = DEFAULT_BANK_SIZE, profile_ref=None) -> PrototypeBank:
    """FPS-select k prototypes from one or more feature matrices."""
    rows, fingerprint = _stack(features)
    if not 1 <= k <= len(rows):
        raise ContractError(f"bank size must satisfy 1 <= k <= {len(rows)}, got {k}")
    indices = farthest_point_indices(rows, k)
    return PrototypeBank(rows[indices], dict(fingerprint), profile_ref)


def save_bank(bank: PrototypeBank, path) -> None:
    doc = {
        "schema_version": BANK_SCHEMA_VERSION,
        "fingerprint": bank.fingerprint,
        "profile_ref": bank.profile_ref,
        "prototypes": [[float(x) for x in row] for row in bank.prototypes],
    }
    Path(path).write_text(json.dumps(doc, sort_keys=True) + "\n", encoding="utf-8")


def load_bank(path) -> PrototypeBank:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"bank file is not valid JSON: {exc}") from exc
    version = doc.get("schema_version")
    if version != BANK_SCHEMA_VERSION:
        raise FormatError(f"unsupported bank schema_version {version!r}")
    try:
        return PrototypeBank(
            prototypes=np.asarray(doc["prototypes"], dtype=np.float64),
            fingerprint=doc["fingerprint"],
            profile_ref=doc.get("profile_ref"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed bank document: {exc}") from exc

"""In-memory cloud store with content-hash ids, plus preview decimation.

Ids are hashes of the canonical PLY bytes, so uploading the same cloud
twice lands on the same entry and commit responses are reproducible.
Entries are immutable after insert; a lock serializes the insert path.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass

import numpy as np

from ..errors import ContractError, ResourceLimitError
from ..geometry import PointCloud

DEFAULT_MAX_BYTES = 50 * 1024 * 1024
DEFAULT_PREVIEW_BUDGET = 20_000


def content_id(data: bytes) -> str:
    return hashlib.blake2b(data, digest_size=8).hexdigest()


@dataclass(frozen=True)
class StoredCloud:
    id: str
    cloud: PointCloud
    mask: np.ndarray | None
    data: bytes  # canonical PLY document, served verbatim on download


class SessionStore:
    """Insert-only id -> cloud map with a total-byte cap."""

    def __init__(self, max_bytes: int = DEFAULT_MAX_BYTES):
        if max_bytes < 1:
            raise ContractError(f"max_bytes must be positive, got {max_bytes}")
        self.max_bytes = max_bytes
        self._lock = threading.Lock()
        self._entries: dict[str, StoredCloud] = {}
        self._bytes = 0

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    @property
    def total_bytes(self) -> int:
        with self._lock:
            return self._bytes

    def put(self, cloud: PointCloud, mask, data: bytes) -> StoredCloud:
        cid = content_id(data)
        with self._lock:
            hit = self._entries.get(cid)
            if hit is not None:
                return hit
            if self._bytes + len(data) > self.max_bytes:
                raise ResourceLimitError(
                    f"store would hold {self._bytes + len(data)} bytes, "
                    f"cap is {self.max_bytes}"
                )
            entry = StoredCloud(cid, cloud, mask, data)
            self._entries[cid] = entry
            self._bytes += len(data)
            return entry

    def get(self, cid: str) -> StoredCloud | None:
        with self._lock:
            return self._entries.get(cid)

    def fingerprint(self) -> str:
        """Digest over stored ids: equal before/after ⇔ nothing was added."""
        with self._lock:
            joined = ",".join(sorted(self._entries))
        return hashlib.blake2b(joined.encode("ascii"), digest_size=8).hexdigest()


def _occupied_cells(points: np.ndarray, origin: np.ndarray, edge: float) -> np.ndarray:
    return np.floor((points - origin) / edge).astype(np.int64)


def preview_indices(points: np.ndarray, budget: int) -> np.ndarray:
    """Indices of at most `budget` real points spread over the cloud.

    One representative per occupied voxel cell (the member nearest the
    cell's centroid, ties to the lowest index); the cell edge is bisected
    to the finest size whose occupied-cell count still fits the budget.
    Returned indices are sorted ascending.
    """
    points = np.asarray(points, dtype=np.float64)
    if budget < 1:
        raise ContractError(f"preview budget must be >= 1, got {budget}")
    n = len(points)
    if n <= budget:
        return np.arange(n)

    origin = points.min(axis=0)
    span = float(np.ptp(points, axis=0).max())
    if span == 0.0:
        return np.arange(1)

    # occupied-cell count grows monotonically as the edge shrinks
    lo, hi = 0.0, 2.0 * span
    for _ in range(48):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        cells = _occupied_cells(points, origin, mid)
        count = len(np.unique(cells, axis=0))
        if count <= budget:
            hi = mid
        else:
            lo = mid

    cells = _occupied_cells(points, origin, hi)
    _, inverse = np.unique(cells, axis=0, return_inverse=True)
    k = int(inverse.max()) + 1

    sums = np.zeros((k, 3))
    np.add.at(sums, inverse, points)
    counts = np.bincount(inverse, minlength=k).astype(np.float64)
    centroids = sums / counts[:, None]

    d2 = ((points - centroids[inverse]) ** 2).sum(axis=1)
    order = np.lexsort((np.arange(n), d2, inverse))
    _, firsts = np.unique(inverse[order], return_index=True)
    return np.sort(order[firsts])

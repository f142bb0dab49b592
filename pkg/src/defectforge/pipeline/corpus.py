"""Deterministic batch synthesis with a JSON manifest.

Every entry is an independent pure computation keyed by a seed derived
from (master seed, entry index), so the corpus is byte-identical across
runs and across worker counts. Layout:

    <out>/<category>/<entry_id>.ply        defect cloud
    <out>/<category>/<entry_id>.mask.ply   same geometry + anomaly channel
    <out>/manifest.json
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from ..errors import ContractError, DefectForgeError, DegenerateGeometryError
from ..geometry import estimate_normals, save_cloud
from ..instructions import execute, resolve
from ..instructions.schema import DEFECT_TYPES
from ..rng import derive_seed
from .augment import AugmentConfig, augment

MANIFEST_SCHEMA_VERSION = 1
MAX_RETRIES = 5


def _config_hash(counts, cfg, profile, seed) -> str:
    doc = {
        "counts": counts,
        "augment": cfg.to_dict() if cfg is not None else None,
        "profile": profile.to_dict() if profile is not None else None,
        "seed": seed,
    }
    blob = json.dumps(doc, sort_keys=True).encode()
    return hashlib.blake2b(blob, digest_size=16).hexdigest()


def _synthesize_entry(idx, category, source, profile, cfg, meta, master_seed, out_dir):
    """One corpus entry; returns a manifest entry dict (possibly skipped)."""
    entry_seed = derive_seed(master_seed, f"entry:{idx}")
    entry_id = f"{idx:05d}_{category}"
    last_error = "unknown"
    for attempt in range(1 + MAX_RETRIES):
        attempt_seed = entry_seed if attempt == 0 else derive_seed(entry_seed, f"retry:{attempt}")
        try:
            instr, origin = resolve(None, category, source, meta, profile, seed=attempt_seed)
            out, mask, provenance = execute(instr, source, profile, origin)
            if not mask.any():
                raise DegenerateGeometryError("synthesis produced an empty mask")
            if cfg is not None:
                out, mask = augment(out, mask, replace(cfg, seed=derive_seed(attempt_seed, "augment")))
        except DefectForgeError as exc:
            last_error = str(exc)
            continue
        cat_dir = Path(out_dir) / category
        cat_dir.mkdir(parents=True, exist_ok=True)
        cloud_path = cat_dir / f"{entry_id}.ply"
        mask_path = cat_dir / f"{entry_id}.mask.ply"
        save_cloud(out, None, cloud_path)
        save_cloud(out, mask, mask_path)
        return {
            "index": idx,
            "id": entry_id,
            "category": category,
            "source": source.id,
            "seed": attempt_seed,
            "retries": attempt,
            "origin": origin,
            "cloud": f"{category}/{entry_id}.ply",
            "mask": f"{category}/{entry_id}.mask.ply",
            "provenance": provenance,
        }
    return {
        "index": idx,
        "id": entry_id,
        "category": category,
        "source": source.id,
        "seed": entry_seed,
        "skipped": True,
        "error": last_error,
    }


def batch_synthesize(
    sources,
    profile,
    counts: dict,
    out_dir,
    cfg: AugmentConfig | None = None,
    meta=None,
    seed: int = 0,
    workers: int = 1,
) -> dict:
    """Synthesize counts[type] defects per type over round-robin sources.

    Returns the manifest (also written to <out>/manifest.json). Failed
    entries are retried up to 5 times with fresh derived seeds, then
    recorded under "skipped".
    """
    sources = list(sources)
    if not sources:
        raise ContractError("at least one source cloud required")
    for key, value in counts.items():
        if key not in DEFECT_TYPES:
            raise ContractError(f"unknown defect type {key!r} in counts")
        if not isinstance(value, int) or value < 0:
            raise ContractError(f"counts[{key!r}] must be a non-negative integer")
    if workers < 1:
        raise ContractError(f"workers must be >= 1, got {workers}")

    # normals are estimated once per source, not once per entry
    sources = [
        s if s.has_normals else estimate_normals(s, min(16, len(s) - 1)) for s in sources
    ]

    jobs = []
    idx = 0
    for category in DEFECT_TYPES:
        for _ in range(counts.get(category, 0)):
            jobs.append((idx, category, sources[idx % len(sources)]))
            idx += 1

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def run(job):
        i, category, source = job
        return _synthesize_entry(i, category, source, profile, cfg, meta, seed, out_dir)

    if workers == 1 or len(jobs) <= 1:
        results = [run(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))

    manifest = {
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "seed": seed,
        "config_hash": _config_hash(counts, cfg, profile, seed),
        "counts": {u: counts.get(u, 0) for u in DEFECT_TYPES if counts.get(u, 0)},
        "augment": cfg.to_dict() if cfg is not None else None,
        "profile": profile.to_dict() if profile is not None else None,
        "entries": [r for r in results if not r.get("skipped")],
        "skipped": [r for r in results if r.get("skipped")],
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return manifest

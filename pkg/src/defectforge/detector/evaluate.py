"""Test-split evaluation: object and point AUROC over a cloud list."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..errors import ContractError
from ..geometry import PointCloud
from ..pipeline.sdn import SdnProfile, apply_sdn
from .bank import PrototypeBank
from .features import extract_features
from .metrics import aggregate, auroc, default_k_agg, score_points, upsample_scores


def score_cloud(
    cloud: PointCloud,
    bank: PrototypeBank,
    profile: SdnProfile,
    k_agg: int | None = None,
) -> dict:
    """Pure per-cloud scoring: SDN, features, bank distances, aggregation.

    Returns both resolutions of the score field; the object score is
    aggregated over the downsampled scores.
    """
    downsampled, inverse = apply_sdn(cloud, profile)
    features = extract_features(downsampled, bank.fingerprint["k_feat"])
    scores = score_points(features, bank)
    k = default_k_agg(len(scores)) if k_agg is None else k_agg
    return {
        "id": cloud.id,
        "object_score": aggregate(scores, k),
        "k_agg": k,
        "scores_down": scores,
        "scores": upsample_scores(scores, inverse),
    }


def evaluate(
    items,
    bank: PrototypeBank,
    profile: SdnProfile,
    k_agg: int | None = None,
    workers: int = 1,
) -> tuple[dict, list[dict]]:
    """items: (cloud, mask or None, object label) triples.

    Returns (report, artifacts). The report carries O-ROC over object
    scores and P-ROC over all upsampled point scores pooled against the
    ground-truth masks; artifacts carry per-cloud score vectors for
    export. Output is identical for any worker count.
    """
    items = list(items)
    if not items:
        raise ContractError("evaluation needs at least one cloud")
    if workers < 1:
        raise ContractError(f"workers must be >= 1, got {workers}")

    def run(item):
        cloud, mask, label = item
        if mask is None:
            mask = np.zeros(len(cloud), dtype=bool)
        else:
            mask = np.asarray(mask, dtype=bool)
            if len(mask) != len(cloud):
                raise ContractError(
                    f"mask rows ({len(mask)}) != points ({len(cloud)}) for {cloud.id}"
                )
        artifact = score_cloud(cloud, bank, profile, k_agg)
        artifact["label"] = bool(label)
        artifact["mask"] = mask
        return artifact

    if workers == 1 or len(items) == 1:
        artifacts = [run(item) for item in items]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            artifacts = list(pool.map(run, items))

    labels = np.array([a["label"] for a in artifacts], dtype=bool)
    object_scores = np.array([a["object_score"] for a in artifacts])
    pooled_scores = np.concatenate([a["scores"] for a in artifacts])
    pooled_mask = np.concatenate([a["mask"] for a in artifacts])

    report = {
        "o_roc": auroc(labels, object_scores),
        "p_roc": auroc(pooled_mask, pooled_scores),
        "n_clouds": len(artifacts),
        "n_points": int(len(pooled_scores)),
        "per_cloud": [
            {
                "id": a["id"],
                "label": a["label"],
                "object_score": float(a["object_score"]),
                "k_agg": int(a["k_agg"]),
                "points": int(len(a["scores"])),
                "masked": int(a["mask"].sum()),
            }
            for a in artifacts
        ],
    }
    return report, artifacts

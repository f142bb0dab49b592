"""Stage-II data machinery: normalization, augmentation, corpus builds."""

from .augment import AugmentConfig, augment
from .corpus import batch_synthesize
from .sdn import (
    SdnProfile,
    apply_sdn,
    denormalize,
    fit_sdn_profile,
    load_profile,
    normalize,
    pool_mask,
    save_profile,
)

__all__ = [
    "AugmentConfig",
    "augment",
    "batch_synthesize",
    "SdnProfile",
    "apply_sdn",
    "denormalize",
    "fit_sdn_profile",
    "load_profile",
    "normalize",
    "pool_mask",
    "save_profile",
]

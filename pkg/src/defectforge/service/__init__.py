"""HTTP studio service."""

from .app import create_app
from .store import (
    DEFAULT_MAX_BYTES,
    DEFAULT_PREVIEW_BUDGET,
    SessionStore,
    StoredCloud,
    content_id,
    preview_indices,
)

__all__ = [
    "create_app",
    "SessionStore",
    "StoredCloud",
    "content_id",
    "preview_indices",
    "DEFAULT_MAX_BYTES",
    "DEFAULT_PREVIEW_BUDGET",
]

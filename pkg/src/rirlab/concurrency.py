"""Worker-count policy for batch operations."""
from __future__ import annotations

import os

THREADS_ENV = "RIRLAB_THREADS"


def worker_count(requested: int | None = None) -> int:
    """Number of workers for batch work, capped by the RIRLAB_THREADS env var."""
    cap = os.environ.get(THREADS_ENV)
    limit = max(1, int(cap)) if cap else (os.cpu_count() or 1)
    if requested is None:
        return limit
    return max(1, min(requested, limit))

"""Canonical JSON serialization.

Every persisted or transmitted artifact (events, snapshots, reports) goes
through these helpers so that equal states serialize byte-identically:
sorted keys, no whitespace padding, UTF-8, LF endings.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any


def canonical_dumps(obj: Any) -> str:
    """Serialize to canonical JSON: sorted keys, compact separators."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def canonical_hash(obj: Any) -> str:
    """Stable short hash of a JSON-serializable object."""
    return hashlib.sha256(canonical_dumps(obj).encode("utf-8")).hexdigest()[:16]

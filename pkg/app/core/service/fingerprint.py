"""Deterministic fingerprints of configuration sections"""

import hashlib
import json
from typing import Any


def fingerprint(payload: Any, *upstream: str) -> str:
    """
    Hash a JSON-compatible payload together with upstream fingerprints.

    Keys are sorted so ``{a:1, b:2}`` and ``{b:2, a:1}`` hash equal; ``default=str``
    covers paths and other scalars that json cannot encode.
    """
    payload_str = json.dumps(payload, sort_keys=True, default=str, separators=(",", ":"))
    digest = hashlib.sha256(payload_str.encode("utf-8"))
    for parent in upstream:
        digest.update(b"|")
        digest.update(parent.encode("ascii"))
    return digest.hexdigest()

"""Stable seed derivation.

Per-document random state is derived from (global seed, document id) with a
keyed blake2 hash, so results do not depend on processing order or on
PYTHONHASHSEED. The same helper also derives per-round seeds for
augmentation.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(global_seed: int, *parts: str | int) -> int:
    """Mix a global seed with any number of string/int parts into a 64-bit seed."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(global_seed)).encode("utf-8"))
    for part in parts:
        h.update(b"\x1f")
        h.update(str(part).encode("utf-8"))
    return int.from_bytes(h.digest(), "big")


def derive_rng(global_seed: int, *parts: str | int) -> np.random.Generator:
    """Seeded generator for one (document, stage) combination."""
    return np.random.default_rng(derive_seed(global_seed, *parts))


def stable_bucket(text: str, buckets: int) -> int:
    """Hash a token into [0, buckets) independent of process and platform."""
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") % buckets

"""Random tokens and timestamp freshness."""

from __future__ import annotations

import random

NONCE_BYTES = 8
HASH_KEY_BYTES = 16
DEFAULT_FRESHNESS_MS = 2000


def nonce64(rng: random.Random) -> bytes:
    return rng.getrandbits(64).to_bytes(NONCE_BYTES, "big")


def hash_key128(rng: random.Random) -> bytes:
    return rng.getrandbits(128).to_bytes(HASH_KEY_BYTES, "big")


def timestamp_fresh(ts: int, now: int, window: int = DEFAULT_FRESHNESS_MS) -> bool:
    """True iff the message is at most ``window`` ms old and not future-dated."""
    if window <= 0:
        raise ValueError("freshness window must be positive")
    return 0 <= now - ts <= window

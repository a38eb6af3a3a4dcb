"""SipHash-2-4 keyed hash with a 128-bit key and 64-bit output."""

from __future__ import annotations

import struct

_MASK = 0xFFFFFFFFFFFFFFFF

KEY_BYTES = 16
DIGEST_BYTES = 8


def _rotl(x: int, b: int) -> int:
    return ((x << b) | (x >> (64 - b))) & _MASK


def _rounds(v0: int, v1: int, v2: int, v3: int, n: int) -> tuple[int, int, int, int]:
    for _ in range(n):
        v0 = (v0 + v1) & _MASK
        v1 = _rotl(v1, 13) ^ v0
        v0 = _rotl(v0, 32)
        v2 = (v2 + v3) & _MASK
        v3 = _rotl(v3, 16) ^ v2
        v0 = (v0 + v3) & _MASK
        v3 = _rotl(v3, 21) ^ v0
        v2 = (v2 + v1) & _MASK
        v1 = _rotl(v1, 17) ^ v2
        v2 = _rotl(v2, 32)
    return v0, v1, v2, v3


def siphash64_int(key: bytes, message: bytes) -> int:
    if len(key) != KEY_BYTES:
        raise ValueError(f"SipHash key must be {KEY_BYTES} bytes, got {len(key)}")
    k0, k1 = struct.unpack("<QQ", key)
    v0 = k0 ^ 0x736F6D6570736575
    v1 = k1 ^ 0x646F72616E646F6D
    v2 = k0 ^ 0x6C7967656E657261
    v3 = k1 ^ 0x7465646279746573

    n = len(message)
    tail_start = n - (n % 8)
    for (m,) in struct.iter_unpack("<Q", message[:tail_start]):
        v3 ^= m
        v0, v1, v2, v3 = _rounds(v0, v1, v2, v3, 2)
        v0 ^= m

    # final block: remaining bytes, length in the top byte
    b = ((n & 0xFF) << 56) | int.from_bytes(message[tail_start:], "little")
    v3 ^= b
    v0, v1, v2, v3 = _rounds(v0, v1, v2, v3, 2)
    v0 ^= b

    v2 ^= 0xFF
    v0, v1, v2, v3 = _rounds(v0, v1, v2, v3, 4)
    return v0 ^ v1 ^ v2 ^ v3


def siphash64(key: bytes, message: bytes) -> bytes:
    """Return the 8-byte SipHash-2-4 digest (little-endian, as in the reference code)."""
    return siphash64_int(key, message).to_bytes(DIGEST_BYTES, "little")

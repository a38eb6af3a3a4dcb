"""Integrated encryption to an elliptic-curve public key.

Layout: ephemeral public key (SEC1 compressed) || body || 16-byte tag.
The body is the plaintext XOR a SHAKE-256 keystream; the tag is truncated
HMAC-SHA256 over ephemeral key and body.
"""

from __future__ import annotations

import hashlib
import hmac
import random

from .curves import P256, CurveParams, InvalidPoint, Point
from .ecdsa import KeyPair

MAX_PLAINTEXT = 64 * 1024
TAG_BYTES = 16
_INFO = b"courier/ecies/v1"


class IntegrityFailure(Exception):
    """Ciphertext was malformed, tampered with, or addressed to another key."""


def _derive(eph: bytes, shared_x: int, params: CurveParams) -> tuple[bytes, bytes]:
    okm = hashlib.sha512(_INFO + eph + shared_x.to_bytes(params.byte_len, "big")).digest()
    return okm[:32], okm[32:]


def _xor_stream(key: bytes, data: bytes) -> bytes:
    stream = hashlib.shake_256(key).digest(len(data))
    return bytes(a ^ b for a, b in zip(data, stream))


def _tag(mac_key: bytes, eph: bytes, body: bytes) -> bytes:
    return hmac.new(mac_key, eph + body, hashlib.sha256).digest()[:TAG_BYTES]


def overhead(params: CurveParams = P256) -> int:
    """Ciphertext bytes beyond the plaintext length."""
    return 1 + params.byte_len + TAG_BYTES


def asym_encrypt(
    plaintext: bytes, pub: Point, rng: random.Random, params: CurveParams = P256
) -> bytes:
    if len(plaintext) > MAX_PLAINTEXT:
        raise ValueError(f"plaintext exceeds {MAX_PLAINTEXT} bytes")
    e = rng.randrange(1, params.n)
    eph = params.encode_point(params.base_mul(e))
    shared = params.shared_x(e, pub)
    enc_key, mac_key = _derive(eph, shared, params)
    body = _xor_stream(enc_key, plaintext)
    return eph + body + _tag(mac_key, eph, body)


def asym_decrypt(ciphertext: bytes, kp: KeyPair) -> bytes:
    params = kp.curve
    plen = 1 + params.byte_len
    if len(ciphertext) < plen + TAG_BYTES:
        raise IntegrityFailure("ciphertext too short")
    eph, body, tag = ciphertext[:plen], ciphertext[plen:-TAG_BYTES], ciphertext[-TAG_BYTES:]
    try:
        E = params.decode_point(eph)
    except InvalidPoint as exc:
        raise IntegrityFailure(f"bad ephemeral key: {exc}") from None
    shared = params.shared_x(kp.private, E)
    if shared is None:
        raise IntegrityFailure("degenerate shared point")
    enc_key, mac_key = _derive(eph, shared, params)
    if not hmac.compare_digest(tag, _tag(mac_key, eph, body)):
        raise IntegrityFailure("tag mismatch")
    return _xor_stream(enc_key, body)

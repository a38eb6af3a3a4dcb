"""ECDSA over a SipHash message digest.

Signing hashes the message with SipHash-2-4 under a fixed public key and
uses the leftmost 64 bits of that digest as the integer ``h``. The scalar
core (:func:`sign_scalar` / :func:`verify_scalar`) takes ``h`` directly, so
it can also be checked against standard SHA-256 ECDSA vectors.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from . import accel
from .curves import P256, CurveParams, Point
from .siphash import siphash64

# Verifiers must recompute the pre-signing digest, so its key is public.
SIGNING_HASH_KEY = b"courier/sig-hash"
assert len(SIGNING_HASH_KEY) == 16

HASH_BITS = 64


@dataclass(frozen=True)
class KeyPair:
    private: int = field(repr=False)
    public: Point
    curve: CurveParams = field(default=P256, repr=False)


@dataclass(frozen=True)
class Signature:
    r: int
    s: int

    def to_bytes(self, width: int = 32) -> bytes:
        return self.r.to_bytes(width, "big") + self.s.to_bytes(width, "big")

    @classmethod
    def from_bytes(cls, data: bytes) -> "Signature":
        half = len(data) // 2
        if len(data) != 2 * half or half == 0:
            raise ValueError("signature encoding must split into two equal halves")
        return cls(int.from_bytes(data[:half], "big"), int.from_bytes(data[half:], "big"))


def keypair_generate(params: CurveParams, rng: random.Random) -> KeyPair:
    d = rng.randrange(1, params.n)
    return KeyPair(private=d, public=params.base_mul(d), curve=params)


def message_scalar(message: bytes) -> int:
    """h: leftmost 64 bits of SIP_h(message), zero-extended to scalar width."""
    e = siphash64(SIGNING_HASH_KEY, message)
    return int.from_bytes(e, "big") >> (8 * len(e) - HASH_BITS)


def sign_scalar(h: int, d: int, k: int, params: CurveParams) -> Optional[Signature]:
    """One signing attempt with a caller-chosen k; None when r or s is zero."""
    n = params.n
    R = params.base_mul(k)
    if R is None:
        return None
    r = R.x % n
    if r == 0:
        return None
    s = pow(k, -1, n) * (h + r * d) % n
    if s == 0:
        return None
    return Signature(r, s)


def verify_scalar(h: int, sig: Signature, Q: Point, params: CurveParams) -> bool:
    n = params.n
    r, s = sig.r, sig.s
    if not (1 <= r < n and 1 <= s < n):
        return False
    fast = accel.curve_for(params.name)
    if fast is not None:
        return accel.verify(fast, h, r, s, Q.x, Q.y)
    c = pow(s, -1, n)
    u1 = h * c % n
    u2 = r * c % n
    X = params.mul_add(u1, u2, Q)
    if X is None:
        return False
    return X.x % n == r


def ecdsa_sign(message: bytes, kp: KeyPair, rng: random.Random) -> Signature:
    if not message:
        raise ValueError("cannot sign an empty message")
    h = message_scalar(message)
    params = kp.curve
    while True:
        k = rng.randrange(1, params.n)
        sig = sign_scalar(h, kp.private, k, params)
        if sig is not None:
            return sig


def ecdsa_verify(message: bytes, sig: Signature, pub: Point, params: CurveParams = P256) -> bool:
    if not params.is_on_curve(pub):
        return False
    return verify_scalar(message_scalar(message), sig, pub, params)


@dataclass(frozen=True)
class Signed:
    """A message together with a signature over it (the ``sign(x)`` of the protocol)."""

    message: bytes
    signature: Signature

    def verify(self, pub: Point, params: CurveParams = P256) -> bool:
        return ecdsa_verify(self.message, self.signature, pub, params)

    def to_bytes(self) -> bytes:
        n = len(self.message)
        return n.to_bytes(2, "big") + self.message + self.signature.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "Signed":
        if len(data) < 2:
            raise ValueError("truncated signed value")
        n = int.from_bytes(data[:2], "big")
        if len(data) != 2 + n + 64:
            raise ValueError("signed value has wrong length")
        return cls(data[2 : 2 + n], Signature.from_bytes(data[2 + n :]))


def sign_value(message: bytes, kp: KeyPair, rng: random.Random) -> Signed:
    return Signed(message, ecdsa_sign(message, kp, rng))

"""Cryptographic primitives used by every protocol actor."""

from .curves import CURVES, P256, SECP256K1, CurveParams, InvalidPoint, Point
from .ecdsa import (
    KeyPair,
    Signature,
    Signed,
    ecdsa_sign,
    ecdsa_verify,
    keypair_generate,
    message_scalar,
    sign_scalar,
    sign_value,
    verify_scalar,
)
from .ecies import MAX_PLAINTEXT, IntegrityFailure, asym_decrypt, asym_encrypt
from .siphash import siphash64, siphash64_int
from .tokens import DEFAULT_FRESHNESS_MS, hash_key128, nonce64, timestamp_fresh

__all__ = [
    "CURVES",
    "P256",
    "SECP256K1",
    "CurveParams",
    "InvalidPoint",
    "Point",
    "KeyPair",
    "Signature",
    "Signed",
    "sign_value",
    "ecdsa_sign",
    "ecdsa_verify",
    "keypair_generate",
    "message_scalar",
    "sign_scalar",
    "verify_scalar",
    "MAX_PLAINTEXT",
    "IntegrityFailure",
    "asym_decrypt",
    "asym_encrypt",
    "siphash64",
    "siphash64_int",
    "DEFAULT_FRESHNESS_MS",
    "hash_key128",
    "nonce64",
    "timestamp_fresh",
]

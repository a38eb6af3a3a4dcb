"""Optional OpenSSL-backed scalar multiplication for the named curves.

Every operation here is deterministic in its inputs (private scalars are
supplied by the caller), so switching backends never changes protocol
bytes. The native gmpy2 arithmetic in :mod:`.curves` stays the reference;
the test suite cross-checks the two.
"""

from __future__ import annotations

import contextlib
import os
from typing import Iterator

try:
    from cryptography.exceptions import InvalidSignature
    from cryptography.hazmat.primitives import hashes
    from cryptography.hazmat.primitives.asymmetric import ec, utils
except ImportError:  # pragma: no cover - exercised only without the package
    ec = None

BACKENDS = ("native", "openssl")

_state = {"backend": os.environ.get("COURIER_EC_BACKEND", "openssl" if ec is not None else "native")}

_CURVE_OBJECTS = {} if ec is None else {"P-256": ec.SECP256R1(), "secp256k1": ec.SECP256K1()}


def backend() -> str:
    return _state["backend"]


def set_backend(name: str) -> None:
    if name not in BACKENDS:
        raise ValueError(f"unknown EC backend {name!r}")
    if name == "openssl" and ec is None:
        raise RuntimeError("the cryptography package is not installed")
    _state["backend"] = name


@contextlib.contextmanager
def use_backend(name: str) -> Iterator[None]:
    old = backend()
    set_backend(name)
    try:
        yield
    finally:
        _state["backend"] = old


def curve_for(name: str):
    """The OpenSSL curve object when the fast path applies, else None."""
    if _state["backend"] != "openssl":
        return None
    return _CURVE_OBJECTS.get(name)


def base_mul_xy(curve, k: int) -> tuple[int, int]:
    nums = ec.derive_private_key(k, curve).public_key().public_numbers()
    return nums.x, nums.y


def shared_x(curve, k: int, x: int, y: int) -> int:
    peer = ec.EllipticCurvePublicNumbers(x, y, curve).public_key()
    return int.from_bytes(ec.derive_private_key(k, curve).exchange(ec.ECDH(), peer), "big")


def verify(curve, h: int, r: int, s: int, x: int, y: int) -> bool:
    """Check (r, s) on the scalar h, passed as a 256-bit prehashed digest.

    Both supported curves have 256-bit orders, so OpenSSL reads the digest
    back as exactly h.
    """
    try:
        pub = ec.EllipticCurvePublicNumbers(x, y, curve).public_key()
    except ValueError:
        return False
    digest = h.to_bytes(32, "big")
    try:
        pub.verify(utils.encode_dss_signature(r, s), digest, ec.ECDSA(utils.Prehashed(hashes.SHA256())))
    except InvalidSignature:
        return False
    return True


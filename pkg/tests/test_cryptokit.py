import hashlib
import random
from pathlib import Path

import pytest
import siphash24
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric import ec
from cryptography.hazmat.primitives.asymmetric.utils import encode_dss_signature
from hypothesis import given, settings, strategies as st

from courier.cryptokit import (
    P256,
    SECP256K1,
    IntegrityFailure,
    Point,
    Signature,
    asym_decrypt,
    asym_encrypt,
    ecdsa_sign,
    ecdsa_verify,
    keypair_generate,
    siphash64,
    sign_scalar,
    timestamp_fresh,
    verify_scalar,
)
from courier.cryptokit import accel
from courier.cryptokit.ecies import MAX_PLAINTEXT

FIXTURES = Path(__file__).parent / "fixtures"


def naive_mul(k, pt, curve):
    """Textbook affine double-and-add; shares no code with the library."""
    p = curve.p

    def add(P, Q):
        if P is None:
            return Q
        if Q is None:
            return P
        if P[0] == Q[0] and (P[1] + Q[1]) % p == 0:
            return None
        if P == Q:
            lam = (3 * P[0] * P[0] + curve.a) * pow(2 * P[1], -1, p) % p
        else:
            lam = (Q[1] - P[1]) * pow(Q[0] - P[0], -1, p) % p
        x = (lam * lam - P[0] - Q[0]) % p
        return (x, (lam * (P[0] - x) - P[1]) % p)

    acc, base = None, (pt.x, pt.y)
    while k:
        if k & 1:
            acc = add(acc, base)
        base = add(base, base)
        k >>= 1
    return acc


# -- curve / keypairs ----------------------------------------------------


def test_keypair_deterministic_per_seed():
    a = keypair_generate(P256, random.Random(42))
    b = keypair_generate(P256, random.Random(42))
    c = keypair_generate(P256, random.Random(43))
    assert a.private == b.private and a.public == b.public
    assert a.private != c.private


@pytest.mark.parametrize("curve", [P256, SECP256K1], ids=lambda c: c.name)
def test_public_key_matches_double_and_add_oracle(curve):
    kp = keypair_generate(curve, random.Random(7))
    assert (kp.public.x, kp.public.y) == naive_mul(kp.private, curve.G, curve)
    assert curve.is_on_curve(kp.public)


def test_generator_has_group_order():
    assert P256.base_mul(P256.n) is None
    assert P256.mul(P256.n, P256.G) is None
    assert naive_mul(P256.n - 1, P256.G, P256) == (P256.gx, (-P256.gy) % P256.p)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, P256.n - 1), st.integers(1, P256.n - 1))
def test_variable_and_fixed_base_agree(k, j):
    Q = P256.base_mul(j)
    assert P256.mul(k, Q) == P256.base_mul(k * j % P256.n)


def test_point_compression_round_trip():
    rng = random.Random(3)
    for _ in range(20):
        pt = P256.base_mul(rng.randrange(1, P256.n))
        assert P256.decode_point(P256.encode_point(pt)) == pt


# -- ECDSA ---------------------------------------------------------------

# RFC 6979 A.2.5, P-256 with SHA-256, message "sample"
RFC6979_X = 0xC9AFA9D845BA75166B5C215767B1D6934E50C3DB36E89B127B8A622B120F6721
RFC6979_UX = 0x60FED4BA255A9D31C961EB74C6356D68C049B8923B61FA6CE669622E60F29FB6
RFC6979_UY = 0x7903FE1008B8BC99A41AE9E95628BC64F2F1B20C2D7E9F5177A3C294D4462299
RFC6979_K = 0xA6E3C57DD01ABE90086538398355DD4C3B17AA873382B0F24D6129493D8AAD60
RFC6979_R = 0xEFD48B2AACB6A8FD1140DD9CD45E81D69D2C877B56AAF991C34D0EA84EAF3716
RFC6979_S = 0xF7CB1C942D657C41D436C7A1B6E29F65F3E900DBB9AFF4064DC4AB2F843ACDA8


def test_scalar_core_matches_rfc6979_vector():
    z = int.from_bytes(hashlib.sha256(b"sample").digest(), "big")
    assert P256.base_mul(RFC6979_X) == Point(RFC6979_UX, RFC6979_UY)
    sig = sign_scalar(z, RFC6979_X, RFC6979_K, P256)
    assert (sig.r, sig.s) == (RFC6979_R, RFC6979_S)
    assert verify_scalar(z, sig, Point(RFC6979_UX, RFC6979_UY), P256)


def test_scalar_core_signatures_verify_under_openssl():
    rng = random.Random(11)
    for _ in range(10):
        d = rng.randrange(1, P256.n)
        msg = rng.randbytes(40)
        z = int.from_bytes(hashlib.sha256(msg).digest(), "big")
        sig = sign_scalar(z, d, rng.randrange(1, P256.n), P256)
        pub = ec.derive_private_key(d, ec.SECP256R1()).public_key()
        pub.verify(encode_dss_signature(sig.r, sig.s), msg, ec.ECDSA(hashes.SHA256()))


def test_round_trip_and_randomized_signing():
    rng = random.Random(5)
    kp = keypair_generate(P256, rng)
    s1 = ecdsa_sign(b"order", kp, rng)
    s2 = ecdsa_sign(b"order", kp, rng)
    assert s1 != s2
    assert ecdsa_verify(b"order", s1, kp.public)
    assert ecdsa_verify(b"order", s2, kp.public)


def test_verify_rejects_substitution_wrong_key_and_malformed():
    rng = random.Random(6)
    kp, other = keypair_generate(P256, rng), keypair_generate(P256, rng)
    sig = ecdsa_sign(b"m", kp, rng)
    assert not ecdsa_verify(b"m'", sig, kp.public)
    assert not ecdsa_verify(b"m", sig, other.public)
    for bad in (Signature(0, sig.s), Signature(sig.r, 0), Signature(P256.n, sig.s), Signature(sig.r, P256.n + 5)):
        assert not ecdsa_verify(b"m", bad, kp.public)
    assert not ecdsa_verify(b"m", sig, Point(1, 1))


def test_sign_rejects_empty_message():
    rng = random.Random(0)
    with pytest.raises(ValueError):
        ecdsa_sign(b"", keypair_generate(P256, rng), rng)


def test_signature_bytes_round_trip():
    sig = Signature(123, 456)
    assert Signature.from_bytes(sig.to_bytes()) == sig


_KEYS = [keypair_generate(P256, random.Random(900 + i)) for i in range(4)]


@settings(max_examples=1000, deadline=None)
@given(st.binary(min_size=1, max_size=64), st.binary(min_size=1, max_size=64), st.integers(0, 3), st.integers(0, 2**32))
def test_ecdsa_properties(m, m2, ki, seed):
    kp = _KEYS[ki]
    sig = ecdsa_sign(m, kp, random.Random(seed))
    assert 1 <= sig.r <= P256.n - 1 and 1 <= sig.s <= P256.n - 1
    assert ecdsa_verify(m, sig, kp.public)
    if m2 != m:
        assert not ecdsa_verify(m2, sig, kp.public)


# -- SipHash -------------------------------------------------------------


def _kat_lines():
    for line in (FIXTURES / "siphash24_kat.txt").read_text().splitlines():
        key, msg, digest = line.split()
        yield bytes.fromhex(key), b"" if msg == "-" else bytes.fromhex(msg), bytes.fromhex(digest)


def test_siphash_published_vectors():
    key = bytes(range(16))
    # first, sixteenth and last entries of the reference vectors.h table
    assert siphash64(key, b"").hex() == "310e0edd47db6f72"
    assert siphash64(key, bytes(range(15))).hex() == "e545be4961ca29a1"
    assert siphash64(key, bytes(range(63))).hex() == "724506eb4c328a95"


def test_siphash_fixture_file():
    rows = list(_kat_lines())
    assert len(rows) == 128
    for key, msg, digest in rows:
        assert siphash64(key, msg) == digest


def test_siphash_matches_reference_on_random_pairs():
    rng = random.Random(64)
    for _ in range(64):
        key, msg = rng.randbytes(16), rng.randbytes(rng.randrange(0, 200))
        assert siphash64(key, msg) == siphash24.siphash24(msg, key=key).digest()


def test_siphash_determinism_and_key_sensitivity():
    rng = random.Random(9)
    msg = b"product details"
    assert siphash64(bytes(16), msg) == siphash64(bytes(16), msg)
    digests = {siphash64(rng.randbytes(16), msg) for _ in range(200)}
    assert len(digests) == 200


def test_siphash_rejects_short_key():
    with pytest.raises(ValueError):
        siphash64(b"short", b"x")


# -- integrated encryption ------------------------------------------------


def test_encrypt_round_trip_and_randomized():
    rng = random.Random(21)
    kp = keypair_generate(P256, rng)
    c1 = asym_encrypt(b"hello robot", kp.public, rng)
    c2 = asym_encrypt(b"hello robot", kp.public, rng)
    assert c1 != c2
    assert asym_decrypt(c1, kp) == asym_decrypt(c2, kp) == b"hello robot"
    assert asym_decrypt(asym_encrypt(b"", kp.public, rng), kp) == b""


def test_decrypt_with_wrong_key_fails():
    rng = random.Random(22)
    kp, other = keypair_generate(P256, rng), keypair_generate(P256, rng)
    with pytest.raises(IntegrityFailure):
        asym_decrypt(asym_encrypt(b"secret", kp.public, rng), other)


def test_every_single_bit_flip_is_detected():
    rng = random.Random(23)
    kp = keypair_generate(P256, rng)
    ct = asym_encrypt(b"x" * 12, kp.public, rng)
    for bit in range(len(ct) * 8):
        mutated = bytearray(ct)
        mutated[bit // 8] ^= 1 << (bit % 8)
        with pytest.raises(IntegrityFailure):
            asym_decrypt(bytes(mutated), kp)


def test_truncated_ciphertext_fails():
    rng = random.Random(24)
    kp = keypair_generate(P256, rng)
    with pytest.raises(IntegrityFailure):
        asym_decrypt(b"\x02" * 10, kp)


def test_plaintext_size_cap():
    rng = random.Random(25)
    kp = keypair_generate(P256, rng)
    asym_encrypt(b"\0" * MAX_PLAINTEXT, kp.public, rng)
    with pytest.raises(ValueError):
        asym_encrypt(b"\0" * (MAX_PLAINTEXT + 1), kp.public, rng)


# -- freshness -------------------------------------------------------------


@pytest.mark.parametrize(
    "ts,now,expected",
    [(100, 100, True), (100, 2100, True), (100, 2101, False), (200, 100, False)],
)
def test_timestamp_fresh(ts, now, expected):
    assert timestamp_fresh(ts, now, 2000) is expected


def test_timestamp_window_must_be_positive():
    with pytest.raises(ValueError):
        timestamp_fresh(0, 0, 0)


# -- backend equivalence ---------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(st.integers(1, P256.n - 1), st.binary(min_size=1, max_size=64), st.integers(0, 2**32))
def test_openssl_and_native_backends_agree(d, msg, seed):
    with accel.use_backend("native"):
        native_pub = P256.base_mul(d)
        kp = keypair_generate(P256, random.Random(seed))
        sig_native = ecdsa_sign(msg, kp, random.Random(seed))
        ct_native = asym_encrypt(msg, kp.public, random.Random(seed))
    with accel.use_backend("openssl"):
        assert P256.base_mul(d) == native_pub
        kp2 = keypair_generate(P256, random.Random(seed))
        assert kp2 == kp
        assert ecdsa_sign(msg, kp2, random.Random(seed)) == sig_native
        assert asym_encrypt(msg, kp2.public, random.Random(seed)) == ct_native
        assert ecdsa_verify(msg, sig_native, kp.public)
        assert not ecdsa_verify(msg + b"!", sig_native, kp.public)
    with accel.use_backend("native"):
        assert asym_decrypt(ct_native, kp) == msg
        assert not ecdsa_verify(msg + b"!", sig_native, kp.public)


def test_backend_switch_rejects_unknown_name():
    with pytest.raises(ValueError):
        accel.set_backend("gpu")

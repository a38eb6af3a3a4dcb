"""Short-Weierstrass prime-field curves and point arithmetic.

Points are exposed as affine :class:`Point` values; ``None`` stands for the
point at infinity. Scalar multiplication runs in Jacobian coordinates, with
a precomputed 4-bit comb for the base point and width-5 NAF for arbitrary
points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import gmpy2
from gmpy2 import mpz

from . import accel


@dataclass(frozen=True)
class Point:
    x: int
    y: int


# Jacobian triple (X, Y, Z); Z == 0 encodes infinity.
_Jac = tuple[int, int, int]
_JINF: _Jac = (1, 1, 0)


class InvalidPoint(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CurveParams:
    """y^2 = x^3 + a*x + b over GF(p), base point G of prime order n."""

    name: str
    p: int
    a: int
    b: int
    gx: int
    gy: int
    n: int
    _comb: list = field(default_factory=list, repr=False, compare=False)
    _pm: object = field(default=None, init=False, repr=False, compare=False)
    _am: object = field(default=None, init=False, repr=False, compare=False)
    _a_is_minus3: bool = field(default=False, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        # field arithmetic runs on gmpy2 integers; public values stay plain int
        object.__setattr__(self, "_pm", mpz(self.p))
        object.__setattr__(self, "_am", mpz(self.a % self.p))
        object.__setattr__(self, "_a_is_minus3", self.a % self.p == self.p - 3)
        if not self.is_on_curve(self.G):
            raise InvalidPoint(f"{self.name}: base point not on curve")
        if pow(2, self.n - 1, self.n) != 1:
            raise ValueError(f"{self.name}: group order fails primality check")

    @property
    def G(self) -> Point:
        return Point(self.gx, self.gy)

    @cached_property
    def byte_len(self) -> int:
        return (self.p.bit_length() + 7) // 8

    def is_on_curve(self, pt: Optional[Point]) -> bool:
        if pt is None:
            return False
        x, y, p = pt.x, pt.y, self.p
        if not (0 <= x < p and 0 <= y < p):
            return False
        return (y * y - (x * x * x + self.a * x + self.b)) % p == 0

    # -- encoding --------------------------------------------------------

    def encode_point(self, pt: Point) -> bytes:
        """SEC1 compressed encoding."""
        prefix = b"\x03" if pt.y & 1 else b"\x02"
        return prefix + pt.x.to_bytes(self.byte_len, "big")

    def decode_point(self, data: bytes) -> Point:
        if len(data) != 1 + self.byte_len or data[0] not in (2, 3):
            raise InvalidPoint("bad compressed point length or prefix")
        x = int.from_bytes(data[1:], "big")
        p = self.p
        if x >= p:
            raise InvalidPoint("x coordinate out of range")
        rhs = (x * x * x + self.a * x + self.b) % p
        y = _sqrt_mod(rhs, p)
        if y is None:
            raise InvalidPoint("x coordinate not on curve")
        if (y & 1) != (data[0] & 1):
            y = p - y
        return Point(x, y)

    # -- Jacobian arithmetic ---------------------------------------------

    def _double(self, P: _Jac) -> _Jac:
        X1, Y1, Z1 = P
        if Z1 == 0 or Y1 == 0:
            return _JINF
        p = self._pm
        YY = Y1 * Y1 % p
        S = 4 * X1 * YY % p
        ZZ = Z1 * Z1 % p
        if self._a_is_minus3:
            M = 3 * (X1 - ZZ) * (X1 + ZZ) % p
        else:
            M = (3 * X1 * X1 + self._am * ZZ * ZZ) % p
        X3 = (M * M - 2 * S) % p
        Y3 = (M * (S - X3) - 8 * YY * YY) % p
        Z3 = 2 * Y1 * Z1 % p
        return (X3, Y3, Z3)

    def _add(self, P: _Jac, Q: _Jac) -> _Jac:
        X1, Y1, Z1 = P
        X2, Y2, Z2 = Q
        if Z1 == 0:
            return Q
        if Z2 == 0:
            return P
        p = self._pm
        Z1Z1 = Z1 * Z1 % p
        Z2Z2 = Z2 * Z2 % p
        U1 = X1 * Z2Z2 % p
        U2 = X2 * Z1Z1 % p
        S1 = Y1 * Z2 * Z2Z2 % p
        S2 = Y2 * Z1 * Z1Z1 % p
        H = (U2 - U1) % p
        R = (S2 - S1) % p
        if H == 0:
            if R == 0:
                return self._double(P)
            return _JINF
        HH = H * H % p
        HHH = H * HH % p
        V = U1 * HH % p
        X3 = (R * R - HHH - 2 * V) % p
        Y3 = (R * (V - X3) - S1 * HHH) % p
        Z3 = H * Z1 * Z2 % p
        return (X3, Y3, Z3)

    def _add_affine(self, P: _Jac, x2: int, y2: int) -> _Jac:
        """Mixed addition P + (x2, y2, 1)."""
        X1, Y1, Z1 = P
        if Z1 == 0:
            return (x2, y2, 1)
        p = self._pm
        Z1Z1 = Z1 * Z1 % p
        U2 = x2 * Z1Z1 % p
        S2 = y2 * Z1 * Z1Z1 % p
        H = (U2 - X1) % p
        R = (S2 - Y1) % p
        if H == 0:
            if R == 0:
                return self._double(P)
            return _JINF
        HH = H * H % p
        HHH = H * HH % p
        V = X1 * HH % p
        X3 = (R * R - HHH - 2 * V) % p
        Y3 = (R * (V - X3) - Y1 * HHH) % p
        Z3 = H * Z1 % p
        return (X3, Y3, Z3)

    def _to_affine(self, P: _Jac) -> Optional[Point]:
        X, Y, Z = P
        if Z == 0:
            return None
        p = self._pm
        zi = gmpy2.invert(Z, p)
        zi2 = zi * zi % p
        return Point(int(X * zi2 % p), int(Y * zi2 * zi % p))

    @staticmethod
    def _to_jac(pt: Optional[Point]) -> _Jac:
        return _JINF if pt is None else (mpz(pt.x), mpz(pt.y), 1)

    # -- public group operations -----------------------------------------

    def add(self, P: Optional[Point], Q: Optional[Point]) -> Optional[Point]:
        return self._to_affine(self._add(self._to_jac(P), self._to_jac(Q)))

    def neg(self, P: Optional[Point]) -> Optional[Point]:
        return None if P is None else Point(P.x, (-P.y) % self.p)

    def base_mul(self, k: int) -> Optional[Point]:
        """k*G using the precomputed comb table (or OpenSSL when enabled)."""
        fast = accel.curve_for(self.name)
        if fast is not None and 0 < k < self.n:
            return Point(*accel.base_mul_xy(fast, k))
        return self._to_affine(self._base_mul_jac(k))

    def mul(self, k: int, P: Optional[Point]) -> Optional[Point]:
        """k*P for an arbitrary point."""
        return self._to_affine(self._mul_jac(k, P))

    def shared_x(self, k: int, P: Point) -> Optional[int]:
        """x-coordinate of k*P, the Diffie-Hellman shared value."""
        fast = accel.curve_for(self.name)
        if fast is not None and 0 < k < self.n and self.is_on_curve(P):
            return accel.shared_x(fast, k, P.x, P.y)
        Q = self.mul(k, P)
        return None if Q is None else Q.x

    def mul_add(self, u1: int, u2: int, Q: Point) -> Optional[Point]:
        """u1*G + u2*Q, the verification combination."""
        return self._to_affine(self._add(self._base_mul_jac(u1), self._mul_jac(u2, Q)))

    def _base_mul_jac(self, k: int) -> _Jac:
        k %= self.n
        table = self._comb_table()
        acc = _JINF
        i = 0
        while k:
            d = k & 0xF
            if d:
                x, y = table[i][d]
                acc = self._add_affine(acc, x, y)
            k >>= 4
            i += 1
        return acc

    def _comb_table(self) -> list:
        if self._comb:
            return self._comb
        windows = (self.n.bit_length() + 3) // 4
        rows = []
        base: _Jac = (mpz(self.gx), mpz(self.gy), 1)
        for _ in range(windows):
            row: list = [None]
            acc = _JINF
            for _ in range(15):
                acc = self._add(acc, base)
                pt = self._to_affine(acc)
                row.append((mpz(pt.x), mpz(pt.y)))
            rows.append(row)
            for _ in range(4):
                base = self._double(base)
        self._comb.extend(rows)
        return self._comb

    def _mul_jac(self, k: int, P: Optional[Point]) -> _Jac:
        k %= self.n
        if k == 0 or P is None:
            return _JINF
        naf = _wnaf(k, 5)
        Pj = (mpz(P.x), mpz(P.y), 1)
        twoP = self._double(Pj)
        odd = [Pj]
        for _ in range(7):
            odd.append(self._add(odd[-1], twoP))
        p = self._pm
        acc = _JINF
        for digit in reversed(naf):
            acc = self._double(acc)
            if digit > 0:
                acc = self._add(acc, odd[digit >> 1])
            elif digit < 0:
                X, Y, Z = odd[(-digit) >> 1]
                acc = self._add(acc, (X, (-Y) % p, Z))
        return acc


def _wnaf(k: int, w: int) -> list[int]:
    digits = []
    half = 1 << (w - 1)
    full = 1 << w
    while k:
        if k & 1:
            d = k & (full - 1)
            if d >= half:
                d -= full
            k -= d
        else:
            d = 0
        digits.append(d)
        k >>= 1
    return digits


def _sqrt_mod(a: int, p: int) -> Optional[int]:
    if a == 0:
        return 0
    if p % 4 == 3:
        r = pow(a, (p + 1) // 4, p)
        return r if r * r % p == a else None
    # Tonelli-Shanks for the general case
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return r


P256 = CurveParams(
    name="P-256",
    p=0xFFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFF,
    a=0xFFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFC,
    b=0x5AC635D8AA3A93E7B3EBBD55769886BC651D06B0CC53B0F63BCE3C3E27D2604B,
    gx=0x6B17D1F2E12C4247F8BCE6E563A440F277037D812DEB33A0F4A13945D898C296,
    gy=0x4FE342E2FE1A7F9B8EE7EB4A7C0F9E162BCE33576B315ECECBB6406837BF51F5,
    n=0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551,
)

SECP256K1 = CurveParams(
    name="secp256k1",
    p=0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFC2F,
    a=0,
    b=7,
    gx=0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798,
    gy=0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8,
    n=0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141,
)

CURVES = {c.name: c for c in (P256, SECP256K1)}

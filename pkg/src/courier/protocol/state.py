"""Actor state and the credential value types exchanged between actors."""

from __future__ import annotations

import datetime as dt
import random
from dataclasses import dataclass, field
from typing import Optional

from ..cryptokit import (
    DEFAULT_FRESHNESS_MS,
    P256,
    CurveParams,
    KeyPair,
    Point,
    Signature,
    Signed,
    ecdsa_sign,
    ecdsa_verify,
    keypair_generate,
    siphash64,
)
from ..didledger import DID, AccessRole, Ledger, Role
from ..pufsim import CRPDatabase, DeviceSecret
from ..wire import WireError, pack_fields, unpack_fields

# Public digest keys: anyone holding the value must be able to recompute these.
GOV_CLAIMS_KEY = b"courier/gov-vc\x00\x00"
BINDING_CT_KEY = b"courier/fwd-ct\x00\x00"

CREDENTIAL_KINDS = ("gov", "vc_u", "osvc")
AGE_THRESHOLDS = (16, 18, 21)
# Claims are evaluated against this fixed date so scenarios stay reproducible.
REFERENCE_DATE = dt.date(2026, 1, 1)


@dataclass(frozen=True)
class Credential:
    """A 64-bit digest signed by its issuer."""

    kind: str
    digest: bytes
    signature: Signature
    signer_did: DID
    claims: bytes = b""

    def __post_init__(self) -> None:
        if self.kind not in CREDENTIAL_KINDS:
            raise ValueError(f"unknown credential kind {self.kind!r}")
        if len(self.digest) != 8:
            raise ValueError("credential digest must be 64 bits")

    def verify(self, pub: Point, params: CurveParams = P256) -> bool:
        return ecdsa_verify(self.digest, self.signature, pub, params)

    def to_bytes(self) -> bytes:
        return pack_fields([
            self.kind.encode(), self.digest, self.signature.to_bytes(), self.signer_did.to_bytes(), self.claims
        ])

    @classmethod
    def from_bytes(cls, data: bytes) -> "Credential":
        try:
            kind, digest, sig, did, claims = unpack_fields(data)
            return cls(kind.decode(), digest, Signature.from_bytes(sig), DID.from_bytes(did), claims)
        except (ValueError, UnicodeDecodeError) as exc:
            raise WireError(f"bad credential: {exc}") from None

    def claim_map(self) -> dict[str, str]:
        out = {}
        for item in self.claims.decode().split("|"):
            if item:
                k, _, v = item.partition("=")
                out[k] = v
        return out


@dataclass(frozen=True)
class Presentation:
    """OSVP_1: the CSP's signature over the order credential plus the proof digest X_2."""

    credential_sig: Signed
    proof_digest: bytes


@dataclass(frozen=True)
class SignedSignal:
    verdict: int  # 1 = success / VB_1
    signature: Signed


@dataclass(frozen=True)
class Citizen:
    """Identity attributes known to the wallet and the government only."""

    name: str
    birth_date: dt.date
    country: str
    address: str = ""

    def age_on(self, day: dt.date) -> int:
        years = day.year - self.birth_date.year
        if (day.month, day.day) < (self.birth_date.month, self.birth_date.day):
            years -= 1
        return years


@dataclass
class GovernmentIssuer:
    did: DID
    keypair: KeyPair

    @classmethod
    def create(cls, rng: random.Random, curve: CurveParams = P256) -> "GovernmentIssuer":
        kp = keypair_generate(curve, rng)
        return cls(DID.derive(curve.encode_point(kp.public), b"gov"), kp)

    def issue(self, person: Citizen, rng: random.Random) -> Credential:
        """Sign predicates over the person's attributes; the attributes themselves stay here."""
        age = person.age_on(REFERENCE_DATE)
        parts = [f"age_over_{t}={int(age >= t)}" for t in AGE_THRESHOLDS]
        parts.append(f"country={person.country}")
        claims = "|".join(parts).encode()
        digest = siphash64(GOV_CLAIMS_KEY, claims)
        return Credential("gov", digest, ecdsa_sign(digest, self.keypair, rng), self.did, claims)


@dataclass(frozen=True)
class Product:
    pid: bytes
    details: bytes  # PD_i; never leaves the catalog in clear
    age_restricted: bool = False

    def __post_init__(self) -> None:
        if len(self.pid) != 8:
            raise ValueError("product id must be 64 bits")


@dataclass(frozen=True)
class EligibilityRule:
    """Age-restricted products need ``age_over_<min_age>=1``; countries optionally limited."""

    min_age: int = 18
    countries: Optional[frozenset[str]] = None

    def __post_init__(self) -> None:
        if self.min_age not in AGE_THRESHOLDS:
            raise ValueError(f"min_age must be one of {AGE_THRESHOLDS}")

    def allows(self, claims: dict[str, str], product: Product) -> bool:
        if self.countries is not None and claims.get("country") not in self.countries:
            return False
        if product.age_restricted:
            return claims.get(f"age_over_{self.min_age}") == "1"
        return True


def default_catalog() -> dict[bytes, Product]:
    items = [
        (1, b"name=Paper towels 6-pack|price=799", False),
        (2, b"name=USB-C charger 65W|price=2599", False),
        (3, b"name=Drain cleaner acid 1L|price=1299", True),
        (4, b"name=Kitchen knife set|price=4999", True),
    ]
    return {i.to_bytes(8, "big"): Product(i.to_bytes(8, "big"), pd, flag) for i, pd, flag in items}


def order_key(n_star_u: bytes, n_star_csp: bytes) -> bytes:
    """k_ord: both order nonces, 128 bits."""
    return n_star_u + n_star_csp


def product_digest(n_star_u: bytes, details: bytes, pid: bytes) -> bytes:
    """X_1, keyed by the customer's order nonce repeated to 128 bits."""
    return siphash64(n_star_u * 2, details + pid)


def session_binding(k_ord: bytes, did_u: DID, n_star_csp: bytes) -> bytes:
    return siphash64(k_ord, did_u.to_bytes() + n_star_csp)


@dataclass
class OrderContext:
    pid: bytes
    product_digest: bytes  # X_1
    n_star_u: bytes
    n_star_csp: Optional[bytes] = None
    osvc: Optional[bytes] = None
    osvp: Optional[Presentation] = None
    s3: Optional[Signed] = None
    challenge: Optional[bytes] = None
    rv_nonce: Optional[bytes] = None
    verdict: Optional[SignedSignal] = None

    @property
    def k_ord(self) -> bytes:
        return order_key(self.n_star_u, self.n_star_csp)


@dataclass
class WalletState:
    """Customer mobile agent. Keys and identity attributes never leave this object."""

    person: Citizen = field(repr=False)
    gov_credential: Optional[Credential]
    catalog_view: dict[bytes, bytes]  # PID -> PD as displayed to the customer
    ledger: Ledger = field(repr=False)
    rng: random.Random = field(repr=False)
    curve: CurveParams = field(default=P256, repr=False)
    window: int = DEFAULT_FRESHNESS_MS
    inbox: Optional[str] = None
    keypair: Optional[KeyPair] = field(default=None, repr=False)
    did_u: Optional[DID] = None
    did_csp: Optional[DID] = None
    vc_u: Optional[Credential] = None
    tid: Optional[bytes] = None
    cr: Optional[bytes] = field(default=None, repr=False)
    n_u: Optional[bytes] = None
    order: Optional[OrderContext] = None

    @property
    def access(self) -> AccessRole:
        return AccessRole(Role.CUSTOMER, grant=self.tid)

    @property
    def challenge(self) -> Optional[bytes]:
        return None if self.order is None else self.order.challenge

    def complete_order(self) -> None:
        """Drop every per-order secret; the next order registers afresh."""
        self.order = None
        self.keypair = None
        self.did_u = self.did_csp = self.vc_u = None
        self.tid = self.cr = self.n_u = None
        self.inbox = None


@dataclass
class CSPSession:
    """One customer registration at the CSP, keyed by its fresh did_csp."""

    keypair: KeyPair = field(repr=False)
    did_csp: DID
    n_u: bytes
    n_csp: bytes
    wallet_topic: str
    gov_credential: Credential
    did_u: Optional[DID] = None
    registered: bool = False
    n_star_u: Optional[bytes] = None
    n_star_csp: Optional[bytes] = None
    product_digest: Optional[bytes] = None
    pid: Optional[bytes] = None
    osvc: Optional[bytes] = None
    robot_id: Optional[str] = None
    challenge: Optional[bytes] = None

    @property
    def k_ord(self) -> bytes:
        return order_key(self.n_star_u, self.n_star_csp)

    @property
    def topic(self) -> str:
        return csp_topic(self.did_csp)


@dataclass
class CSPState:
    ledger: Ledger = field(repr=False)
    rng: random.Random = field(repr=False)
    k_reg: bytes = field(repr=False)
    catalog: dict[bytes, Product] = field(default_factory=default_catalog)
    trusted_issuers: frozenset[DID] = frozenset()
    crp: dict[str, CRPDatabase] = field(default_factory=dict, repr=False)
    eligibility: EligibilityRule = field(default_factory=EligibilityRule)
    curve: CurveParams = field(default=P256, repr=False)
    window: int = DEFAULT_FRESHNESS_MS
    sessions: dict[DID, CSPSession] = field(default_factory=dict, repr=False)
    robot_sessions: dict[str, DID] = field(default_factory=dict)  # {robot_id -> session}, i.e. {DID_u, Robot_x}

    def __post_init__(self) -> None:
        if len(self.k_reg) != 16:
            raise ValueError("k_reg must be 128 bits")


@dataclass
class RobotState:
    """Delivery robot: its PUF, and at most one provisioned CSP public key."""

    robot_id: str
    device: DeviceSecret = field(repr=False)
    curve: CurveParams = field(default=P256, repr=False)
    window: int = DEFAULT_FRESHNESS_MS
    csp_public_key: Optional[Point] = None
    delivery_topic: Optional[str] = None
    forwarded_digest: Optional[bytes] = None
    decision: str = "idle"  # idle / pending / deliver / refuse

    @property
    def inbox(self) -> str:
        return robot_topic(self.robot_id)

    def release(self) -> None:
        self.csp_public_key = None
        self.delivery_topic = None
        self.forwarded_digest = None
        self.decision = "idle"


# -- topics -------------------------------------------------------------------

REGISTRATION_TOPIC = "csp/register"


def csp_topic(did_csp: DID) -> str:
    return f"csp/{did_csp.suffix}"


def robot_topic(robot_id: str) -> str:
    return f"robot/{robot_id}"


def robot_uplink_topic(robot_id: str) -> str:
    return f"csp/robot/{robot_id}"

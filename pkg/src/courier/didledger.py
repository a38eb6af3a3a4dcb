"""Permissioned, append-only DID registry on a keyed hash chain.

Stands in for the company-operated permissioned blockchain: one admin
writer, role-based read access, one-time binding credentials for customers,
and an audit event for every successful resolution. All state is derived by
replaying entries, so a persisted ledger reloads to exactly the same state.
"""

from __future__ import annotations

import enum
import json
import random
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Optional

from .cryptokit import P256, CurveParams, Point, Signed, siphash64
from .wire import WireError, from_u64, pack_fields, u64, unpack_fields

DID_METHOD = "did:courier"
# DID suffixes must be recomputable by anyone from the public key, so the key is public.
DID_HASH_KEY = b"courier/did-hash"
GENESIS_HASH = bytes(8)


class LedgerError(Exception):
    pass


class Unauthorized(LedgerError):
    pass


class DuplicateDID(LedgerError):
    pass


class ConsumedCredential(LedgerError):
    pass


class UnknownDID(LedgerError):
    pass


class RevokedDID(LedgerError):
    pass


class LedgerCorrupt(LedgerError):
    def __init__(self, index: int, reason: str):
        super().__init__(f"entry {index}: {reason}")
        self.index = index
        self.reason = reason


@dataclass(frozen=True, order=True)
class DID:
    suffix: str

    def __post_init__(self) -> None:
        if len(self.suffix) != 16 or any(ch not in "0123456789abcdef" for ch in self.suffix):
            raise ValueError(f"DID suffix must be 16 lowercase hex chars: {self.suffix!r}")

    def __str__(self) -> str:
        return f"{DID_METHOD}:{self.suffix}"

    def to_bytes(self) -> bytes:
        return bytes.fromhex(self.suffix)

    @classmethod
    def from_bytes(cls, b: bytes) -> "DID":
        return cls(b.hex())

    @classmethod
    def parse(cls, s: str) -> "DID":
        prefix = DID_METHOD + ":"
        if not s.startswith(prefix):
            raise ValueError(f"not a {DID_METHOD} identifier: {s!r}")
        return cls(s[len(prefix):])

    @classmethod
    def derive(cls, public_key: bytes, nonce: bytes) -> "DID":
        return cls(siphash64(DID_HASH_KEY, public_key + nonce).hex())


class Role(str, enum.Enum):
    ADMIN = "admin"
    CSP = "csp"
    CUSTOMER = "customer"
    ISSUER = "issuer"
    ANONYMOUS = "anonymous"


@dataclass(frozen=True)
class AccessRole:
    role: Role
    # customers prove ledger membership with the TID of a one-time credential
    grant: Optional[bytes] = None


ADMIN = AccessRole(Role.ADMIN)
CSP = AccessRole(Role.CSP)
ANONYMOUS = AccessRole(Role.ANONYMOUS)


@dataclass(frozen=True)
class DIDDocument:
    did: DID
    public_key: Point
    metadata_digest: Optional[bytes] = None
    created_at: int = 0
    revoked: bool = False

    def __post_init__(self) -> None:
        if self.metadata_digest is not None and len(self.metadata_digest) != 8:
            raise ValueError("metadata digest must be a 64-bit SipHash value")


@dataclass
class OneTimeCredential:
    tid: bytes
    cred: bytes = field(repr=False)
    consumed: bool = False


@dataclass(frozen=True)
class LedgerEntry:
    index: int
    type: str
    payload: bytes
    prev_hash: bytes
    entry_hash: bytes

    def to_json_line(self) -> str:
        return json.dumps(
            {
                "index": self.index,
                "type": self.type,
                "payload": self.payload.hex(),
                "prev_hash": self.prev_hash.hex(),
                "entry_hash": self.entry_hash.hex(),
            },
            separators=(",", ":"),
        )

    @classmethod
    def from_json_line(cls, line: str) -> "LedgerEntry":
        obj = json.loads(line)
        entry = cls(
            index=obj["index"],
            type=obj["type"],
            payload=bytes.fromhex(obj["payload"]),
            prev_hash=bytes.fromhex(obj["prev_hash"]),
            entry_hash=bytes.fromhex(obj["entry_hash"]),
        )
        if not isinstance(entry.index, int) or not isinstance(entry.type, str) or list(obj) != [
            "index", "type", "payload", "prev_hash", "entry_hash"
        ]:
            raise ValueError("non-canonical entry fields")
        return entry


class ChainCheck(NamedTuple):
    valid: bool
    bad_index: Optional[int] = None

    def __bool__(self) -> bool:
        return self.valid


def entry_hash(key: bytes, prev_hash: bytes, index: int, entry_type: str, payload: bytes) -> bytes:
    return siphash64(key, prev_hash + u64(index) + pack_fields([entry_type.encode()]) + payload)


def verify_entries(entries: Iterable[LedgerEntry], key: bytes) -> ChainCheck:
    prev = GENESIS_HASH
    for expected_index, e in enumerate(entries):
        if e.index != expected_index or e.prev_hash != prev:
            return ChainCheck(False, expected_index)
        if entry_hash(key, prev, e.index, e.type, e.payload) != e.entry_hash:
            return ChainCheck(False, expected_index)
        prev = e.entry_hash
    return ChainCheck(True)


class Ledger:
    """In-process permissioned DID registry.

    ``chain_key`` is the administrator's 128-bit chain MAC key. Writes are
    serialised by a lock; readers see a consistent prefix.
    """

    def __init__(
        self,
        chain_key: bytes,
        rng: Optional[random.Random] = None,
        curve: CurveParams = P256,
        issuers: Iterable[tuple[DID, Point]] = (),
    ):
        if len(chain_key) != 16:
            raise ValueError("chain key must be 128 bits")
        self.chain_key = chain_key
        self.curve = curve
        self._rng = rng or random.Random(0)
        self._lock = threading.Lock()
        self._entries: list[LedgerEntry] = []
        self._docs: dict[DID, DIDDocument] = {}
        self._bound_by: dict[DID, Role] = {}
        self._otcs: dict[bytes, list] = {}  # tid -> [cred digest, consumed]
        for did, pub in issuers:
            self.bind_did(DIDDocument(did, pub), ADMIN)

    # -- reading ----------------------------------------------------------

    @property
    def entries(self) -> tuple[LedgerEntry, ...]:
        """Raw chain; anyone with ledger read access sees ids, keys and digests."""
        return tuple(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def verify_chain(self) -> ChainCheck:
        return verify_entries(self._entries, self.chain_key)

    def is_revoked(self, did: DID) -> bool:
        doc = self._docs.get(did)
        return doc is not None and doc.revoked

    # -- state transitions --------------------------------------------------

    def _append(self, entry_type: str, payload: bytes) -> LedgerEntry:
        index = len(self._entries)
        prev = self._entries[-1].entry_hash if self._entries else GENESIS_HASH
        entry = LedgerEntry(index, entry_type, payload, prev,
                            entry_hash(self.chain_key, prev, index, entry_type, payload))
        self._apply(entry)
        self._entries.append(entry)
        return entry

    def _cred_digest(self, cred: bytes) -> bytes:
        return siphash64(self.chain_key, b"otc" + cred)

    def _apply(self, entry: LedgerEntry) -> None:
        f = unpack_fields(entry.payload)
        if entry.type == "otc_issue":
            tid, digest = f
            self._otcs[tid] = [digest, False]
        elif entry.type == "bind":
            did_b, pub_b, meta, created, role, tid = f
            did = DID.from_bytes(did_b)
            self._docs[did] = DIDDocument(
                did, self.curve.decode_point(pub_b), meta or None, from_u64(created)
            )
            self._bound_by[did] = Role(role.decode())
            if tid:
                self._otcs[tid][1] = True
        elif entry.type == "revoke":
            (did_b,) = f
            did = DID.from_bytes(did_b)
            d = self._docs[did]
            self._docs[did] = DIDDocument(d.did, d.public_key, d.metadata_digest, d.created_at, True)
        elif entry.type == "resolve_grant":
            pass
        else:
            raise WireError(f"unknown entry type {entry.type!r}")

    def issue_onetime_credential(self, admin_auth: AccessRole) -> OneTimeCredential:
        if admin_auth.role is not Role.ADMIN:
            raise Unauthorized("only the ledger administrator issues one-time credentials")
        with self._lock:
            while True:
                tid = self._rng.getrandbits(64).to_bytes(8, "big")
                if tid not in self._otcs:
                    break
            cred = self._rng.getrandbits(64).to_bytes(8, "big")
            self._append("otc_issue", pack_fields([tid, self._cred_digest(cred)]))
        return OneTimeCredential(tid, cred)

    def bind_did(
        self, doc: DIDDocument, auth: AccessRole, otc: Optional[OneTimeCredential] = None
    ) -> LedgerEntry:
        if not self.curve.is_on_curve(doc.public_key):
            raise ValueError("document public key is not on the ledger curve")
        with self._lock:
            tid = b""
            if auth.role is Role.CUSTOMER:
                if otc is None:
                    raise Unauthorized("customer binding requires a one-time credential")
                record = self._otcs.get(otc.tid)
                if record is None or record[0] != self._cred_digest(otc.cred):
                    raise Unauthorized("one-time credential not recognised")
                if record[1]:
                    raise ConsumedCredential(f"TID {otc.tid.hex()} already used")
                tid = otc.tid
            elif auth.role not in (Role.CSP, Role.ADMIN):
                raise Unauthorized(f"role {auth.role.value} cannot bind DIDs")
            if doc.did in self._docs:
                raise DuplicateDID(str(doc.did))
            role = Role.ISSUER if auth.role is Role.ADMIN else auth.role
            payload = pack_fields([
                doc.did.to_bytes(),
                self.curve.encode_point(doc.public_key),
                doc.metadata_digest or b"",
                u64(doc.created_at),
                role.value.encode(),
                tid,
            ])
            entry = self._append("bind", payload)
        if otc is not None and tid:
            otc.consumed = True
        return entry

    def resolve_did(
        self, did: DID, requester: AccessRole, proof: Optional[Signed] = None
    ) -> DIDDocument:
        role = requester.role
        if role is Role.CUSTOMER:
            if requester.grant is None or requester.grant not in self._otcs:
                raise Unauthorized("customer has no ledger grant")
        elif role not in (Role.CSP, Role.ADMIN):
            raise Unauthorized(f"role {role.value} may not resolve DIDs")
        with self._lock:
            doc = self._docs.get(did)
            if doc is None:
                raise UnknownDID(str(did))
            if doc.revoked:
                raise RevokedDID(str(did))
            owner = self._bound_by[did]
            if owner is Role.CUSTOMER:
                if role is Role.CUSTOMER:
                    raise Unauthorized("customers cannot resolve other customer DIDs")
                if role is Role.CSP and (proof is None or not proof.verify(doc.public_key, self.curve)):
                    raise Unauthorized("customer DID resolution needs the customer's signed request")
            self._append("resolve_grant", pack_fields([did.to_bytes(), role.value.encode()]))
        return doc

    def revoke_did(self, did: DID, admin_auth: AccessRole) -> LedgerEntry:
        if admin_auth.role is not Role.ADMIN:
            raise Unauthorized("only the ledger administrator revokes DIDs")
        with self._lock:
            if did not in self._docs:
                raise UnknownDID(str(did))
            return self._append("revoke", pack_fields([did.to_bytes()]))

    # -- persistence --------------------------------------------------------

    def dumps(self) -> str:
        return "".join(e.to_json_line() + "\n" for e in self._entries)

    def save(self, path: Path | str) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def loads(cls, text: str, chain_key: bytes, curve: CurveParams = P256,
              rng: Optional[random.Random] = None) -> "Ledger":
        """Rebuild a ledger, rejecting any byte that is not canonical or not chained."""
        lines = text.split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        else:
            raise LedgerCorrupt(len(lines) - 1, "missing final newline")
        ledger = cls(chain_key, rng=rng, curve=curve)
        prev = GENESIS_HASH
        for i, line in enumerate(lines):
            try:
                entry = LedgerEntry.from_json_line(line)
            except (ValueError, KeyError, TypeError, AttributeError) as exc:
                raise LedgerCorrupt(i, f"unparseable: {exc}") from None
            if entry.to_json_line() != line:
                raise LedgerCorrupt(i, "non-canonical encoding")
            if entry.index != i or entry.prev_hash != prev:
                raise LedgerCorrupt(i, "broken link")
            if entry_hash(chain_key, prev, i, entry.type, entry.payload) != entry.entry_hash:
                raise LedgerCorrupt(i, "hash mismatch")
            try:
                ledger._apply(entry)
            except (WireError, ValueError, KeyError) as exc:
                raise LedgerCorrupt(i, f"bad payload: {exc}") from None
            ledger._entries.append(entry)
            prev = entry.entry_hash
        return ledger

    @classmethod
    def load(cls, path: Path | str, chain_key: bytes, curve: CurveParams = P256) -> "Ledger":
        return cls.loads(Path(path).read_text(), chain_key, curve)


def check_persisted(data: bytes | str, chain_key: bytes, curve: CurveParams = P256) -> ChainCheck:
    """verify_chain over persisted bytes: invalid (with line index) on any corruption."""
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            return ChainCheck(False, data.count(b"\n", 0, exc.start))
    try:
        Ledger.loads(data, chain_key, curve)
    except LedgerCorrupt as exc:
        return ChainCheck(False, exc.index)
    return ChainCheck(True)


def bound_keys(entries: Iterable[LedgerEntry], curve: CurveParams = P256) -> dict[DID, Point]:
    """DID -> public key as recorded by bind entries, for auditors reading the raw chain."""
    out = {}
    for e in entries:
        if e.type == "bind":
            did_b, pub_b = unpack_fields(e.payload)[:2]
            out[DID.from_bytes(did_b)] = curve.decode_point(pub_b)
    return out

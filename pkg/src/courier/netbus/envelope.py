"""Protocol envelopes, canonical serialization and nominal bit accounting."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

from ..wire import WireError, from_u64, pack_fields, u64, unpack_fields


class MsgKind(str, enum.Enum):
    REG_M1 = "REG_M1"
    REG_M2 = "REG_M2"
    REG_M3 = "REG_M3"
    ORD_M1 = "ORD_M1"
    ORD_M2 = "ORD_M2"
    CV_REQ = "CV_REQ"
    CV_M3 = "CV_M3"
    CV_S5 = "CV_S5"
    RV_M1 = "RV_M1"
    RV_M2 = "RV_M2"
    RV_S1 = "RV_S1"
    RV_S2 = "RV_S2"
    RV_M3 = "RV_M3"
    RV_S3 = "RV_S3"


PHASES = ("registration", "order", "customer_verification", "robot_verification")

_PHASE_PREFIX = {"REG": "registration", "ORD": "order", "CV": "customer_verification", "RV": "robot_verification"}


def phase_of(kind: MsgKind) -> str:
    return _PHASE_PREFIX[kind.value.split("_", 1)[0]]


class UnknownFieldKind(KeyError):
    pass


@dataclass(frozen=True)
class Field:
    """One payload field; ``enc`` fields list the kinds sealed inside them."""

    kind: str
    value: bytes
    inner: tuple[str, ...] = ()


@dataclass(frozen=True)
class ProtocolEnvelope:
    topic: str
    msg_kind: MsgKind
    sender: str
    receiver: str
    timestamp: Optional[int]
    payload: tuple[Field, ...] = ()

    @property
    def phase(self) -> str:
        return phase_of(self.msg_kind)

    def field(self, i: int) -> Field:
        return self.payload[i]

    def encode(self) -> bytes:
        fields = [
            pack_fields([f.kind.encode(), f.value, pack_fields([k.encode() for k in f.inner])])
            for f in self.payload
        ]
        ts = b"" if self.timestamp is None else u64(self.timestamp)
        return pack_fields([
            self.topic.encode(),
            self.msg_kind.value.encode(),
            self.sender.encode(),
            self.receiver.encode(),
            ts,
            pack_fields(fields),
        ])

    @classmethod
    def decode(cls, data: bytes) -> "ProtocolEnvelope":
        try:
            topic, kind, sender, receiver, ts, body = unpack_fields(data)
            payload = []
            for raw in unpack_fields(body):
                fkind, value, inner = unpack_fields(raw)
                payload.append(Field(fkind.decode(), value, tuple(k.decode() for k in unpack_fields(inner))))
            env = cls(
                topic.decode(),
                MsgKind(kind.decode()),
                sender.decode(),
                receiver.decode(),
                from_u64(ts) if ts else None,
                tuple(payload),
            )
        except (ValueError, UnicodeDecodeError) as exc:
            raise WireError(f"undecodable envelope: {exc}") from None
        return env

    def content(self) -> bytes:
        """Concatenated field values: the bytes an on-path attacker can usefully alter."""
        return b"".join(f.value for f in self.payload)

    def with_content(self, content: bytes) -> "ProtocolEnvelope":
        out, pos = [], 0
        for f in self.payload:
            out.append(Field(f.kind, content[pos : pos + len(f.value)], f.inner))
            pos += len(f.value)
        return ProtocolEnvelope(self.topic, self.msg_kind, self.sender, self.receiver, self.timestamp, tuple(out))

    def readdress(self, topic: str, sender: str, receiver: str, timestamp: Optional[int]) -> "ProtocolEnvelope":
        return ProtocolEnvelope(topic, self.msg_kind, sender, receiver, timestamp, self.payload)


# -- accounting ---------------------------------------------------------------


@dataclass(frozen=True)
class AccountingProfile:
    name: str
    field_bits: dict[str, int] = field(default_factory=dict)
    timestamp_bits: int = 0
    wire: bool = False


_NOMINAL = {
    "did": 64,
    "vc": 64,
    "digest": 64,
    "pid": 64,
    "nonce": 64,
    "sig": 64,
    "tid": 64,
    "cred": 64,
    "challenge": 128,
    "response": 128,
    "bit": 1,
}

PROFILES = {
    # signatures count 64 bits, timestamps nothing, encryption the sum of its plaintext fields
    "default": AccountingProfile("default", dict(_NOMINAL)),
    "timestamped": AccountingProfile("timestamped", dict(_NOMINAL), timestamp_bits=64),
    "wire": AccountingProfile("wire", {}, wire=True),
}


@dataclass(frozen=True)
class BitCost:
    per_field: tuple[tuple[str, int], ...]
    timestamp: int
    total: int


def _field_bits(f: Field, profile: AccountingProfile) -> int:
    if profile.wire:
        return 8 * len(f.value)
    if f.kind == "enc":
        return sum(_kind_bits(k, profile) for k in f.inner)
    return _kind_bits(f.kind, profile)


def _kind_bits(kind: str, profile: AccountingProfile) -> int:
    try:
        return profile.field_bits[kind]
    except KeyError:
        raise UnknownFieldKind(f"profile {profile.name!r} has no size for field kind {kind!r}") from None


def bit_cost(env: ProtocolEnvelope, profile: AccountingProfile = PROFILES["default"]) -> BitCost:
    per_field = tuple((f.kind, _field_bits(f, profile)) for f in env.payload)
    ts_bits = 0
    if env.timestamp is not None:
        ts_bits = 64 if profile.wire else profile.timestamp_bits
    return BitCost(per_field, ts_bits, sum(b for _, b in per_field) + ts_bits)


def encode_envelope(
    env: ProtocolEnvelope, profile: AccountingProfile = PROFILES["default"]
) -> tuple[bytes, BitCost]:
    return env.encode(), bit_cost(env, profile)

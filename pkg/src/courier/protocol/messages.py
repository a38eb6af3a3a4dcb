"""Envelope construction and the checks every handler shares."""

from __future__ import annotations

import random
from typing import Optional, Sequence

from ..cryptokit import CurveParams, KeyPair, Point, Signed, asym_decrypt, asym_encrypt, timestamp_fresh
from ..didledger import DID, AccessRole, DIDDocument, Ledger, LedgerError
from ..netbus import Field, MsgKind, ProtocolEnvelope
from ..wire import WireError, pack_fields, unpack_fields
from .errors import IntegrityFailure, MalformedMessage, ProtocolError, StaleTimestamp, UnknownSession

FLAG = b"\x01"
VERDICT_SUCCESS = 1
VERDICT_FAILURE = 0


def sealed(
    values: Sequence[bytes], inner: tuple[str, ...], pub: Point, rng: random.Random, curve: CurveParams
) -> Field:
    return Field("enc", asym_encrypt(pack_fields(list(values)), pub, rng, curve), inner)


def envelope(
    topic: str, kind: MsgKind, sender: str, receiver: str, ts: Optional[int], *fields: Field
) -> ProtocolEnvelope:
    return ProtocolEnvelope(topic, kind, sender, receiver, ts, tuple(fields))


def expect_fields(env: ProtocolEnvelope, kind: MsgKind, shape: Sequence[str]) -> list[Field]:
    if env.msg_kind is not kind:
        raise MalformedMessage(f"expected {kind.value}, got {env.msg_kind.value}")
    if tuple(f.kind for f in env.payload) != tuple(shape):
        raise MalformedMessage(f"{kind.value}: unexpected field layout")
    return list(env.payload)


def open_sealed(env: ProtocolEnvelope, kind: MsgKind, inner: tuple[str, ...], kp: KeyPair) -> list[bytes]:
    (f,) = expect_fields(env, kind, ("enc",))
    if f.inner != inner:
        raise MalformedMessage(f"{kind.value}: unexpected sealed layout")
    plain = asym_decrypt(f.value, kp)
    try:
        values = unpack_fields(plain)
    except WireError as exc:
        raise IntegrityFailure(f"sealed body does not parse: {exc}") from None
    if len(values) != len(inner):
        raise IntegrityFailure("sealed body has the wrong arity")
    return values


def require_fresh(env: ProtocolEnvelope, now: int, window: int) -> None:
    if env.timestamp is None or not timestamp_fresh(env.timestamp, now, window):
        raise StaleTimestamp(f"{env.msg_kind.value}: T_S={env.timestamp} now={now} window={window}")


def parse_signed(data: bytes) -> Signed:
    try:
        return Signed.from_bytes(data)
    except ValueError as exc:
        raise MalformedMessage(f"bad signed value: {exc}") from None


def parse_did(data: bytes) -> DID:
    try:
        return DID.from_bytes(data)
    except ValueError as exc:
        raise MalformedMessage(f"bad DID: {exc}") from None


def resolve(
    ledger: Ledger,
    did: DID,
    who: AccessRole,
    on_error: type[ProtocolError],
    proof: Optional[Signed] = None,
) -> DIDDocument:
    """Ledger resolution with every refusal mapped to the caller's failure type."""
    try:
        return ledger.resolve_did(did, who, proof)
    except LedgerError as exc:
        raise on_error(f"cannot resolve {did}: {type(exc).__name__}: {exc}") from exc


def session_for_topic(csp, topic: str):
    """The CSP session addressed by a ``csp/<did suffix>`` topic."""
    prefix = "csp/"
    try:
        did = DID(topic[len(prefix):]) if topic.startswith(prefix) else None
    except ValueError:
        did = None
    session = csp.sessions.get(did) if did is not None else None
    if session is None:
        raise UnknownSession(topic)
    return session


def session_for_robot(csp, robot_id: str):
    did = csp.robot_sessions.get(robot_id)
    if did is None:
        raise UnknownSession(f"robot {robot_id} has no assignment")
    return csp.sessions[did]

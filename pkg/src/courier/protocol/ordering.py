"""Order placing and customer verification at the door."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Optional

from ..cryptokit import nonce64, sign_value, siphash64
from ..didledger import CSP as CSP_ROLE
from ..netbus import Field, MsgKind, ProtocolEnvelope
from ..wire import WireError
from .errors import (
    ChallengeResponseFailure,
    IneligibleCustomer,
    IntegrityFailure,
    MalformedMessage,
    NoActiveOrder,
    NoRobotAvailable,
    ProductMismatch,
    ProtocolError,
    RejectedCredential,
    UnknownProduct,
    UnprovisionedRobot,
    reason_of,
)
from .messages import (
    FLAG,
    VERDICT_FAILURE,
    VERDICT_SUCCESS,
    envelope,
    expect_fields,
    open_sealed,
    parse_did,
    parse_signed,
    require_fresh,
    resolve,
    sealed,
    session_for_robot,
    session_for_topic,
)
from .state import (
    BINDING_CT_KEY,
    Credential,
    CSPSession,
    CSPState,
    OrderContext,
    Presentation,
    RobotState,
    SignedSignal,
    WalletState,
    csp_topic,
    order_key,
    product_digest,
    robot_uplink_topic,
    session_binding,
)

ORD_M1_INNER = ("digest", "sig", "pid", "vc", "did")
ORD_M2_INNER = ("sig", "sig")
CV_M3_INNER = ("sig", "digest", "did", "sig")


# -- order placing --------------------------------------------------------------


def order_msg1(wallet: WalletState, pid: bytes, now: int, rng: random.Random) -> ProtocolEnvelope:
    """Commit to (PD, PID) under a fresh order nonce and send it sealed to the CSP."""
    if wallet.keypair is None or wallet.vc_u is None:
        raise NoActiveOrder("wallet is not registered")
    details = wallet.catalog_view.get(pid)
    if details is None:
        raise UnknownProduct(pid.hex())
    n_star_u = nonce64(rng)
    x1 = product_digest(n_star_u, details, pid)
    s1 = sign_value(n_star_u, wallet.keypair, rng)
    doc = resolve(wallet.ledger, wallet.did_csp, wallet.access, ChallengeResponseFailure)
    wallet.order = OrderContext(pid, x1, n_star_u)
    body = sealed(
        [x1, s1.to_bytes(), pid, wallet.vc_u.to_bytes(), wallet.did_u.to_bytes()],
        ORD_M1_INNER, doc.public_key, rng, wallet.curve,
    )
    return envelope(csp_topic(wallet.did_csp), MsgKind.ORD_M1, wallet.inbox, "csp", now, body)


def check_vc_u(csp: CSPState, session: CSPSession, vc: Credential) -> None:
    """VC_u must be ours, unrevoked, and bound to this registration's nonces."""
    if vc.kind != "vc_u" or vc.signer_did != session.did_csp:
        raise RejectedCredential("VC_u names another signer")
    own = resolve(csp.ledger, session.did_csp, CSP_ROLE, RejectedCredential)
    if not vc.verify(own.public_key, csp.curve):
        raise RejectedCredential("VC_u signature does not verify")
    expected = siphash64(csp.k_reg, session.n_csp + session.n_u + session.gov_credential.to_bytes())
    if vc.digest != expected:
        raise RejectedCredential("VC_u digest is not from this registration")


def order_msg2(csp: CSPState, m1: ProtocolEnvelope, now: int, rng: random.Random) -> ProtocolEnvelope:
    """Check the order and mint the order-specific credential."""
    session = session_for_topic(csp, m1.topic)
    require_fresh(m1, now, csp.window)
    x1, s1_b, pid, vc_b, did_b = open_sealed(m1, MsgKind.ORD_M1, ORD_M1_INNER, session.keypair)
    s1 = parse_signed(s1_b)
    did_u = parse_did(did_b)
    if not session.registered or did_u != session.did_u:
        raise ChallengeResponseFailure("order is not from the registered customer")
    doc = resolve(csp.ledger, did_u, CSP_ROLE, ChallengeResponseFailure, proof=s1)
    if len(s1.message) != 8 or not s1.verify(doc.public_key, csp.curve):
        raise ChallengeResponseFailure("S_1 does not verify")
    n_star_u = s1.message

    product = csp.catalog.get(pid)
    if product is None:
        raise UnknownProduct(pid.hex())
    x1_star = product_digest(n_star_u, product.details, pid)
    if x1_star != x1:
        raise ProductMismatch("order digest does not match the catalog entry")
    try:
        vc = Credential.from_bytes(vc_b)
    except WireError as exc:
        raise RejectedCredential(str(exc)) from None
    check_vc_u(csp, session, vc)
    if not csp.eligibility.allows(session.gov_credential.claim_map(), product):
        raise IneligibleCustomer(f"product {pid.hex()} needs credentials the customer lacks")

    n_star_csp = nonce64(rng)
    osvc = siphash64(order_key(n_star_u, n_star_csp), n_star_csp + n_star_u + x1_star)
    session.n_star_u, session.n_star_csp = n_star_u, n_star_csp
    session.product_digest, session.pid, session.osvc = x1_star, pid, osvc
    s2 = sign_value(osvc, session.keypair, rng)
    s3 = sign_value(n_star_csp, session.keypair, rng)
    body = sealed([s2.to_bytes(), s3.to_bytes()], ORD_M2_INNER, doc.public_key, rng, csp.curve)
    return envelope(session.wallet_topic, MsgKind.ORD_M2, "csp", session.wallet_topic, now, body)


def order_accept(wallet: WalletState, m2: ProtocolEnvelope, now: int) -> Presentation:
    """Check the CSP's order credential and assemble OSVP_1 = {S_2, X_2}."""
    order = wallet.order
    if order is None:
        raise NoActiveOrder("no order awaiting acceptance")
    require_fresh(m2, now, wallet.window)
    s2_b, s3_b = open_sealed(m2, MsgKind.ORD_M2, ORD_M2_INNER, wallet.keypair)
    s2, s3 = parse_signed(s2_b), parse_signed(s3_b)
    doc = resolve(wallet.ledger, wallet.did_csp, wallet.access, ChallengeResponseFailure)
    if len(s3.message) != 8 or not s3.verify(doc.public_key, wallet.curve):
        raise ChallengeResponseFailure("S_3 does not verify under the CSP key")
    n_star_csp = s3.message
    k_ord = order_key(order.n_star_u, n_star_csp)
    osvc = siphash64(k_ord, n_star_csp + order.n_star_u + order.product_digest)
    if s2.message != osvc or not s2.verify(doc.public_key, wallet.curve):
        raise ChallengeResponseFailure("S_2 does not cover this order")
    order.n_star_csp, order.osvc, order.s3 = n_star_csp, osvc, s3
    order.osvp = Presentation(s2, siphash64(k_ord, n_star_csp + order.n_star_u))
    return order.osvp


def dispatch_robot(csp: CSPState, session: CSPSession, robot_pool: Iterable[RobotState]) -> RobotState:
    """Provision an idle robot with this session's public key only."""
    if session.osvc is None:
        raise NoActiveOrder("order not accepted")
    for robot in robot_pool:
        if robot.decision == "idle" and robot.robot_id in csp.crp:
            robot.csp_public_key = session.keypair.public
            robot.delivery_topic = session.wallet_topic
            robot.forwarded_digest = None
            robot.decision = "pending"
            session.robot_id = robot.robot_id
            csp.robot_sessions[robot.robot_id] = session.did_csp
            return robot
    raise NoRobotAvailable("no idle enrolled robot")


# -- customer verification -------------------------------------------------------


def robot_request(robot: RobotState) -> ProtocolEnvelope:
    """The 1-bit request asking the customer to present."""
    if robot.csp_public_key is None:
        raise UnprovisionedRobot(robot.robot_id)
    return envelope(robot.delivery_topic, MsgKind.CV_REQ, robot.inbox, "cma", None, Field("bit", FLAG))


def present_to_robot(wallet: WalletState, request: ProtocolEnvelope, rng: random.Random) -> ProtocolEnvelope:
    """M3 = Enc(OSVP_1, did_u, sign(n*_u)) to the CSP; the robot can only carry it."""
    (flag,) = expect_fields(request, MsgKind.CV_REQ, ("bit",))
    if flag.value != FLAG:
        raise MalformedMessage("robot request flag")
    order = wallet.order
    if order is None or order.osvp is None:
        raise NoActiveOrder("nothing to present")
    doc = resolve(wallet.ledger, wallet.did_csp, wallet.access, ChallengeResponseFailure)
    body = sealed(
        [
            order.osvp.credential_sig.to_bytes(),
            order.osvp.proof_digest,
            wallet.did_u.to_bytes(),
            sign_value(order.n_star_u, wallet.keypair, rng).to_bytes(),
        ],
        CV_M3_INNER, doc.public_key, rng, wallet.curve,
    )
    return envelope(request.sender, MsgKind.CV_M3, wallet.inbox, request.sender, None, body)


def robot_forward(robot: RobotState, m3: ProtocolEnvelope) -> ProtocolEnvelope:
    """Relay the sealed presentation upstream, remembering only a digest of it."""
    if robot.csp_public_key is None:
        raise UnprovisionedRobot(robot.robot_id)
    (body,) = expect_fields(m3, MsgKind.CV_M3, ("enc",))
    robot.forwarded_digest = siphash64(BINDING_CT_KEY, body.value)
    return m3.readdress(robot_uplink_topic(robot.robot_id), robot.inbox, "csp", None)


@dataclass(frozen=True)
class PresentationVerdict:
    envelope: ProtocolEnvelope
    signal: SignedSignal
    reason: Optional[str]  # None on success


def _check_presentation(csp: CSPState, session: CSPSession, m3: ProtocolEnvelope) -> None:
    s2_b, x2, did_b, sn_b = open_sealed(m3, MsgKind.CV_M3, CV_M3_INNER, session.keypair)
    s2, proof = parse_signed(s2_b), parse_signed(sn_b)
    did_u = parse_did(did_b)
    if session.osvc is None or did_u != session.did_u:
        raise ChallengeResponseFailure("presentation names another customer")
    doc = resolve(csp.ledger, did_u, CSP_ROLE, ChallengeResponseFailure, proof=proof)
    if proof.message != session.n_star_u or not proof.verify(doc.public_key, csp.curve):
        raise ChallengeResponseFailure("sign(n*_u) does not verify")
    if x2 != siphash64(session.k_ord, session.n_star_csp + session.n_star_u):
        raise ChallengeResponseFailure("X_2 does not match this order")
    own = resolve(csp.ledger, session.did_csp, CSP_ROLE, RejectedCredential)
    if s2.message != session.osvc or not s2.verify(own.public_key, csp.curve):
        raise RejectedCredential("S_2 is not our order credential")


def verify_presentation(csp: CSPState, m3: ProtocolEnvelope, rng: random.Random) -> PresentationVerdict:
    """Check the forwarded presentation; every failure becomes a signed Fail verdict."""
    robot_id = m3.topic.rsplit("/", 1)[-1]
    session = session_for_robot(csp, robot_id)
    reason = None
    try:
        _check_presentation(csp, session, m3)
    except (ProtocolError, IntegrityFailure, WireError) as exc:
        reason = reason_of(exc)
    verdict = VERDICT_SUCCESS if reason is None else VERDICT_FAILURE
    body = m3.payload[0].value if m3.payload else b""
    binding = session_binding(session.k_ord, session.did_u, session.n_star_csp) if session.osvc else bytes(8)
    s5 = sign_value(bytes([verdict]) + binding + siphash64(BINDING_CT_KEY, body), session.keypair, rng)
    env = envelope(
        m3.sender, MsgKind.CV_S5, "csp", m3.sender, None,
        Field("bit", bytes([verdict])), Field("sig", s5.to_bytes()),
    )
    return PresentationVerdict(env, SignedSignal(verdict, s5), reason)


def robot_decide(robot: RobotState, s5_env: ProtocolEnvelope) -> bool:
    """Deliver iff S_5 is a valid success verdict over the presentation we forwarded."""
    if robot.csp_public_key is None:
        raise UnprovisionedRobot(robot.robot_id)
    deliver = False
    try:
        f_bit, f_sig = expect_fields(s5_env, MsgKind.CV_S5, ("bit", "sig"))
        s5 = parse_signed(f_sig.value)
        m = s5.message
        deliver = (
            len(m) == 17
            and s5.verify(robot.csp_public_key, robot.curve)
            and m[:1] == f_bit.value == bytes([VERDICT_SUCCESS])
            and m[9:] == robot.forwarded_digest
        )
    except ProtocolError:
        deliver = False
    robot.decision = "deliver" if deliver else "refuse"
    return deliver

"""Robot verification: the customer checks the robot's PUF through the CSP."""

from __future__ import annotations

import random

from ..cryptokit import nonce64, sign_value
from ..didledger import CSP as CSP_ROLE
from ..netbus import Field, MsgKind, ProtocolEnvelope
from ..pufsim import CHALLENGE_BYTES, UnknownChallenge, crp_select, crp_verify, puf_eval
from ..wire import WireError
from .errors import (
    ChallengeResponseFailure,
    MalformedMessage,
    NoActiveOrder,
    RejectedCredential,
    UnprovisionedRobot,
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
from .ordering import check_vc_u
from .state import (
    Credential,
    CSPState,
    RobotState,
    SignedSignal,
    WalletState,
    csp_topic,
    robot_topic,
    robot_uplink_topic,
    session_binding,
)

RV_M1_INNER = ("vc", "sig", "did", "bit")
RV_M2_INNER = ("sig",)
RV_M3_INNER = ("challenge", "response")


def rv_request_challenge(wallet: WalletState, now: int, rng: random.Random) -> ProtocolEnvelope:
    """M1' = Enc(VC_u, sign(n''''), did_u, robot_verify) to the CSP."""
    order = wallet.order
    if order is None or order.osvp is None:
        raise NoActiveOrder("no delivery in progress")
    order.rv_nonce = nonce64(rng)
    doc = resolve(wallet.ledger, wallet.did_csp, wallet.access, ChallengeResponseFailure)
    body = sealed(
        [
            wallet.vc_u.to_bytes(),
            sign_value(order.rv_nonce, wallet.keypair, rng).to_bytes(),
            wallet.did_u.to_bytes(),
            FLAG,
        ],
        RV_M1_INNER, doc.public_key, rng, wallet.curve,
    )
    return envelope(csp_topic(wallet.did_csp), MsgKind.RV_M1, wallet.inbox, "csp", now, body)


def rv_issue_challenge(csp: CSPState, m1: ProtocolEnvelope, now: int, rng: random.Random) -> ProtocolEnvelope:
    """Pick an unused challenge for the assigned robot and send it signed to the customer."""
    session = session_for_topic(csp, m1.topic)
    require_fresh(m1, now, csp.window)
    vc_b, sig_b, did_b, flag = open_sealed(m1, MsgKind.RV_M1, RV_M1_INNER, session.keypair)
    signed = parse_signed(sig_b)
    did_u = parse_did(did_b)
    if flag != FLAG or did_u != session.did_u or session.robot_id is None:
        raise RejectedCredential("robot verification request does not match this delivery")
    doc = resolve(csp.ledger, did_u, CSP_ROLE, RejectedCredential, proof=signed)
    if len(signed.message) != 8 or not signed.verify(doc.public_key, csp.curve):
        raise RejectedCredential("sign(n'''') does not verify")
    try:
        vc = Credential.from_bytes(vc_b)
    except WireError as exc:
        raise RejectedCredential(str(exc)) from None
    check_vc_u(csp, session, vc)
    challenge = crp_select(csp.crp[session.robot_id], rng)
    session.challenge = challenge
    body = sealed([sign_value(challenge, session.keypair, rng).to_bytes()], RV_M2_INNER, doc.public_key, rng, csp.curve)
    return envelope(session.wallet_topic, MsgKind.RV_M2, "csp", session.wallet_topic, now, body)


def rv_submit_challenge(wallet: WalletState, m2: ProtocolEnvelope, now: int, rng: random.Random) -> ProtocolEnvelope:
    """S1' = the customer's countersignature over the CSP-signed challenge."""
    order = wallet.order
    if order is None or order.rv_nonce is None:
        raise NoActiveOrder("no robot verification requested")
    require_fresh(m2, now, wallet.window)
    (sig_b,) = open_sealed(m2, MsgKind.RV_M2, RV_M2_INNER, wallet.keypair)
    signed = parse_signed(sig_b)
    doc = resolve(wallet.ledger, wallet.did_csp, wallet.access, ChallengeResponseFailure)
    if len(signed.message) != CHALLENGE_BYTES or not signed.verify(doc.public_key, wallet.curve):
        raise ChallengeResponseFailure("challenge is not signed by the CSP")
    order.challenge = signed.message
    s1 = sign_value(signed.message, wallet.keypair, rng)
    return envelope(csp_topic(wallet.did_csp), MsgKind.RV_S1, wallet.inbox, "csp", now, Field("sig", s1.to_bytes()))


def rv_relay(csp: CSPState, s1_env: ProtocolEnvelope, now: int, rng: random.Random) -> ProtocolEnvelope:
    """Check the customer's countersignature and re-sign the challenge for the robot (S2')."""
    session = session_for_topic(csp, s1_env.topic)
    require_fresh(s1_env, now, csp.window)
    (f,) = expect_fields(s1_env, MsgKind.RV_S1, ("sig",))
    s1 = parse_signed(f.value)
    if session.challenge is None or s1.message != session.challenge:
        raise ChallengeResponseFailure("countersigned challenge is not the one issued")
    doc = resolve(csp.ledger, session.did_u, CSP_ROLE, ChallengeResponseFailure, proof=s1)
    if not s1.verify(doc.public_key, csp.curve):
        raise ChallengeResponseFailure("S1' does not verify")
    s2 = sign_value(session.challenge, session.keypair, rng)
    topic = robot_topic(session.robot_id)
    return envelope(topic, MsgKind.RV_S2, "csp", topic, now, Field("sig", s2.to_bytes()))


def rv_answer(robot: RobotState, s2_env: ProtocolEnvelope, now: int, rng: random.Random) -> ProtocolEnvelope:
    """Answer a CSP-signed challenge with the PUF; the pair goes back sealed."""
    if robot.csp_public_key is None:
        raise UnprovisionedRobot(robot.robot_id)
    require_fresh(s2_env, now, robot.window)
    (f,) = expect_fields(s2_env, MsgKind.RV_S2, ("sig",))
    s2 = parse_signed(f.value)
    if len(s2.message) != CHALLENGE_BYTES or not s2.verify(robot.csp_public_key, robot.curve):
        raise ChallengeResponseFailure("S2' is not from the provisioned CSP key")
    response = puf_eval(robot.device, s2.message)
    body = sealed([s2.message, response], RV_M3_INNER, robot.csp_public_key, rng, robot.curve)
    return envelope(robot_uplink_topic(robot.robot_id), MsgKind.RV_M3, robot.inbox, "csp", now, body)


def rv_relay_and_answer(
    csp: CSPState, s1_env: ProtocolEnvelope, robot: RobotState, now: int, rng: random.Random
) -> ProtocolEnvelope:
    """Both hops back to back, for callers that do not route through a bus."""
    return rv_answer(robot, rv_relay(csp, s1_env, now, rng), now, rng)


def rv_verify_and_signal(
    csp: CSPState, m3: ProtocolEnvelope, now: int, rng: random.Random
) -> tuple[ProtocolEnvelope, SignedSignal]:
    """Check the pair against the CRP table and send the signed VB bit to the customer."""
    robot_id = m3.topic.rsplit("/", 1)[-1]
    session = session_for_robot(csp, robot_id)
    require_fresh(m3, now, csp.window)
    challenge, response = open_sealed(m3, MsgKind.RV_M3, RV_M3_INNER, session.keypair)
    ok = False
    if challenge == session.challenge:
        try:
            ok = crp_verify(csp.crp[robot_id], challenge, response)
        except UnknownChallenge:
            ok = False
    vb = VERDICT_SUCCESS if ok else VERDICT_FAILURE
    binding = session_binding(session.k_ord, session.did_u, session.n_star_csp)
    s3 = sign_value(bytes([vb]) + binding + (session.challenge or b""), session.keypair, rng)
    env = envelope(
        session.wallet_topic, MsgKind.RV_S3, "csp", session.wallet_topic, now,
        Field("bit", bytes([vb])), Field("sig", s3.to_bytes()),
    )
    return env, SignedSignal(vb, s3)


def wallet_decide(wallet: WalletState, s3_env: ProtocolEnvelope, now: int) -> bool:
    """Accept the delivery iff S3' is a fresh, CSP-signed VB_1 for this order and challenge."""
    order = wallet.order
    if order is None or order.challenge is None:
        raise NoActiveOrder("no challenge outstanding")
    require_fresh(s3_env, now, wallet.window)
    f_bit, f_sig = expect_fields(s3_env, MsgKind.RV_S3, ("bit", "sig"))
    s3 = parse_signed(f_sig.value)
    doc = resolve(wallet.ledger, wallet.did_csp, wallet.access, ChallengeResponseFailure)
    if not s3.verify(doc.public_key, wallet.curve):
        raise ChallengeResponseFailure("S3' is not from the CSP")
    binding = session_binding(order.k_ord, wallet.did_u, order.n_star_csp)
    m = s3.message
    if m[1:9] != binding or m[9:] != order.challenge or m[:1] != f_bit.value:
        raise ChallengeResponseFailure("S3' belongs to another delivery")
    if f_bit.value not in (bytes([VERDICT_SUCCESS]), bytes([VERDICT_FAILURE])):
        raise MalformedMessage("verification bit")
    order.verdict = SignedSignal(m[0], s3)
    return m[0] == VERDICT_SUCCESS

"""Credential-obtaining phase: the customer trades a government credential for VC_u."""

from __future__ import annotations

import random

from ..cryptokit import keypair_generate, nonce64, sign_value, siphash64
from ..didledger import ADMIN, DID, DIDDocument, OneTimeCredential, Unauthorized
from ..didledger import CSP as CSP_ROLE
from ..netbus import Field, MsgKind, ProtocolEnvelope
from ..wire import WireError
from .errors import ChallengeResponseFailure, MalformedMessage, MissingGovCredential, RejectedCredential
from .messages import envelope, expect_fields, parse_did, parse_signed, resolve, session_for_topic
from .state import (
    GOV_CLAIMS_KEY,
    REGISTRATION_TOPIC,
    Credential,
    CSPSession,
    CSPState,
    WalletState,
    csp_topic,
)

REG_M2_SHAPE = ("sig", "vc", "did", "tid", "cred", "nonce")


def reg_msg1(wallet: WalletState, rng: random.Random) -> ProtocolEnvelope:
    """M1 = {n_u, gov credential}, sent from a fresh wallet inbox."""
    if wallet.gov_credential is None:
        raise MissingGovCredential("wallet holds no government credential")
    wallet.n_u = nonce64(rng)
    wallet.inbox = f"cma/{rng.getrandbits(64):016x}"
    return envelope(
        REGISTRATION_TOPIC, MsgKind.REG_M1, wallet.inbox, "csp", None,
        Field("nonce", wallet.n_u), Field("cred", wallet.gov_credential.to_bytes()),
    )


def _check_gov(csp: CSPState, cred: Credential) -> None:
    if cred.kind != "gov" or cred.signer_did not in csp.trusted_issuers:
        raise RejectedCredential("credential is not from a trusted government issuer")
    if siphash64(GOV_CLAIMS_KEY, cred.claims) != cred.digest:
        raise RejectedCredential("claims do not match the signed digest")
    doc = resolve(csp.ledger, cred.signer_did, CSP_ROLE, RejectedCredential)
    if not cred.verify(doc.public_key, csp.curve):
        raise RejectedCredential("government signature does not verify")


def reg_msg2(csp: CSPState, m1: ProtocolEnvelope, rng: random.Random) -> ProtocolEnvelope:
    """Verify the government VC, mint a per-customer CSP identity and VC_u."""
    f_nonce, f_cred = expect_fields(m1, MsgKind.REG_M1, ("nonce", "cred"))
    n_u = f_nonce.value
    if len(n_u) != 8:
        raise MalformedMessage("n_u must be 64 bits")
    try:
        gov = Credential.from_bytes(f_cred.value)
    except WireError as exc:
        raise RejectedCredential(str(exc)) from None
    _check_gov(csp, gov)

    curve = csp.curve
    kp = keypair_generate(curve, rng)
    pub_b = curve.encode_point(kp.public)
    did_csp = DID.derive(pub_b, nonce64(rng))
    csp.ledger.bind_did(DIDDocument(did_csp, kp.public), CSP_ROLE)
    otc = csp.ledger.issue_onetime_credential(ADMIN)  # the CSP requests it from the ledger admin

    n_csp = nonce64(rng)
    digest = siphash64(csp.k_reg, n_csp + n_u + gov.to_bytes())
    vc_u = Credential("vc_u", digest, sign_value(digest, kp, rng).signature, did_csp)
    csp.sessions[did_csp] = CSPSession(kp, did_csp, n_u, n_csp, m1.sender, gov)
    return envelope(
        m1.sender, MsgKind.REG_M2, "csp", m1.sender, None,
        Field("sig", sign_value(n_u, kp, rng).to_bytes()),
        Field("vc", vc_u.to_bytes()),
        Field("did", did_csp.to_bytes()),
        Field("tid", otc.tid),
        Field("cred", otc.cred),
        Field("nonce", n_csp),
    )


def reg_msg3(wallet: WalletState, m2: ProtocolEnvelope, rng: random.Random) -> ProtocolEnvelope:
    """Check the CSP answered our challenge, then bind a fresh customer DID."""
    fields = expect_fields(m2, MsgKind.REG_M2, REG_M2_SHAPE)
    sig_n_u, vc_b, did_b, tid, cr, n_csp = (f.value for f in fields)
    signed = parse_signed(sig_n_u)
    did_csp = parse_did(did_b)
    if wallet.n_u is None or signed.message != wallet.n_u:
        raise ChallengeResponseFailure("M2 does not answer our nonce")
    if len(n_csp) != 8 or len(tid) != 8:
        raise MalformedMessage("REG_M2 token sizes")
    wallet.tid = tid
    doc = resolve(wallet.ledger, did_csp, wallet.access, ChallengeResponseFailure)
    if not signed.verify(doc.public_key, wallet.curve):
        raise ChallengeResponseFailure("sign(n_u) does not verify under the CSP key")
    try:
        vc_u = Credential.from_bytes(vc_b)
    except WireError as exc:
        raise RejectedCredential(str(exc)) from None
    if vc_u.kind != "vc_u" or vc_u.signer_did != did_csp or not vc_u.verify(doc.public_key, wallet.curve):
        raise RejectedCredential("VC_u is not signed by this CSP")

    curve = wallet.curve
    kp = keypair_generate(curve, rng)
    did_u = DID.derive(curve.encode_point(kp.public), nonce64(rng))
    wallet.ledger.bind_did(DIDDocument(did_u, kp.public), wallet.access, OneTimeCredential(tid, cr))
    wallet.keypair, wallet.did_u, wallet.did_csp, wallet.vc_u, wallet.cr = kp, did_u, did_csp, vc_u, cr
    return envelope(
        csp_topic(did_csp), MsgKind.REG_M3, wallet.inbox, "csp", None,
        Field("sig", sign_value(n_csp, kp, rng).to_bytes()),
        Field("did", did_u.to_bytes()),
    )


def reg_finalize(csp: CSPState, m3: ProtocolEnvelope) -> CSPSession:
    """Resolve did_u with the customer's signed answer and record the registration."""
    session = session_for_topic(csp, m3.topic)
    f_sig, f_did = expect_fields(m3, MsgKind.REG_M3, ("sig", "did"))
    signed = parse_signed(f_sig.value)
    did_u = parse_did(f_did.value)
    if signed.message != session.n_csp:
        raise ChallengeResponseFailure("M3 does not answer our nonce")
    try:
        doc = csp.ledger.resolve_did(did_u, CSP_ROLE, signed)
    except Unauthorized as exc:
        raise ChallengeResponseFailure(f"did_u resolution refused: {exc}") from exc
    if not signed.verify(doc.public_key, csp.curve):
        raise ChallengeResponseFailure("sign(n_csp) does not verify")
    session.did_u = did_u
    session.registered = True
    return session


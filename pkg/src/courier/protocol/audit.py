"""Third-party check of a completed delivery from public keys and the raw ledger."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from ..cryptokit import P256, CurveParams, Signed
from ..didledger import DID, LedgerEntry, bound_keys
from .messages import VERDICT_SUCCESS


@dataclass(frozen=True)
class DeliveryEvidence:
    did_csp: DID
    osvc_sig: Signed  # S_2
    nonce_sig: Signed  # S_3
    robot_signal: Signed  # S_5, kept by the robot
    wallet_signal: Signed  # S3', kept by the wallet


def verify_evidence(ev: DeliveryEvidence, entries: Iterable[LedgerEntry], curve: CurveParams = P256) -> bool:
    """True iff every signature chains to the key bound for did_csp and both verdicts are success."""
    pub = bound_keys(entries, curve).get(ev.did_csp)
    if pub is None:
        return False
    sigs = (ev.osvc_sig, ev.nonce_sig, ev.robot_signal, ev.wallet_signal)
    if not all(s.verify(pub, curve) for s in sigs):
        return False
    s5, s3 = ev.robot_signal.message, ev.wallet_signal.message
    # both verdicts name the same session binding digest
    return s5[:1] == s3[:1] == bytes([VERDICT_SUCCESS]) and s5[1:9] == s3[1:9]

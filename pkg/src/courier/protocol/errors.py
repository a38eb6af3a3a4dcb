"""Protocol failure types. Each carries a short machine-readable reason code."""

from __future__ import annotations

from ..cryptokit import IntegrityFailure
from ..pufsim import CRPExhausted


class ProtocolError(Exception):
    reason = "protocol_error"


class MissingGovCredential(ProtocolError):
    reason = "missing_gov_credential"


class RejectedCredential(ProtocolError):
    reason = "rejected_credential"


class ChallengeResponseFailure(ProtocolError):
    reason = "challenge_response_failure"


class StaleTimestamp(ProtocolError):
    reason = "stale_timestamp"


class UnknownProduct(ProtocolError):
    reason = "unknown_product"


class ProductMismatch(ProtocolError):
    reason = "product_mismatch"


class IneligibleCustomer(ProtocolError):
    reason = "ineligible_customer"


class NoRobotAvailable(ProtocolError):
    reason = "no_robot_available"


class NoActiveOrder(ProtocolError):
    reason = "no_active_order"


class UnprovisionedRobot(ProtocolError):
    reason = "unprovisioned_robot"


class UnknownSession(ProtocolError):
    reason = "unknown_session"


class MalformedMessage(ProtocolError):
    reason = "malformed_message"


def reason_of(exc: BaseException) -> str:
    """Stable reason code for any failure a handler can raise."""
    if isinstance(exc, ProtocolError):
        return exc.reason
    if isinstance(exc, IntegrityFailure):
        return "integrity_failure"
    if isinstance(exc, CRPExhausted):
        return "crp_exhausted"
    return type(exc).__name__


__all__ = [
    "ProtocolError",
    "MissingGovCredential",
    "RejectedCredential",
    "ChallengeResponseFailure",
    "StaleTimestamp",
    "UnknownProduct",
    "ProductMismatch",
    "IneligibleCustomer",
    "NoRobotAvailable",
    "NoActiveOrder",
    "UnprovisionedRobot",
    "UnknownSession",
    "MalformedMessage",
    "IntegrityFailure",
    "CRPExhausted",
    "reason_of",
]

"""Actor state machines and message handlers for every protocol phase."""

from .audit import DeliveryEvidence, verify_evidence
from .errors import (
    ChallengeResponseFailure,
    CRPExhausted,
    IneligibleCustomer,
    IntegrityFailure,
    MalformedMessage,
    MissingGovCredential,
    NoActiveOrder,
    NoRobotAvailable,
    ProductMismatch,
    ProtocolError,
    RejectedCredential,
    StaleTimestamp,
    UnknownProduct,
    UnknownSession,
    UnprovisionedRobot,
    reason_of,
)
from .messages import VERDICT_FAILURE, VERDICT_SUCCESS
from .ordering import (
    PresentationVerdict,
    dispatch_robot,
    order_accept,
    order_msg1,
    order_msg2,
    present_to_robot,
    robot_decide,
    robot_forward,
    robot_request,
    verify_presentation,
)
from .registration import reg_finalize, reg_msg1, reg_msg2, reg_msg3
from .robot_verification import (
    rv_answer,
    rv_issue_challenge,
    rv_relay,
    rv_relay_and_answer,
    rv_request_challenge,
    rv_submit_challenge,
    rv_verify_and_signal,
    wallet_decide,
)
from .state import (
    REGISTRATION_TOPIC,
    Citizen,
    Credential,
    CSPSession,
    CSPState,
    EligibilityRule,
    GovernmentIssuer,
    OrderContext,
    Presentation,
    Product,
    RobotState,
    SignedSignal,
    WalletState,
    default_catalog,
    product_digest,
    session_binding,
)

__all__ = [
    "DeliveryEvidence",
    "verify_evidence",
    "VERDICT_FAILURE",
    "VERDICT_SUCCESS",
    "reg_finalize",
    "reg_msg1",
    "reg_msg2",
    "reg_msg3",
    "ChallengeResponseFailure",
    "CRPExhausted",
    "IneligibleCustomer",
    "IntegrityFailure",
    "MalformedMessage",
    "MissingGovCredential",
    "NoActiveOrder",
    "NoRobotAvailable",
    "ProductMismatch",
    "ProtocolError",
    "RejectedCredential",
    "StaleTimestamp",
    "UnknownProduct",
    "UnknownSession",
    "UnprovisionedRobot",
    "reason_of",
    "PresentationVerdict",
    "dispatch_robot",
    "order_accept",
    "order_msg1",
    "order_msg2",
    "present_to_robot",
    "robot_decide",
    "robot_forward",
    "robot_request",
    "verify_presentation",
    "rv_answer",
    "rv_issue_challenge",
    "rv_relay",
    "rv_relay_and_answer",
    "rv_request_challenge",
    "rv_submit_challenge",
    "rv_verify_and_signal",
    "wallet_decide",
    "REGISTRATION_TOPIC",
    "Citizen",
    "Credential",
    "CSPSession",
    "CSPState",
    "EligibilityRule",
    "GovernmentIssuer",
    "OrderContext",
    "Presentation",
    "Product",
    "RobotState",
    "SignedSignal",
    "WalletState",
    "default_catalog",
    "product_digest",
    "session_binding",
]

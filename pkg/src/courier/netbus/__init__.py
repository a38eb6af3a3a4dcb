"""Simulated pub/sub network with cost accounting and an attacker in the middle."""

from .adversary import MODES, Adversary, AdversaryPolicy, Interception, built_in_policies, parse_policy
from .bus import Bus, Delivery, LogRecord, Receipt, UnknownPhase, UnknownTopic, phase_breakdown, phase_cost
from .envelope import (
    PHASES,
    PROFILES,
    AccountingProfile,
    BitCost,
    Field,
    MsgKind,
    ProtocolEnvelope,
    UnknownFieldKind,
    bit_cost,
    encode_envelope,
    phase_of,
)

__all__ = [
    "Adversary",
    "AdversaryPolicy",
    "Interception",
    "built_in_policies",
    "parse_policy",
    "MODES",
    "Bus",
    "Delivery",
    "LogRecord",
    "Receipt",
    "UnknownPhase",
    "UnknownTopic",
    "phase_breakdown",
    "phase_cost",
    "PHASES",
    "PROFILES",
    "AccountingProfile",
    "BitCost",
    "Field",
    "MsgKind",
    "ProtocolEnvelope",
    "UnknownFieldKind",
    "bit_cost",
    "encode_envelope",
    "phase_of",
]

"""Dolev-Yao network attacker: sees, drops, alters, delays and injects envelopes.

The adversary only ever holds envelopes; it has no access to keys, wallets
or device secrets.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .envelope import MsgKind, ProtocolEnvelope

MODES = ("passive", "drop", "modify", "replay", "inject")


@dataclass(frozen=True)
class AdversaryPolicy:
    mode: str = "passive"
    kinds: Optional[frozenset[MsgKind]] = None  # None targets every kind
    topic: Optional[str] = None
    byte_index: int = 3
    value: int = 0xFF  # XOR mask applied by modify
    delay_ms: int = 5000
    envelope: Optional[ProtocolEnvelope] = None

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown adversary mode {self.mode!r}")
        if self.mode == "modify" and not (0 < self.value < 256):
            raise ValueError("modify needs a non-zero byte mask")
        if self.delay_ms < 0:
            raise ValueError("delay must be non-negative")

    @property
    def active(self) -> bool:
        return self.mode != "passive"

    def matches(self, env: ProtocolEnvelope) -> bool:
        if self.kinds is not None and env.msg_kind not in self.kinds:
            return False
        return self.topic is None or env.topic == self.topic


@dataclass(frozen=True)
class Interception:
    envelope: ProtocolEnvelope
    extra_delay: int = 0
    injected: bool = False


@dataclass
class Adversary:
    policy: AdversaryPolicy = field(default_factory=AdversaryPolicy)
    rng: random.Random = field(default_factory=lambda: random.Random(0))
    knowledge: list[bytes] = field(default_factory=list)

    def intercept(self, env: ProtocolEnvelope) -> list[Interception]:
        """Record ``env`` and return what actually travels on (in queue order)."""
        self.knowledge.append(env.encode())
        p = self.policy
        if not p.active or not p.matches(env):
            return [Interception(env)]
        if p.mode == "drop":
            return []
        if p.mode == "modify":
            content = bytearray(env.content())
            if not content:
                return [Interception(env)]
            content[p.byte_index % len(content)] ^= p.value
            return [Interception(env.with_content(bytes(content)), injected=True)]
        if p.mode == "replay":
            # hold the message and release it after the delay
            return [Interception(env, extra_delay=p.delay_ms, injected=True)]
        if p.envelope is not None:
            forged = p.envelope.readdress(env.topic, env.sender, env.receiver, p.envelope.timestamp)
        else:
            forged = self._forge(env)
        return [Interception(forged, injected=True), Interception(env)]

    def recorded(self, kind: MsgKind) -> list[ProtocolEnvelope]:
        out = []
        for raw in self.knowledge:
            e = ProtocolEnvelope.decode(raw)
            if e.msg_kind is kind:
                out.append(e)
        return out

    def _forge(self, env: ProtocolEnvelope) -> ProtocolEnvelope:
        earlier = [e for e in self.recorded(env.msg_kind) if e != env]
        if earlier:
            return earlier[-1].readdress(env.topic, env.sender, env.receiver, env.timestamp)
        junk = bytes(self.rng.getrandbits(8) for _ in env.content())
        return env.with_content(junk)


def built_in_policies() -> dict[str, AdversaryPolicy]:
    """Named policies selectable from scenario configs."""
    return {
        "passive": AdversaryPolicy(),
        "drop": AdversaryPolicy("drop", frozenset({MsgKind.ORD_M1})),
        "drop-all": AdversaryPolicy("drop"),
        "modify": AdversaryPolicy("modify", frozenset({MsgKind.ORD_M1}), byte_index=3),
        "replay": AdversaryPolicy("replay", frozenset({MsgKind.ORD_M2}), delay_ms=5000),
        "inject": AdversaryPolicy("inject", frozenset({MsgKind.CV_M3})),
    }


def parse_policy(spec: str) -> AdversaryPolicy:
    """A built-in policy name, or ``mode:KIND[+KIND...]`` such as ``drop:CV_S5``."""
    named = built_in_policies()
    if spec in named:
        return named[spec]
    mode, sep, kinds = spec.partition(":")
    if not sep or mode not in MODES or not kinds:
        raise ValueError(f"unknown adversary policy {spec!r}")
    try:
        targets = frozenset(MsgKind(k) for k in kinds.split("+"))
    except ValueError:
        raise ValueError(f"unknown message kind in {spec!r}") from None
    return AdversaryPolicy(mode, targets)

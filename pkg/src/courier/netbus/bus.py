"""Deterministic publish/subscribe transport with per-topic FIFO queues."""

from __future__ import annotations

import random
import threading
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

from ..wire import WireError
from .adversary import Adversary
from .envelope import PHASES, PROFILES, AccountingProfile, ProtocolEnvelope, bit_cost


class UnknownTopic(KeyError):
    pass


class UnknownPhase(KeyError):
    pass


@dataclass(frozen=True)
class LogRecord:
    seq: int
    envelope: ProtocolEnvelope
    sent_at: int
    arrival: Optional[int]  # None when the adversary dropped it
    latency: Optional[int]
    injected: bool = False

    @property
    def phase(self) -> str:
        return self.envelope.phase


@dataclass(frozen=True)
class Receipt:
    seq: int
    topic: str
    copies: int


@dataclass(frozen=True)
class Delivery:
    raw: bytes
    envelope: Optional[ProtocolEnvelope]  # None if the bytes no longer decode
    arrival: int
    latency: int


class Bus:
    """Envelopes pass through the adversary, then join their topic's queue.

    Each enqueued copy gets a seeded per-hop latency (uniform integer ms).
    Enqueue is serialised; :meth:`deliver` pops in publish order.
    """

    def __init__(
        self,
        rng: random.Random,
        latency_ms: tuple[int, int] = (5, 15),
        adversary: Optional[Adversary] = None,
    ):
        lo, hi = latency_ms
        if not 0 <= lo <= hi:
            raise ValueError("latency bounds must satisfy 0 <= lo <= hi")
        self.rng = rng
        self.latency_ms = latency_ms
        self.adversary = adversary or Adversary()
        self._queues: dict[str, deque] = {}
        self._lock = threading.Lock()
        self.log: list[LogRecord] = []
        self._seq = 0

    def register(self, topic: str) -> None:
        with self._lock:
            self._queues.setdefault(topic, deque())

    def topics(self) -> list[str]:
        return list(self._queues)

    def publish(self, env: ProtocolEnvelope, sent_at: int) -> Receipt:
        with self._lock:
            if env.topic not in self._queues:
                raise UnknownTopic(env.topic)
            seq = self._seq
            self._seq += 1
            passed = self.adversary.intercept(env)
            honest_logged = False
            for item in passed:
                target = item.envelope.topic
                if target not in self._queues:
                    continue
                latency = self.rng.randint(*self.latency_ms) + item.extra_delay
                arrival = sent_at + latency
                self._queues[target].append(Delivery(item.envelope.encode(), item.envelope, arrival, latency))
                if item.envelope is env and not item.injected:
                    honest_logged = True
                    self.log.append(LogRecord(seq, env, sent_at, arrival, latency))
                else:
                    self.log.append(LogRecord(seq, item.envelope, sent_at, arrival, latency, injected=True))
            if not honest_logged:
                self.log.append(LogRecord(seq, env, sent_at, None, None))
            return Receipt(seq, env.topic, len(passed))

    def deliver(self, topic: str) -> Optional[Delivery]:
        with self._lock:
            q = self._queues.get(topic)
            if q is None:
                raise UnknownTopic(topic)
            if not q:
                return None
            d = q.popleft()
        try:
            env = ProtocolEnvelope.decode(d.raw)
        except WireError:
            env = None
        return Delivery(d.raw, env, d.arrival, d.latency)

    def pending(self, topic: str) -> int:
        return len(self._queues.get(topic, ()))

    def honest_records(self) -> list[LogRecord]:
        return [r for r in self.log if not r.injected]

    def export_log(self, profile: AccountingProfile = PROFILES["default"]) -> list[str]:
        """One line per message: phase, kind, sender, receiver, nominal bits, hex bytes."""
        return [
            " ".join([
                r.phase,
                r.envelope.msg_kind.value,
                r.envelope.sender,
                r.envelope.receiver,
                str(bit_cost(r.envelope, profile).total),
                r.envelope.encode().hex(),
            ])
            for r in self.log
        ]


def phase_cost(
    records: Iterable[LogRecord], phase: str, profile: AccountingProfile = PROFILES["default"]
) -> int:
    if phase not in PHASES:
        raise UnknownPhase(phase)
    return sum(bit_cost(r.envelope, profile).total for r in records if not r.injected and r.phase == phase)


def phase_breakdown(
    records: Iterable[LogRecord], phase: str, profile: AccountingProfile = PROFILES["default"]
) -> list[tuple[str, str, str, int]]:
    """(kind, sender, receiver, bits) for each honest message of the phase."""
    if phase not in PHASES:
        raise UnknownPhase(phase)
    return [
        (r.envelope.msg_kind.value, r.envelope.sender, r.envelope.receiver, bit_cost(r.envelope, profile).total)
        for r in records
        if not r.injected and r.phase == phase
    ]

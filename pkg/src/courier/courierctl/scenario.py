"""Seeded worlds and the end-to-end order runner over the simulated bus."""

from __future__ import annotations

import datetime as dt
import random
import time
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

from ..cryptokit import CURVES, hash_key128
from ..didledger import Ledger
from ..netbus import PHASES, Adversary, Bus, LogRecord, MsgKind, ProtocolEnvelope, parse_policy
from ..protocol import (
    REGISTRATION_TOPIC,
    Citizen,
    CSPSession,
    CSPState,
    DeliveryEvidence,
    GovernmentIssuer,
    ProtocolError,
    RobotState,
    WalletState,
    dispatch_robot,
    order_accept,
    order_msg1,
    order_msg2,
    present_to_robot,
    reason_of,
    reg_finalize,
    reg_msg1,
    reg_msg2,
    reg_msg3,
    robot_decide,
    robot_forward,
    robot_request,
    rv_answer,
    rv_issue_challenge,
    rv_relay,
    rv_request_challenge,
    rv_submit_challenge,
    rv_verify_and_signal,
    verify_presentation,
    wallet_decide,
)
from ..protocol.errors import CRPExhausted, IntegrityFailure
from ..protocol.messages import parse_signed
from ..protocol.state import robot_uplink_topic
from ..pufsim import DeviceSecret, crp_enroll
from ..wire import WireError
from .config import ScenarioConfig

FIRST_NAMES = ("Amelia", "Bartholomew", "Cordelia", "Desmond", "Evangeline", "Fitzgerald", "Guinevere", "Horatio")
LAST_NAMES = ("Ashworth", "Blackwood", "Carrington", "Davenport", "Ellsworth", "Fairbanks", "Greystone", "Hollingsworth")


class Timeout(ProtocolError):
    reason = "timeout"


class UnexpectedMessage(ProtocolError):
    reason = "unexpected_message"


_FAILURES = (ProtocolError, IntegrityFailure, CRPExhausted, WireError)


@dataclass
class World:
    config: ScenarioConfig
    rng: random.Random
    bus: Bus
    adversary: Adversary
    ledger: Ledger
    government: GovernmentIssuer
    csp: CSPState
    robots: list[RobotState]
    wallets: list[WalletState]
    timings: dict[str, list[float]] = field(default_factory=lambda: defaultdict(list))
    _cursor: int = field(default=0, repr=False)

    def idle_robots(self) -> Iterator[RobotState]:
        """Idle robots, scanning on from where the last dispatch stopped."""
        n = len(self.robots)
        start = self._cursor
        for i in range(n):
            robot = self.robots[(start + i) % n]
            if robot.decision == "idle":
                self._cursor = (start + i + 1) % n
                yield robot

    def identity_strings(self) -> list[bytes]:
        """Customer identity and product-detail strings that must never be on the wire."""
        out = []
        for w in self.wallets:
            p = w.person
            out += [p.name.encode(), p.birth_date.isoformat().encode(), p.address.encode()]
        for product in self.csp.catalog.values():
            out.append(product.details)
            out += [part for part in product.details.split(b"|")]
        return out


def build_world(config: ScenarioConfig, adversary: Optional[Adversary] = None) -> World:
    """Everything a scenario needs, derived from ``config.seed`` alone."""
    master = random.Random(config.seed)
    sub = lambda: random.Random(master.getrandbits(64))  # noqa: E731
    rng, net_rng, adv_rng, people_rng = sub(), sub(), sub(), sub()
    curve = CURVES[config.curve]

    government = GovernmentIssuer.create(rng, curve)
    ledger = Ledger(hash_key128(rng), rng=sub(), curve=curve, issuers=[(government.did, government.keypair.public)])
    csp = CSPState(
        ledger, rng, hash_key128(rng),
        trusted_issuers=frozenset({government.did}),
        curve=curve, window=config.freshness_window_ms,
    )
    if adversary is None:
        adversary = Adversary(parse_policy(config.adversary), adv_rng)
    bus = Bus(net_rng, (config.latency_min_ms, config.latency_max_ms), adversary)
    bus.register(REGISTRATION_TOPIC)

    robots = []
    for i in range(config.robot_pool_size):
        device = DeviceSecret.manufacture(f"robot-{i:05d}", rng)
        csp.crp[device.device_id] = crp_enroll(device, config.crp_db_size, rng)
        robot = RobotState(device.device_id, device, curve, config.freshness_window_ms)
        bus.register(robot.inbox)
        bus.register(robot_uplink_topic(robot.robot_id))
        robots.append(robot)

    catalog_view = {pid: p.details for pid, p in csp.catalog.items()}
    wallets = []
    for i in range(config.customers):
        person = Citizen(
            name=f"{people_rng.choice(FIRST_NAMES)} {people_rng.choice(LAST_NAMES)}-{i}",
            birth_date=dt.date(people_rng.randint(1950, 2004), people_rng.randint(1, 12), people_rng.randint(1, 28)),
            country="GB",
            address=f"{people_rng.randint(1, 250)} Larkspur Crescent, Flat {i}",
        )
        wallets.append(WalletState(
            person, government.issue(person, rng), dict(catalog_view), ledger, rng, curve,
            config.freshness_window_ms,
        ))
    return World(config, rng, bus, adversary, ledger, government, csp, robots, wallets)


# -- one order ------------------------------------------------------------------


@dataclass
class PhaseResult:
    status: str  # ok / failed / timeout / refused / declined / skipped
    reason: Optional[str] = None
    latency_ms: Optional[int] = None


@dataclass
class OrderResult:
    customer: int
    order: int
    phases: dict[str, PhaseResult]
    deliver: bool = False
    vb: Optional[int] = None
    aborted: Optional[str] = None
    records: list[LogRecord] = field(default_factory=list, repr=False)
    tokens: dict[str, bytes] = field(default_factory=dict, repr=False)
    evidence: Optional[DeliveryEvidence] = field(default=None, repr=False)
    csp_reason: Optional[str] = None
    run: Optional["OrderRun"] = field(default=None, repr=False)

    @property
    def accepted(self) -> bool:
        return self.deliver and self.vb == 1 and self.aborted is None

    @property
    def end_to_end_ms(self) -> Optional[int]:
        lat = [p.latency_ms for p in self.phases.values()]
        return None if any(v is None for v in lat) else sum(lat)


Hook = Callable[["OrderRun"], None]


class OrderRun:
    """Drives one order through every phase; each actor keeps its own simulated clock."""

    def __init__(self, world: World, wallet: WalletState, pid: bytes, start_ms: int, hooks: dict[str, Hook]):
        self.world = world
        self.wallet = wallet
        self.pid = pid
        self.hooks = hooks
        self.clock: dict[str, int] = defaultdict(lambda: start_ms)
        self.session: Optional[CSPSession] = None
        self.robot: Optional[RobotState] = None
        self.topics: set[str] = {REGISTRATION_TOPIC}
        self.signals: dict[str, object] = {}
        self.s5_env: Optional[ProtocolEnvelope] = None

    # transport ----------------------------------------------------------------

    def _timed(self, op: str, fn, *args):
        t = time.perf_counter()
        try:
            return fn(*args)
        finally:
            self.world.timings[op].append((time.perf_counter() - t) * 1e3)

    def send(self, actor: str, env: ProtocolEnvelope) -> None:
        self.topics.add(env.topic)
        self.world.bus.publish(env, self.clock[actor])

    def recv(self, actor: str, topic: str, kind: MsgKind) -> ProtocolEnvelope:
        d = self.world.bus.deliver(topic)
        if d is None or d.latency > self.world.config.freshness_window_ms:
            # the receiver stops waiting after one freshness window
            raise Timeout(f"{actor} never received {kind.value}")
        if d.envelope is None:
            raise WireError(f"{actor} received undecodable bytes")
        if d.envelope.msg_kind is not kind:
            raise UnexpectedMessage(f"{actor} expected {kind.value}, got {d.envelope.msg_kind.value}")
        self.clock[actor] = max(self.clock[actor], d.arrival)
        return d.envelope

    # phases -------------------------------------------------------------------

    def registration(self) -> None:
        w, csp, rng, bus = self.wallet, self.world.csp, self.world.rng, self.world.bus
        m1 = self._timed("reg_msg1", reg_msg1, w, rng)
        bus.register(w.inbox)
        self.send("wallet", m1)
        e = self.recv("csp", REGISTRATION_TOPIC, MsgKind.REG_M1)
        m2 = self._timed("reg_msg2", reg_msg2, csp, e, rng)
        self.session = _newest_session(csp)
        bus.register(self.session.topic)
        self.send("csp", m2)
        e = self.recv("wallet", w.inbox, MsgKind.REG_M2)
        self.send("wallet", self._timed("reg_msg3", reg_msg3, w, e, rng))
        e = self.recv("csp", self.session.topic, MsgKind.REG_M3)
        self._timed("reg_finalize", reg_finalize, csp, e)

    def order(self) -> None:
        w, csp, rng = self.wallet, self.world.csp, self.world.rng
        self.send("wallet", self._timed("order_msg1", order_msg1, w, self.pid, self.clock["wallet"], rng))
        e = self.recv("csp", self.session.topic, MsgKind.ORD_M1)
        self.send("csp", self._timed("order_msg2", order_msg2, csp, e, self.clock["csp"], rng))
        e = self.recv("wallet", w.inbox, MsgKind.ORD_M2)
        self._timed("order_accept", order_accept, w, e, self.clock["wallet"])
        self.robot = self._timed("dispatch_robot", dispatch_robot, csp, self.session, self.world.idle_robots())
        self.clock["robot"] = self.clock["wallet"]

    def customer_verification(self) -> None:
        w, csp, rng, robot = self.wallet, self.world.csp, self.world.rng, self.robot
        self.send("robot", self._timed("robot_request", robot_request, robot))
        e = self.recv("wallet", w.inbox, MsgKind.CV_REQ)
        self.send("wallet", self._timed("present_to_robot", present_to_robot, w, e, rng))
        e = self.recv("robot", robot.inbox, MsgKind.CV_M3)
        self.send("robot", self._timed("robot_forward", robot_forward, robot, e))
        e = self.recv("csp", robot_uplink_topic(robot.robot_id), MsgKind.CV_M3)
        verdict = self._timed("verify_presentation", verify_presentation, csp, e, rng)
        self.signals["csp_reason"] = verdict.reason
        self.send("csp", verdict.envelope)
        e = self.recv("robot", robot.inbox, MsgKind.CV_S5)
        self.s5_env = e
        self.signals["deliver"] = self._timed("robot_decide", robot_decide, robot, e)

    def robot_verification(self) -> None:
        w, csp, rng, robot = self.wallet, self.world.csp, self.world.rng, self.robot
        topic = self.session.topic
        self.send("wallet", self._timed("rv_request_challenge", rv_request_challenge, w, self.clock["wallet"], rng))
        e = self.recv("csp", topic, MsgKind.RV_M1)
        self.send("csp", self._timed("rv_issue_challenge", rv_issue_challenge, csp, e, self.clock["csp"], rng))
        e = self.recv("wallet", w.inbox, MsgKind.RV_M2)
        self.send("wallet", self._timed("rv_submit_challenge", rv_submit_challenge, w, e, self.clock["wallet"], rng))
        e = self.recv("csp", topic, MsgKind.RV_S1)
        self.send("csp", self._timed("rv_relay", rv_relay, csp, e, self.clock["csp"], rng))
        e = self.recv("robot", robot.inbox, MsgKind.RV_S2)
        self.send("robot", self._timed("rv_answer", rv_answer, robot, e, self.clock["robot"], rng))
        e = self.recv("csp", robot_uplink_topic(robot.robot_id), MsgKind.RV_M3)
        s3_env, _ = self._timed("rv_verify_and_signal", rv_verify_and_signal, csp, e, self.clock["csp"], rng)
        self.send("csp", s3_env)
        e = self.recv("wallet", w.inbox, MsgKind.RV_S3)
        self.signals["accept"] = self._timed("wallet_decide", wallet_decide, w, e, self.clock["wallet"])

    def _phase_start(self, phase: str) -> int:
        if phase == "customer_verification":
            return self.clock["robot"]
        return self.clock["wallet"]

    def _phase_end(self, phase: str) -> int:
        return {
            "registration": self.clock["csp"],
            "order": self.clock["wallet"],
            "customer_verification": self.clock["robot"],
            "robot_verification": self.clock["wallet"],
        }[phase]

    def execute(self, customer: int, index: int) -> OrderResult:
        cfg = self.world.config
        order = ["registration", "order"]
        tail = ["customer_verification", "robot_verification"]
        order += tail if cfg.robot_verification == "after" else tail[::-1]
        result = OrderResult(customer, index, {p: PhaseResult("skipped") for p in PHASES})
        log_start = len(self.world.bus.log)
        failed = False
        for phase in order:
            if failed:
                continue
            hook = self.hooks.get(f"before_{phase}")
            if hook is not None:
                hook(self)
            start = self._phase_start(phase)
            try:
                getattr(self, phase)()
            except _FAILURES as exc:
                status = "timeout" if isinstance(exc, Timeout) else "failed"
                result.phases[phase] = PhaseResult(status, reason_of(exc))
                failed = True
                continue
            pr = PhaseResult("ok", latency_ms=self._phase_end(phase) - start)
            if phase == "customer_verification" and not self.signals.get("deliver"):
                pr.status, pr.reason = "refused", self.signals.get("csp_reason") or "invalid_s5"
            if phase == "robot_verification" and not self.signals.get("accept"):
                pr.status, pr.reason = "declined", "vb_0"
            result.phases[phase] = pr

        result.deliver = bool(self.signals.get("deliver"))
        order_ctx = self.wallet.order
        if order_ctx is not None and order_ctx.verdict is not None:
            result.vb = order_ctx.verdict.verdict
        result.csp_reason = self.signals.get("csp_reason")  # type: ignore[assignment]
        stray = sorted(t for t in self.topics | self._robot_topics() if self.world.bus.pending(t))
        if stray:
            # a session closes only after its last message; anything left over aborts it
            result.aborted = f"unexpected_message on {stray[0]}"
        result.records = self.world.bus.log[log_start:]
        self._collect(result)
        return result

    def _robot_topics(self) -> set[str]:
        if self.robot is None:
            return set()
        return {self.robot.inbox, robot_uplink_topic(self.robot.robot_id)}

    def _collect(self, result: OrderResult) -> None:
        w, s = self.wallet, self.session
        o = w.order
        if o is not None and w.did_u is not None:
            result.tokens = {"did_u": w.did_u.to_bytes(), "n_star_u": o.n_star_u, "x1": o.product_digest}
            if o.osvp is not None:
                result.tokens.update(x2=o.osvp.proof_digest, osvc=o.osvc)
        if result.accepted and s is not None and o is not None and o.verdict is not None:
            result.evidence = DeliveryEvidence(
                s.did_csp, o.osvp.credential_sig, o.s3,
                parse_signed(self.s5_env.payload[1].value), o.verdict.signature,
            )


def _newest_session(csp: CSPState) -> CSPSession:
    return next(reversed(csp.sessions.values()))


def run_order(
    world: World,
    wallet: WalletState,
    pid: bytes,
    *,
    customer: int = 0,
    index: int = 0,
    start_ms: int = 0,
    hooks: Optional[dict[str, Hook]] = None,
    release: bool = True,
) -> OrderResult:
    run = OrderRun(world, wallet, pid, start_ms, hooks or {})
    result = run.execute(customer, index)
    result.run = run
    if release and run.robot is not None:
        run.robot.release()
    wallet.complete_order()
    return result

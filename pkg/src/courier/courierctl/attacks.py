"""The named attack suite. Every attack must end in rejection."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional

from ..cryptokit import keypair_generate, sign_value
from ..didledger import ADMIN, ANONYMOUS, CSP, AccessRole, LedgerError, Role, Unauthorized
from ..netbus import Adversary, AdversaryPolicy, MsgKind
from ..protocol import (
    Credential,
    ProtocolError,
    RejectedCredential,
    StaleTimestamp,
    order_msg2,
    present_to_robot,
    reg_msg1,
    reg_msg2,
    robot_request,
    rv_issue_challenge,
    rv_request_challenge,
    verify_presentation,
)
from ..protocol.state import robot_uplink_topic
from ..pufsim import DeviceSecret
from .config import ConfigInvalid, ScenarioConfig
from .scenario import OrderResult, OrderRun, World, build_world, run_order


@dataclass(frozen=True)
class AttackResult:
    name: str
    rejected: bool
    detail: str


def _first_pid(world: World) -> bytes:
    return next(iter(world.csp.catalog))


def _honest(world: World, wallet_index: int = 0, start_ms: int = 0, **kw) -> OrderResult:
    return run_order(world, world.wallets[wallet_index], _first_pid(world), start_ms=start_ms, **kw)


def attack_replay(config: ScenarioConfig) -> AttackResult:
    """Old ORD_M1 after the window, and order A's CV_M3 injected into order B."""
    world = build_world(config.replace(customers=2))
    a = _honest(world)
    recorded = {r.envelope.msg_kind: r.envelope for r in a.records}
    old_m1 = recorded[MsgKind.ORD_M1]
    # session A is still registered at the CSP, so only freshness stops the replay
    late = old_m1.timestamp + config.freshness_window_ms + 1
    try:
        order_msg2(world.csp, old_m1, late, world.rng)
        stale_rejected, stale_detail = False, "late ORD_M1 accepted"
    except StaleTimestamp:
        stale_rejected, stale_detail = True, "late ORD_M1 -> stale_timestamp"
    except ProtocolError as exc:
        stale_rejected, stale_detail = True, f"late ORD_M1 -> {exc.reason}"

    world.bus.adversary = Adversary(AdversaryPolicy("inject", frozenset({MsgKind.CV_M3}),
                                                    envelope=recorded[MsgKind.CV_M3]))
    b = _honest(world, 1, start_ms=10 * config.freshness_window_ms)
    cross_rejected = not b.accepted and not b.deliver
    return AttackResult(
        "replay", stale_rejected and cross_rejected,
        f"{stale_detail}; cross-session CV_M3 -> deliver={b.deliver} ({b.csp_reason or b.aborted})",
    )


def attack_vc_forgery(config: ScenarioConfig) -> AttackResult:
    """A government credential and a VC_u, each re-signed by a key nobody trusts."""
    world = build_world(config)
    rogue = keypair_generate(world.csp.curve, random.Random(config.seed ^ 0xBAD))
    wallet = world.wallets[0]
    gov = wallet.gov_credential
    forged_gov = Credential("gov", gov.digest, sign_value(gov.digest, rogue, world.rng).signature,
                            gov.signer_did, gov.claims)
    wallet.gov_credential = forged_gov
    try:
        reg_msg2(world.csp, reg_msg1(wallet, world.rng), world.rng)
        gov_ok, gov_detail = False, "forged gov VC accepted"
    except RejectedCredential:
        gov_ok, gov_detail = True, "forged gov VC -> rejected_credential"
    wallet.gov_credential = gov

    def forge_vc(run: OrderRun) -> None:
        vc = run.wallet.vc_u
        run.wallet.vc_u = Credential("vc_u", vc.digest, sign_value(vc.digest, rogue, world.rng).signature,
                                     vc.signer_did)

    r = _honest(world, hooks={"before_order": forge_vc})
    vc_ok = r.phases["order"].reason == "rejected_credential" and not r.accepted
    return AttackResult("vc-forgery", gov_ok and vc_ok, f"{gov_detail}; forged VC_u -> {r.phases['order'].reason}")


def attack_osvc_cross_session(config: ScenarioConfig) -> AttackResult:
    """The customer presents order A's OSVP for order B."""
    world = build_world(config)
    old = {}

    def keep(run: OrderRun) -> None:
        old["osvp"] = run.wallet.order.osvp

    a = _honest(world, hooks={"before_customer_verification": keep})

    def swap(run: OrderRun) -> None:
        run.wallet.order.osvp = old["osvp"]

    b = run_order(world, world.wallets[0], _first_pid(world), start_ms=20_000,
                  hooks={"before_customer_verification": swap})
    ok = a.accepted and not b.deliver and not b.accepted
    return AttackResult("osvc-cross-session", ok, f"replayed OSVP -> deliver={b.deliver} ({b.csp_reason})")


def attack_puf_swap(config: ScenarioConfig) -> AttackResult:
    """A different device answers the challenge in place of the dispatched robot."""
    world = build_world(config)

    def swap(run: OrderRun) -> None:
        run.robot.device = DeviceSecret.manufacture(run.robot.robot_id, random.Random(config.seed ^ 0x5A5A))

    r = _honest(world, hooks={"before_robot_verification": swap})
    ok = r.vb == 0 and not r.accepted and r.phases["robot_verification"].status == "declined"
    return AttackResult("puf-swap", ok, f"swapped device -> VB_{r.vb}, status {r.phases['robot_verification'].status}")


def attack_unauthorized_resolve(config: ScenarioConfig) -> AttackResult:
    """Ledger reads of a customer DID by parties without the right to see it."""
    world = build_world(config.replace(customers=2))
    held = {}

    def grab(run: OrderRun) -> None:
        held["did_u"] = run.wallet.did_u
        held["tid"] = run.wallet.tid

    _honest(world, hooks={"before_customer_verification": grab})
    target = held["did_u"]
    attempts = {
        "anonymous": lambda: world.ledger.resolve_did(target, ANONYMOUS),
        "csp_without_proof": lambda: world.ledger.resolve_did(target, CSP),
        "customer_peer": lambda: world.ledger.resolve_did(target, AccessRole(Role.CUSTOMER, grant=held["tid"])),
        "customer_no_grant": lambda: world.ledger.resolve_did(target, AccessRole(Role.CUSTOMER, grant=b"\x00" * 8)),
        "issuer": lambda: world.ledger.resolve_did(target, AccessRole(Role.ISSUER)),
    }
    outcomes = {}
    for name, call in attempts.items():
        try:
            call()
            outcomes[name] = "resolved"
        except Unauthorized:
            outcomes[name] = "unauthorized"
        except LedgerError as exc:
            outcomes[name] = type(exc).__name__
    ok = all(v == "unauthorized" for v in outcomes.values())
    return AttackResult("unauthorized-resolve", ok, ", ".join(f"{k}={v}" for k, v in outcomes.items()))


def attack_tamper(config: ScenarioConfig) -> AttackResult:
    """One byte flipped in flight in a sealed order message and in the sealed PUF answer."""
    details = []
    ok = True
    for kind in (MsgKind.ORD_M1, MsgKind.RV_M3):
        world = build_world(config)
        world.bus.adversary = Adversary(AdversaryPolicy("modify", frozenset({kind}), byte_index=40))
        r = _honest(world)
        reasons = [p.reason for p in r.phases.values() if p.reason]
        ok &= not r.accepted and "integrity_failure" in reasons
        details.append(f"{kind.value} -> {reasons[0] if reasons else 'accepted'}")
    return AttackResult("tamper", ok, "; ".join(details))


def attack_revoked_csp(config: ScenarioConfig) -> AttackResult:
    """Credentials signed under a did_csp that the admin has since revoked."""
    world = build_world(config)
    built = {}

    def prepare(run: OrderRun) -> None:
        w = run.wallet
        req = robot_request(run.robot)
        built["cv_m3"] = present_to_robot(w, req, world.rng)
        built["rv_m1"] = rv_request_challenge(w, run.clock["wallet"], world.rng)
        built["session"] = run.session
        built["now"] = run.clock["wallet"]
        world.ledger.revoke_did(run.session.did_csp, ADMIN)

    r = _honest(world, hooks={"before_customer_verification": prepare})
    session = built["session"]
    # the run released the robot; restore its assignment to replay the hop directly
    world.csp.robot_sessions[session.robot_id] = session.did_csp
    fwd = built["cv_m3"].readdress(robot_uplink_topic(session.robot_id), "robot", "csp", None)
    verdict = verify_presentation(world.csp, fwd, world.rng)
    try:
        rv_issue_challenge(world.csp, built["rv_m1"], built["now"], world.rng)
        rv_ok, rv_detail = False, "challenge issued"
    except RejectedCredential:
        rv_ok, rv_detail = True, "rejected_credential"
    ok = verdict.signal.verdict == 0 and rv_ok and not r.accepted
    return AttackResult(
        "revoked-csp", ok,
        f"verify_presentation -> Fail ({verdict.reason}); rv_issue_challenge -> {rv_detail}; run -> {r.phases['customer_verification'].reason}",
    )


ATTACKS: dict[str, Callable[[ScenarioConfig], AttackResult]] = {
    "replay": attack_replay,
    "vc-forgery": attack_vc_forgery,
    "osvc-cross-session": attack_osvc_cross_session,
    "puf-swap": attack_puf_swap,
    "unauthorized-resolve": attack_unauthorized_resolve,
    "tamper": attack_tamper,
    "revoked-csp": attack_revoked_csp,
}


def parse_suite(spec: str) -> list[str]:
    if spec == "all":
        return list(ATTACKS)
    names = [s.strip() for s in spec.split(",") if s.strip()]
    unknown = [n for n in names if n not in ATTACKS]
    if unknown:
        raise ConfigInvalid(f"unknown attack(s): {unknown}; choose from {sorted(ATTACKS)}")
    return names


def run_attack_suite(config: ScenarioConfig, names: Optional[Iterable[str]] = None) -> dict[str, Any]:
    """Run the named attacks (all by default) on fresh seeded worlds."""
    names = list(ATTACKS) if names is None else list(names)
    unknown = [n for n in names if n not in ATTACKS]
    if unknown:
        raise ConfigInvalid(f"unknown attack(s): {unknown}")
    results = [ATTACKS[n](config) for n in names]
    rejected = sum(r.rejected for r in results)
    return {
        "kind": "attack",
        "config": config.to_dict(),
        "attacks": [{"name": r.name, "rejected": r.rejected, "detail": r.detail} for r in results],
        "rejected": rejected,
        "total": len(results),
        "vacuous": not results,
        "note": "no attacks selected; the suite passes vacuously" if not results else None,
        "passed": rejected == len(results),
    }


def run_attack_campaign(config: ScenarioConfig, names: Iterable[str], runs: int) -> dict[str, Any]:
    """The suite over seeds ``config.seed .. config.seed + runs - 1``, aggregated per attack."""
    if runs < 1:
        raise ConfigInvalid("runs must be at least 1")
    names = list(names)
    reports = [run_attack_suite(config.replace(seed=config.seed + i), names) for i in range(runs)]
    if runs == 1:
        return reports[0]
    attacks = []
    for j, name in enumerate(names):
        ok = [rep["attacks"][j]["rejected"] for rep in reports]
        attacks.append({"name": name, "rejected": all(ok), "detail": f"rejected in {sum(ok)}/{runs} seeded runs"})
    rejected = sum(a["rejected"] for a in attacks)
    return {
        "kind": "attack",
        "config": config.to_dict(),
        "attacks": attacks,
        "rejected": rejected,
        "total": len(attacks),
        "vacuous": not attacks,
        "note": "no attacks selected; the suite passes vacuously" if not attacks else None,
        "runs": [{"seed": rep["config"]["seed"], "rejected": rep["rejected"], "total": rep["total"]} for rep in reports],
        "passed": rejected == len(attacks),
    }

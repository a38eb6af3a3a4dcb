"""The nine acceptance criteria, each at its stated tolerance.

Every test prints one ``PASS``/``FAIL`` line (visible even without ``-s``)
before asserting, so a run doubles as the acceptance report.
"""

import base64
import dataclasses
import random
import time
from pathlib import Path

import pytest
import siphash24
from hypothesis import given, settings, strategies as st

from courier.courierctl import ATTACKS, ScenarioConfig, bench_throughput, build_world, run_attack_campaign, run_scenario
from courier.courierctl.attacks import attack_puf_swap
from courier.courierctl.report import DISCLAIMER, run_orders
from courier.cryptokit import (
    P256,
    IntegrityFailure,
    asym_decrypt,
    asym_encrypt,
    ecdsa_sign,
    ecdsa_verify,
    keypair_generate,
    siphash64,
)
from courier.didledger import ADMIN, CSP, DIDDocument, DID, Ledger, check_persisted, verify_entries
from courier.netbus import PROFILES
from courier.pufsim import CRPExhausted, DeviceSecret, crp_enroll, crp_select, crp_verify, puf_eval

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def verdict(capsys):
    def report(n, title, ok, detail=""):
        with capsys.disabled():
            print(f"\nAC{n} {'PASS' if ok else 'FAIL'} {title}: {detail}")
        assert ok, detail

    return report


def test_ac1_end_to_end_completeness(verdict):
    t0 = time.perf_counter()
    reports = [run_scenario(ScenarioConfig(seed=s)) for s in range(1, 101)]
    elapsed = time.perf_counter() - t0
    good = sum(r["orders"][0]["deliver"] and r["orders"][0]["vb"] == 1 for r in reports)
    verdict(1, "end-to-end completeness", good == 100, f"{good}/100 delivered with VB_1 in {elapsed:.1f}s")


def test_ac2_attack_suite(verdict):
    report = run_attack_campaign(ScenarioConfig(seed=1), list(ATTACKS), 100)
    per_attack = {a["name"]: a["detail"] for a in report["attacks"]}
    ok = report["total"] == 7 and report["rejected"] == 7 and all(r["rejected"] == 7 for r in report["runs"])
    verdict(2, "attack suite", ok, "; ".join(f"{k} {v}" for k, v in per_attack.items()))


def test_ac3_communication_cost(verdict):
    report = run_scenario(ScenarioConfig(seed=1))
    phases = report["communication_cost"]["phases"]
    order_bits = phases["order"]["bits"]
    resum_ok = all(p["bits"] == p["resummed_bits"] for p in phases.values())
    breakdown_ok = all(sum(m["bits"] for m in p["messages"]) == p["bits"] for p in phases.values())
    cv, rv = phases["customer_verification"], phases["robot_verification"]
    detail = (
        f"order {order_bits} bits (reference {phases['order']['reference_bits']}); "
        f"customer verification {cv['bits']} vs reference {cv['reference_bits']}; "
        f"robot verification {rv['bits']} vs reference {rv['reference_bits']} (reported, not asserted); "
        f"resummation {'matches' if resum_ok else 'differs'}"
    )
    verdict(3, "communication cost", order_bits == 448 and resum_ok and breakdown_ok, detail)


ECDSA_CASES = []


@settings(max_examples=1000, deadline=None, derandomize=True)
@given(st.binary(min_size=1, max_size=64), st.binary(min_size=1, max_size=64), st.integers(0, 2**32))
def _ecdsa_property(m, m2, seed):
    rng = random.Random(seed)
    kp = keypair_generate(P256, rng)
    sig = ecdsa_sign(m, kp, rng)
    ok = ecdsa_verify(m, sig, kp.public)
    if m2 != m:
        ok = ok and not ecdsa_verify(m2, sig, kp.public)
    other = keypair_generate(P256, random.Random(seed + 1))
    ok = ok and not ecdsa_verify(m, sig, other.public)
    ECDSA_CASES.append(ok)
    assert ok


def test_ac4_crypto_correctness(verdict):
    ECDSA_CASES.clear()
    _ecdsa_property()
    ecdsa_ok = len(ECDSA_CASES) >= 1000 and all(ECDSA_CASES)

    kat = [line.split() for line in (FIXTURES / "siphash24_kat.txt").read_text().splitlines()
           if line and not line.startswith("#")]
    kat_ok = all(siphash64(bytes.fromhex(k), b"" if m == "-" else bytes.fromhex(m)) == bytes.fromhex(d)
                 for k, m, d in kat)
    rng = random.Random(64)
    pairs = [(rng.randbytes(16), rng.randbytes(rng.randrange(0, 128))) for _ in range(64)]
    ref_ok = all(siphash64(k, m) == siphash24.siphash24(m, key=k).digest() for k, m in pairs)

    kp = keypair_generate(P256, rng)
    detected = 0
    for trial in range(1000):
        pt = rng.randbytes(rng.randrange(0, 64))
        ct = asym_encrypt(pt, kp.public, rng)
        assert asym_decrypt(ct, kp) == pt
        mutated = bytearray(ct)
        mutated[rng.randrange(len(ct))] ^= rng.randrange(1, 256)
        try:
            asym_decrypt(bytes(mutated), kp)
        except IntegrityFailure:
            detected += 1
    detail = (f"ECDSA {sum(ECDSA_CASES)}/{len(ECDSA_CASES)} cases; SipHash {len(kat)} vectors "
              f"{'ok' if kat_ok else 'BAD'}, 64 reference pairs {'ok' if ref_ok else 'BAD'}; "
              f"ECIES tamper detected {detected}/1000")
    verdict(4, "crypto correctness", ecdsa_ok and kat_ok and len(kat) > 0 and ref_ok and detected == 1000, detail)


def test_ac5_puf_properties(verdict):
    rng = random.Random(5)
    devices = [DeviceSecret.manufacture(f"robot-{i}", rng) for i in range(200)]
    collisions = 0
    for _ in range(10_000):
        a, b = rng.sample(devices, 2)
        c = rng.randbytes(16)
        collisions += puf_eval(a, c) == puf_eval(b, c)

    swaps = [attack_puf_swap(ScenarioConfig(seed=s, crp_db_size=16)) for s in range(1, 101)]
    vb0 = sum(r.rejected and "VB_0" in r.detail for r in swaps)

    db = crp_enroll(devices[0], 50, rng)
    issued = [crp_select(db, rng) for _ in range(50)]
    try:
        crp_select(db, rng)
        exhausted = False
    except CRPExhausted:
        exhausted = True
    one_time = len(set(issued)) == 50 and exhausted and all(crp_verify(db, c, puf_eval(devices[0], c)) for c in issued)
    detail = f"{collisions} collisions over 10^4 pairs; swap gave VB_0 in {vb0}/100; one-time issuance {one_time}"
    verdict(5, "PUF properties", collisions == 0 and vb0 == 100 and one_time, detail)


def _encodings(needle: bytes) -> list[bytes]:
    return [needle, needle.hex().encode(), base64.b64encode(needle), base64.b64encode(needle).rstrip(b"=")]


def test_ac6_unlinkability_and_anonymity(verdict, tmp_path):
    world = build_world(ScenarioConfig(seed=6, customers=1, orders_per_customer=100))
    results = run_orders(world)
    accepted = sum(r.accepted for r in results)
    distinct = {}
    for name in ("did_u", "n_star_u", "x1", "x2", "osvc"):
        values = [r.tokens[name] for r in results]
        distinct[name] = len(set(values)) == len(values) == 100

    world.ledger.save(tmp_path / "ledger.jsonl")
    haystacks = [rec.envelope.encode() for rec in world.bus.log]
    haystacks.append("\n".join(world.bus.export_log(PROFILES[world.config.profile])).encode())
    haystacks.append((tmp_path / "ledger.jsonl").read_bytes())
    needles = world.identity_strings() + [p.details for p in world.csp.catalog.values()]
    hits = [n for n in needles for h in haystacks for e in _encodings(n) if e in h]
    detail = (f"{accepted}/100 orders accepted; distinct tokens {distinct}; "
              f"{len(needles)} plaintext strings scanned across {len(haystacks)} artefacts, {len(hits)} hits")
    verdict(6, "unlinkability and anonymity", accepted == 100 and all(distinct.values()) and not hits, detail)


def test_ac7_throughput_flatness(verdict):
    t0 = time.perf_counter()
    report = bench_throughput(ScenarioConfig(seed=7), [10, 10_000])
    elapsed = time.perf_counter() - t0
    lo, hi = (row["end_to_end_ms"]["median"] for row in report["rows"])
    ratio = report["median_ratio"]
    ok = ratio is not None and ratio <= 2.0 and report["assertions"]["all_orders_accepted"]
    verdict(7, "throughput flatness", ok,
            f"median {lo} ms at 10 orders, {hi} ms at 10000; ratio {ratio:.3f} (bound 2.0); {elapsed:.0f}s")


def test_ac8_non_reproducibility_is_explicit(verdict):
    scenario = run_scenario(ScenarioConfig(seed=8))
    bench = bench_throughput(ScenarioConfig(seed=8), [3])
    timed_keys = [k for rep in (scenario, bench) for k in rep["assertions"] if "time" in k or "ms" in k]
    ok = (
        scenario["disclaimer"] == DISCLAIMER == bench["disclaimer"]
        and "no timing is asserted" in DISCLAIMER
        and bool(scenario["timings_ms"])
        and "wall_clock_s" in bench["rows"][0]
        and not timed_keys
    )
    verdict(8, "non-reproducibility", ok,
            f"{len(scenario['timings_ms'])} operation timings reported, none asserted; disclaimer present")


def _busy_ledger(rng):
    ledger = Ledger(bytes(range(16)), rng=random.Random(1))
    for i in range(12):
        kp = keypair_generate(P256, rng)
        doc = DIDDocument(DID.derive(P256.encode_point(kp.public), rng.randbytes(8)), kp.public, created_at=i)
        ledger.bind_did(doc, CSP)
        ledger.issue_onetime_credential(ADMIN)
        if i % 4 == 0:
            ledger.revoke_did(doc.did, ADMIN)
    return ledger


def test_ac9_ledger_integrity(verdict, tmp_path):
    rng = random.Random(9)
    ledger = _busy_ledger(rng)
    key = ledger.chain_key
    data = ledger.dumps().encode()
    persisted_hits = 0
    for _ in range(500):
        mutated = bytearray(data)
        mutated[rng.randrange(len(data))] ^= rng.randrange(1, 256)
        persisted_hits += not check_persisted(bytes(mutated), key).valid

    entries = list(ledger.entries)
    memory_hits = 0
    for _ in range(500):
        i = rng.randrange(len(entries))
        e = entries[i]
        field_name = rng.choice(["payload", "prev_hash", "entry_hash"])
        raw = bytearray(getattr(e, field_name))
        raw[rng.randrange(len(raw))] ^= rng.randrange(1, 256)
        tampered = entries[:i] + [dataclasses.replace(e, **{field_name: bytes(raw)})] + entries[i + 1:]
        memory_hits += not verify_entries(tampered, key).valid

    path = tmp_path / "ledger.jsonl"
    ledger.save(path)
    again = Ledger.load(path, key)
    path2 = tmp_path / "again.jsonl"
    again.save(path2)
    exact = path.read_bytes() == path2.read_bytes() and again.entries == ledger.entries and bool(again.verify_chain())
    detail = (f"persisted mutations detected {persisted_hits}/500, in-memory {memory_hits}/500; "
              f"reload bit-exact {exact}")
    verdict(9, "ledger integrity", persisted_hits == 500 and memory_hits == 500 and exact, detail)

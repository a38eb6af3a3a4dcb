import random

import pytest
from hypothesis import given, settings, strategies as st

from courier.cryptokit import P256, keypair_generate, sign_value
from courier.didledger import (
    ADMIN,
    ANONYMOUS,
    CSP,
    DID,
    AccessRole,
    ConsumedCredential,
    DIDDocument,
    DuplicateDID,
    Ledger,
    LedgerCorrupt,
    RevokedDID,
    Role,
    Unauthorized,
    UnknownDID,
    check_persisted,
)

KEY = bytes(range(16))


def new_doc(rng, metadata=None):
    kp = keypair_generate(P256, rng)
    did = DID.derive(P256.encode_point(kp.public), rng.randbytes(8))
    return kp, DIDDocument(did, kp.public, metadata, created_at=5)


@pytest.fixture
def rng():
    return random.Random(31)


@pytest.fixture
def ledger(rng):
    return Ledger(KEY, rng=random.Random(1))


def customer(otc):
    return AccessRole(Role.CUSTOMER, otc.tid)


def test_did_syntax(rng):
    _, doc = new_doc(rng)
    s = str(doc.did)
    assert s.startswith("did:courier:") and len(s) == len("did:courier:") + 16
    assert DID.parse(s) == doc.did
    with pytest.raises(ValueError):
        DID("xyz")
    with pytest.raises(ValueError):
        DID.parse("did:web:0123456789abcdef")


def test_onetime_credentials(ledger):
    a = ledger.issue_onetime_credential(ADMIN)
    b = ledger.issue_onetime_credential(ADMIN)
    assert not a.consumed and a.tid != b.tid
    with pytest.raises(Unauthorized):
        ledger.issue_onetime_credential(AccessRole(Role.CUSTOMER))


def test_customer_bind_consumes_credential(ledger, rng):
    otc = ledger.issue_onetime_credential(ADMIN)
    _, doc = new_doc(rng)
    ledger.bind_did(doc, customer(otc), otc)
    assert otc.consumed
    _, doc2 = new_doc(rng)
    with pytest.raises(ConsumedCredential):
        ledger.bind_did(doc2, customer(otc), otc)


def test_customer_bind_needs_valid_credential(ledger, rng):
    _, doc = new_doc(rng)
    with pytest.raises(Unauthorized):
        ledger.bind_did(doc, AccessRole(Role.CUSTOMER))
    otc = ledger.issue_onetime_credential(ADMIN)
    otc.cred = bytes(8)
    with pytest.raises(Unauthorized):
        ledger.bind_did(doc, customer(otc), otc)
    with pytest.raises(Unauthorized):
        ledger.bind_did(doc, ANONYMOUS)


def test_duplicate_did(ledger, rng):
    _, doc = new_doc(rng)
    ledger.bind_did(doc, CSP)
    with pytest.raises(DuplicateDID):
        ledger.bind_did(doc, CSP)


def test_resolve_access_control(ledger, rng):
    _, csp_doc = new_doc(rng)
    ledger.bind_did(csp_doc, CSP)
    assert ledger.resolve_did(csp_doc.did, CSP).public_key == csp_doc.public_key
    with pytest.raises(Unauthorized):
        ledger.resolve_did(csp_doc.did, ANONYMOUS)
    with pytest.raises(Unauthorized):
        ledger.resolve_did(csp_doc.did, AccessRole(Role.CUSTOMER))
    otc = ledger.issue_onetime_credential(ADMIN)
    assert ledger.resolve_did(csp_doc.did, customer(otc)) == csp_doc
    with pytest.raises(UnknownDID):
        ledger.resolve_did(DID("00" * 8), CSP)


def test_csp_resolving_customer_did_needs_signed_request(ledger, rng):
    otc = ledger.issue_onetime_credential(ADMIN)
    kp, doc = new_doc(rng)
    ledger.bind_did(doc, customer(otc), otc)
    with pytest.raises(Unauthorized):
        ledger.resolve_did(doc.did, CSP)
    other = keypair_generate(P256, rng)
    with pytest.raises(Unauthorized):
        ledger.resolve_did(doc.did, CSP, sign_value(b"req", other, rng))
    assert ledger.resolve_did(doc.did, CSP, sign_value(b"req", kp, rng)) == doc
    assert ledger.resolve_did(doc.did, ADMIN) == doc
    with pytest.raises(Unauthorized):
        ledger.resolve_did(doc.did, customer(otc))


def test_resolution_is_audited(ledger, rng):
    _, doc = new_doc(rng)
    ledger.bind_did(doc, CSP)
    n = len(ledger)
    ledger.resolve_did(doc.did, CSP)
    assert len(ledger) == n + 1 and ledger.entries[-1].type == "resolve_grant"


def test_revoke(ledger, rng):
    _, doc = new_doc(rng)
    ledger.bind_did(doc, CSP)
    before = ledger.entries
    ledger.revoke_did(doc.did, ADMIN)
    assert len(ledger) == len(before) + 1
    assert ledger.entries[: len(before)] == before
    with pytest.raises(RevokedDID):
        ledger.resolve_did(doc.did, CSP)
    with pytest.raises(UnknownDID):
        ledger.revoke_did(DID("11" * 8), ADMIN)
    with pytest.raises(Unauthorized):
        ledger.revoke_did(doc.did, CSP)


def test_genesis_issuers(rng):
    kp = keypair_generate(P256, rng)
    gov = DID.derive(P256.encode_point(kp.public), b"gov")
    ledger = Ledger(KEY, issuers=[(gov, kp.public)])
    assert ledger.resolve_did(gov, CSP).public_key == kp.public


def test_verify_chain_states(ledger, rng):
    assert Ledger(KEY).verify_chain().valid
    for _ in range(3):
        _, doc = new_doc(rng)
        ledger.bind_did(doc, CSP)
    assert ledger.verify_chain()
    assert Ledger(bytes(16)).verify_chain()


def populated(rng):
    ledger = Ledger(KEY, rng=random.Random(2))
    for i in range(4):
        otc = ledger.issue_onetime_credential(ADMIN)
        kp, doc = new_doc(rng, metadata=rng.randbytes(8))
        ledger.bind_did(doc, customer(otc), otc)
        ledger.resolve_did(doc.did, CSP, sign_value(b"r", kp, rng))
    _, doc = new_doc(rng)
    ledger.bind_did(doc, CSP)
    ledger.revoke_did(doc.did, ADMIN)
    return ledger


def test_reload_is_bit_exact(tmp_path, rng):
    ledger = populated(rng)
    path = tmp_path / "ledger.jsonl"
    ledger.save(path)
    again = Ledger.load(path, KEY)
    assert again.dumps() == ledger.dumps()
    assert again.verify_chain()
    assert again.entries == ledger.entries
    # state is rebuilt too
    assert [e.type for e in again.entries].count("revoke") == 1


def test_persisted_format_field_order(rng):
    line = populated(rng).dumps().splitlines()[0]
    assert line.startswith('{"index":0,"type":"otc_issue","payload":"')
    assert '"prev_hash":"0000000000000000","entry_hash":"' in line


def test_wrong_chain_key_rejected(rng):
    text = populated(rng).dumps()
    with pytest.raises(LedgerCorrupt) as exc:
        Ledger.loads(text, bytes(16))
    assert exc.value.index == 0


def test_every_byte_mutation_detected_at_its_line(rng):
    data = populated(rng).dumps().encode()
    assert check_persisted(data, KEY).valid
    line_starts = [0] + [i + 1 for i, b in enumerate(data) if b == 0x0A]
    r = random.Random(99)
    for pos in range(len(data)):
        mutated = bytearray(data)
        mutated[pos] = (mutated[pos] + r.randrange(1, 256)) % 256
        check = check_persisted(bytes(mutated), KEY)
        assert not check.valid, pos
        line = max(i for i, s in enumerate(line_starts) if s <= pos)
        assert check.bad_index <= line


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from(["otc", "bind", "resolve", "revoke", "rebind"]), max_size=12))
def test_append_only_under_any_operation_sequence(ops):
    rng = random.Random(len(ops))
    ledger = Ledger(KEY, rng=random.Random(3))
    docs = []
    snapshots = []
    for op in ops:
        try:
            if op == "otc":
                ledger.issue_onetime_credential(ADMIN)
            elif op == "bind":
                _, doc = new_doc(rng)
                ledger.bind_did(doc, CSP)
                docs.append(doc)
            elif op == "rebind" and docs:
                ledger.bind_did(docs[0], CSP)
            elif op == "resolve" and docs:
                ledger.resolve_did(docs[-1].did, CSP)
            elif op == "revoke" and docs:
                ledger.revoke_did(docs[-1].did, ADMIN)
        except (DuplicateDID, RevokedDID):
            pass
        snapshots.append(ledger.dumps())
    for earlier, later in zip(snapshots, snapshots[1:]):
        assert later.startswith(earlier)
    assert ledger.verify_chain()


def test_concurrent_binds_cannot_share_a_credential(rng):
    import threading

    ledger = Ledger(KEY)
    otc = ledger.issue_onetime_credential(ADMIN)
    docs = [new_doc(rng)[1] for _ in range(8)]
    wins = []

    def attempt(doc):
        cred = type(otc)(otc.tid, otc.cred)
        try:
            ledger.bind_did(doc, customer(otc), cred)
            wins.append(doc)
        except ConsumedCredential:
            pass

    threads = [threading.Thread(target=attempt, args=(d,)) for d in docs]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(wins) == 1

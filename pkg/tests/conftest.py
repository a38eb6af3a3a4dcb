import datetime as dt
import random
from dataclasses import dataclass, field

import pytest

from courier.cryptokit import hash_key128
from courier.didledger import Ledger
from courier.protocol import (
    Citizen,
    CSPState,
    GovernmentIssuer,
    RobotState,
    WalletState,
    dispatch_robot,
    order_accept,
    order_msg1,
    order_msg2,
    present_to_robot,
    reg_finalize,
    reg_msg1,
    reg_msg2,
    reg_msg3,
    robot_forward,
    robot_request,
)
from courier.pufsim import DeviceSecret, crp_enroll

ADULT = dt.date(1990, 5, 17)
MINOR = dt.date(2012, 3, 1)


@dataclass
class Cast:
    """Actors wired together without a bus; handlers are called directly."""

    rng: random.Random
    ledger: Ledger
    gov: GovernmentIssuer
    csp: CSPState
    robots: list
    wallets: list = field(default_factory=list)

    def add_wallet(self, birth=ADULT, name="Octavia Penhaligon"):
        person = Citizen(name, birth, "GB", "7 Quince Row")
        catalog_view = {pid: p.details for pid, p in self.csp.catalog.items()}
        w = WalletState(person, self.gov.issue(person, self.rng), catalog_view, self.ledger, self.rng)
        self.wallets.append(w)
        return w

    def register(self, wallet):
        m2 = reg_msg2(self.csp, reg_msg1(wallet, self.rng), self.rng)
        m3 = reg_msg3(wallet, m2, self.rng)
        return reg_finalize(self.csp, m3)

    def order(self, wallet, pid=None, now=1000):
        pid = pid or next(iter(self.csp.catalog))
        m1 = order_msg1(wallet, pid, now, self.rng)
        m2 = order_msg2(self.csp, m1, now + 10, self.rng)
        order_accept(wallet, m2, now + 20)
        return m1, m2

    def full_order(self, wallet, pid=None, now=1000):
        session = self.register(wallet)
        self.order(wallet, pid, now)
        robot = dispatch_robot(self.csp, session, self.robots)
        return session, robot

    def presentation(self, wallet, robot):
        m3 = present_to_robot(wallet, robot_request(robot), self.rng)
        return m3, robot_forward(robot, m3)


def make_cast(seed=42, robots=1, crp=32):
    rng = random.Random(seed)
    gov = GovernmentIssuer.create(rng)
    ledger = Ledger(hash_key128(rng), rng=random.Random(seed + 1), issuers=[(gov.did, gov.keypair.public)])
    csp = CSPState(ledger, rng, hash_key128(rng), trusted_issuers=frozenset({gov.did}))
    pool = []
    for i in range(robots):
        dev = DeviceSecret.manufacture(f"r{i}", rng)
        csp.crp[dev.device_id] = crp_enroll(dev, crp, rng)
        pool.append(RobotState(dev.device_id, dev))
    return Cast(rng, ledger, gov, csp, pool)


@pytest.fixture
def cast():
    c = make_cast()
    c.add_wallet()
    return c

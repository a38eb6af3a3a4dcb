"""Ideal (noiseless) PUF and the manufacturer-to-provider CRP lifecycle.

A device's silicon randomness is a 256-bit secret; its response to a
128-bit challenge is a keyed BLAKE2b of the challenge truncated to 128 bits.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

CHALLENGE_BYTES = 16
RESPONSE_BYTES = 16
SECRET_BYTES = 32
DEFAULT_CRP_COUNT = 1000


class CRPExhausted(Exception):
    pass


class UnknownChallenge(KeyError):
    pass


@dataclass(frozen=True, eq=False)
class DeviceSecret:
    device_id: str
    secret: bytes = field(repr=False)

    def __post_init__(self) -> None:
        if len(self.secret) != SECRET_BYTES:
            raise ValueError("device secret must be 256 bits")

    @classmethod
    def manufacture(cls, device_id: str, rng: random.Random) -> "DeviceSecret":
        return cls(device_id, rng.getrandbits(256).to_bytes(SECRET_BYTES, "big"))


def puf_eval(device: DeviceSecret, challenge: bytes) -> bytes:
    if len(challenge) != CHALLENGE_BYTES:
        raise ValueError("challenge must be 128 bits")
    return hashlib.blake2b(challenge, key=device.secret, digest_size=RESPONSE_BYTES).digest()


@dataclass
class CRPDatabase:
    """Challenge-response table held by the service provider for one robot.

    Issuance marking is single-writer: callers serialise :func:`crp_select`.
    """

    device_id: str
    pairs: dict[bytes, bytes] = field(default_factory=dict)
    issued: set[bytes] = field(default_factory=set)

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def remaining(self) -> int:
        return len(self.pairs) - len(self.issued)

    def export_lines(self) -> list[str]:
        return [f"{self.device_id} {c.hex()} {r.hex()}" for c, r in self.pairs.items()]

    def save(self, path: Path | str) -> None:
        Path(path).write_text("\n".join(self.export_lines()) + "\n")

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "CRPDatabase":
        db = None
        for line in lines:
            if not line.strip():
                continue
            device_id, c_hex, r_hex = line.split()
            c, r = bytes.fromhex(c_hex), bytes.fromhex(r_hex)
            if len(c) != CHALLENGE_BYTES or len(r) != RESPONSE_BYTES:
                raise ValueError(f"bad CRP line: {line!r}")
            if db is None:
                db = cls(device_id)
            elif device_id != db.device_id:
                raise ValueError("CRP file mixes devices")
            db.pairs[c] = r
        if db is None:
            raise ValueError("empty CRP file")
        return db

    @classmethod
    def load(cls, path: Path | str) -> "CRPDatabase":
        return cls.from_lines(Path(path).read_text().splitlines())


def crp_enroll(device: DeviceSecret, n_pairs: int, rng: random.Random) -> CRPDatabase:
    if n_pairs < 1:
        raise ValueError("n_pairs must be at least 1")
    db = CRPDatabase(device.device_id)
    while len(db.pairs) < n_pairs:
        c = rng.getrandbits(128).to_bytes(CHALLENGE_BYTES, "big")
        if c not in db.pairs:
            db.pairs[c] = puf_eval(device, c)
    return db


def crp_select(db: CRPDatabase, rng: random.Random) -> bytes:
    """Pick an unissued challenge uniformly and mark it issued."""
    # dict order is enrollment order, so the candidate list is reproducible
    candidates = [c for c in db.pairs if c not in db.issued]
    if not candidates:
        raise CRPExhausted(f"all {len(db.pairs)} challenges for {db.device_id} issued")
    c = candidates[rng.randrange(len(candidates))]
    db.issued.add(c)
    return c


def crp_verify(db: CRPDatabase, challenge: bytes, response: bytes) -> bool:
    try:
        expected = db.pairs[challenge]
    except KeyError:
        raise UnknownChallenge(challenge.hex()) from None
    return expected == response

"""Length-prefixed field packing shared by envelopes and ledger payloads."""

from __future__ import annotations

import struct
from typing import Sequence

_LEN = struct.Struct(">I")


class WireError(ValueError):
    pass


def pack_fields(fields: Sequence[bytes]) -> bytes:
    out = bytearray(_LEN.pack(len(fields)))
    for f in fields:
        out += _LEN.pack(len(f))
        out += f
    return bytes(out)


def unpack_fields(data: bytes) -> list[bytes]:
    if len(data) < 4:
        raise WireError("truncated field count")
    (count,) = _LEN.unpack_from(data, 0)
    pos = 4
    fields = []
    for _ in range(count):
        if pos + 4 > len(data):
            raise WireError("truncated field length")
        (n,) = _LEN.unpack_from(data, pos)
        pos += 4
        if pos + n > len(data):
            raise WireError("truncated field body")
        fields.append(data[pos : pos + n])
        pos += n
    if pos != len(data):
        raise WireError("trailing bytes after fields")
    return fields


def u64(n: int) -> bytes:
    return n.to_bytes(8, "big")


def from_u64(b: bytes) -> int:
    if len(b) != 8:
        raise WireError("expected 8-byte integer")
    return int.from_bytes(b, "big")

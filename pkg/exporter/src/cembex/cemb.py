"""CEMB embedding file writer/reader.

Little-endian binary: magic b"CEMB", version u32 = 1, count u32, dim u32,
then per record a u16 id length, the UTF-8 id bytes, and dim float32 values.
Bit-exact with the consumer pipeline's implementation of the same format.
"""

from __future__ import annotations

import struct
from typing import Iterable

import numpy as np

MAGIC = b"CEMB"
VERSION = 1
_HEADER = struct.Struct("<4sIII")
_IDLEN = struct.Struct("<H")


class CembFormatError(Exception):
    pass


def write_cemb(path: str, records: Iterable[tuple[str, np.ndarray]], dim: int) -> int:
    count = 0
    with open(path, "wb") as f:
        body = []
        for mention_id, vector in records:
            vector = np.asarray(vector, dtype="<f4")
            if vector.shape != (dim,):
                raise CembFormatError(
                    f"record {mention_id!r}: dim {vector.shape} != ({dim},)")
            encoded = mention_id.encode("utf-8")
            if len(encoded) > 0xFFFF:
                raise CembFormatError(f"id too long: {mention_id!r}")
            body.append(_IDLEN.pack(len(encoded)) + encoded + vector.tobytes())
            count += 1
        f.write(_HEADER.pack(MAGIC, VERSION, count, dim))
        for chunk in body:
            f.write(chunk)
    return count


def read_cemb(path: str) -> list[tuple[str, np.ndarray]]:
    with open(path, "rb") as f:
        header = f.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise CembFormatError("truncated header")
        magic, version, count, dim = _HEADER.unpack(header)
        if magic != MAGIC or version != VERSION:
            raise CembFormatError(f"bad magic/version: {magic!r} v{version}")
        records = []
        for _ in range(count):
            (id_len,) = _IDLEN.unpack(f.read(_IDLEN.size))
            mention_id = f.read(id_len).decode("utf-8")
            vector = np.frombuffer(f.read(4 * dim), dtype="<f4").copy()
            if vector.shape != (dim,):
                raise CembFormatError("truncated record")
            records.append((mention_id, vector))
        if f.read(1):
            raise CembFormatError("trailing bytes")
    return records

"""CEMB embedding file format.

Binary, little-endian:

    magic   4 bytes  b"CEMB"
    version u32      1
    count   u32      number of records
    dim     u32      vector length
    records count times:
        id_len  u16
        id      id_len bytes, UTF-8
        vector  dim * f32

Produced by the built-in encoder and by external embedding exporters; both
sides of the interface are bit-exact so files round-trip byte-identically.
"""

from __future__ import annotations

import struct
from typing import IO, Iterable

import numpy as np

from .errors import CorefError

MAGIC = b"CEMB"
VERSION = 1

_HEADER = struct.Struct("<4sIII")
_IDLEN = struct.Struct("<H")


class EmbeddingFileError(CorefError):
    """Corrupt or inconsistent CEMB file."""


def write_embeddings(path_or_file: str | IO[bytes],
                     records: Iterable[tuple[str, np.ndarray]],
                     dim: int | None = None) -> None:
    """Write (mention_id, vector) records as a CEMB file.

    Vectors are stored as float32. ``dim`` defaults to the first record's
    length; every record must match it.
    """
    records = list(records)
    if dim is None:
        if not records:
            raise EmbeddingFileError("cannot infer dim from an empty record list")
        dim = len(records[0][1])

    def _write(f: IO[bytes]) -> None:
        f.write(_HEADER.pack(MAGIC, VERSION, len(records), dim))
        for mention_id, vec in records:
            vec = np.asarray(vec, dtype="<f4")
            if vec.shape != (dim,):
                raise EmbeddingFileError(
                    f"record {mention_id!r} has dim {vec.shape}, expected ({dim},)"
                )
            encoded = mention_id.encode("utf-8")
            if len(encoded) > 0xFFFF:
                raise EmbeddingFileError(f"mention id too long: {mention_id!r}")
            f.write(_IDLEN.pack(len(encoded)))
            f.write(encoded)
            f.write(vec.tobytes())

    if isinstance(path_or_file, str):
        with open(path_or_file, "wb") as f:
            _write(f)
    else:
        _write(path_or_file)


def read_embeddings(path_or_file: str | IO[bytes]) -> list[tuple[str, np.ndarray]]:
    """Read a CEMB file into an ordered list of (mention_id, float32 vector)."""

    def _read(f: IO[bytes]) -> list[tuple[str, np.ndarray]]:
        header = f.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise EmbeddingFileError("truncated header")
        magic, version, count, dim = _HEADER.unpack(header)
        if magic != MAGIC:
            raise EmbeddingFileError(f"bad magic {magic!r}")
        if version != VERSION:
            raise EmbeddingFileError(f"unsupported version {version}")
        records = []
        for _ in range(count):
            raw_len = f.read(_IDLEN.size)
            if len(raw_len) != _IDLEN.size:
                raise EmbeddingFileError("truncated record header")
            (id_len,) = _IDLEN.unpack(raw_len)
            raw_id = f.read(id_len)
            if len(raw_id) != id_len:
                raise EmbeddingFileError("truncated mention id")
            raw_vec = f.read(4 * dim)
            if len(raw_vec) != 4 * dim:
                raise EmbeddingFileError("truncated vector")
            vec = np.frombuffer(raw_vec, dtype="<f4").copy()
            records.append((raw_id.decode("utf-8"), vec))
        if f.read(1):
            raise EmbeddingFileError("trailing bytes after final record")
        return records

    if isinstance(path_or_file, str):
        with open(path_or_file, "rb") as f:
            return _read(f)
    return _read(path_or_file)

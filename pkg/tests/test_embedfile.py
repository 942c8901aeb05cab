import io

import numpy as np
import pytest

from cdcoref.embedfile import (EmbeddingFileError, read_embeddings,
                               write_embeddings)


def test_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    records = [(f"m{i}", rng.normal(size=8).astype(np.float32)) for i in range(5)]
    path = str(tmp_path / "emb.cemb")
    write_embeddings(path, records)
    loaded = read_embeddings(path)
    assert [mid for mid, _ in loaded] == [mid for mid, _ in records]
    for (_, orig), (_, back) in zip(records, loaded):
        assert np.array_equal(orig, back)


def test_write_is_deterministic():
    records = [("a", np.array([1.0, 2.0])), ("b", np.array([3.0, 4.0]))]
    bufs = []
    for _ in range(2):
        buf = io.BytesIO()
        write_embeddings(buf, records)
        bufs.append(buf.getvalue())
    assert bufs[0] == bufs[1]
    assert bufs[0][:4] == b"CEMB"


def test_unicode_ids():
    buf = io.BytesIO()
    write_embeddings(buf, [("méntion/1", np.ones(3))])
    buf.seek(0)
    [(mid, vec)] = read_embeddings(buf)
    assert mid == "méntion/1"


def test_dim_mismatch_rejected():
    with pytest.raises(EmbeddingFileError, match="dim"):
        write_embeddings(io.BytesIO(), [("a", np.ones(3)), ("b", np.ones(4))])


def test_bad_magic_rejected():
    with pytest.raises(EmbeddingFileError, match="magic"):
        read_embeddings(io.BytesIO(b"NOPE" + b"\x00" * 12))


def test_truncation_rejected():
    buf = io.BytesIO()
    write_embeddings(buf, [("a", np.ones(3)), ("b", np.ones(3))])
    data = buf.getvalue()
    with pytest.raises(EmbeddingFileError, match="truncated"):
        read_embeddings(io.BytesIO(data[:-5]))


def test_trailing_bytes_rejected():
    buf = io.BytesIO()
    write_embeddings(buf, [("a", np.ones(3))])
    with pytest.raises(EmbeddingFileError, match="trailing"):
        read_embeddings(io.BytesIO(buf.getvalue() + b"x"))


def test_empty_needs_explicit_dim():
    with pytest.raises(EmbeddingFileError):
        write_embeddings(io.BytesIO(), [])
    buf = io.BytesIO()
    write_embeddings(buf, [], dim=4)
    buf.seek(0)
    assert read_embeddings(buf) == []

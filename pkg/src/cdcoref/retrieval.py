"""Candidate retrieval: exact inner-product KNN over mention embeddings.

The K nearest neighbors of a mention in the embedding space act as its
candidate set; the union of all (mention, neighbor) pairs, canonicalized and
deduplicated, is the candidate graph handed to pairwise scoring. Pairs are
generated per mention type; event-entity pairs never occur.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np

from .corpus import Corpus, Partition
from .embedfile import read_embeddings
from .encoder import MentionEmbedding
from .errors import CorefError, DimensionMismatchError, UnknownMentionError


@dataclass(frozen=True, order=True)
class CandidatePair:
    """An unordered mention pair stored in canonical orientation (a < b)."""

    a: str
    b: str

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError(f"self-pair: {self.a!r}")
        if self.a > self.b:
            raise ValueError(f"pair not canonical: {self.a!r} > {self.b!r}")


def make_pair(x: str, y: str) -> CandidatePair:
    """Canonicalize an unordered pair of mention ids."""
    return CandidatePair(x, y) if x < y else CandidatePair(y, x)


@dataclass
class PairRecord:
    """One line of the pairs JSONL: a candidate pair with optional label/score."""

    a: str
    b: str
    label: int | None = None
    score: float | None = None

    def pair(self) -> CandidatePair:
        return make_pair(self.a, self.b)

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "label": self.label, "score": self.score}


class NeighborIndex:
    """Immutable exact inner-product index; insertion order breaks ties."""

    def __init__(self, records: Iterable[tuple[str, np.ndarray]]):
        records = list(records)
        if not records:
            raise ValueError("cannot build an index from no embeddings")
        self.ids: list[str] = []
        vectors = []
        positions: dict[str, int] = {}
        dim = None
        for mention_id, vec in records:
            vec = np.asarray(vec, dtype=np.float64)
            if dim is None:
                dim = vec.shape[0]
            elif vec.shape[0] != dim:
                raise DimensionMismatchError(
                    f"embedding {mention_id!r} has dim {vec.shape[0]}, expected {dim}"
                )
            if mention_id in positions:
                raise ValueError(f"duplicate mention id in index: {mention_id!r}")
            positions[mention_id] = len(self.ids)
            self.ids.append(mention_id)
            vectors.append(vec)
        self.dim = dim
        self.matrix = np.stack(vectors)
        self._positions = positions

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, mention_id: str) -> bool:
        return mention_id in self._positions

    def position(self, mention_id: str) -> int:
        try:
            return self._positions[mention_id]
        except KeyError:
            raise UnknownMentionError(mention_id) from None


def build_index(embeddings) -> NeighborIndex:
    """Build an index from a CEMB path, (id, vector) tuples, or MentionEmbeddings."""
    if isinstance(embeddings, str):
        return NeighborIndex(read_embeddings(embeddings))
    records = []
    for item in embeddings:
        if isinstance(item, MentionEmbedding):
            records.append((item.mention_id, item.vector))
        else:
            records.append(item)
    return NeighborIndex(records)


def query_knn(index: NeighborIndex, mention_id: str, k: int) -> list[tuple[str, float]]:
    """Top-k neighbors by inner product, excluding the query mention.

    Ties break by insertion order; k is clipped to index size - 1.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    pos = index.position(mention_id)
    scores = index.matrix @ index.matrix[pos]
    order = np.argsort(-scores, kind="stable")
    out = []
    for i in order:
        if i == pos:
            continue
        out.append((index.ids[i], float(scores[i])))
        if len(out) == k:
            break
    return out


def generate_pairs(corpus: Corpus, index: NeighborIndex, k: int,
                   mention_type: str) -> set[CandidatePair]:
    """Union of canonical KNN pairs over all mentions of one type.

    Every corpus mention of the requested type must be present in the index.
    Retrieved neighbors that are not mentions of the same type are dropped,
    so cross-type pairs are never emitted.
    """
    wanted = corpus.mention_ids(mention_type)
    missing = [mid for mid in wanted if mid not in index]
    if missing:
        raise CorefError(
            f"index does not cover {len(missing)} corpus mention(s), "
            f"e.g. {missing[:3]}"
        )
    typed = set(wanted)
    pairs: set[CandidatePair] = set()
    for mention_id in wanted:
        for neighbor_id, _ in query_knn(index, mention_id, k):
            if neighbor_id in typed:
                pairs.add(make_pair(mention_id, neighbor_id))
    return pairs


def label_pairs(pairs: Iterable[CandidatePair], gold: Partition) -> list[PairRecord]:
    """Attach gold labels (1 = same cluster) to candidate pairs, sorted."""
    records = []
    for pair in sorted(pairs):
        try:
            same = gold.cluster_of(pair.a) == gold.cluster_of(pair.b)
        except KeyError as exc:
            raise KeyError(f"mention {exc.args[0]!r} has no gold label") from None
        records.append(PairRecord(a=pair.a, b=pair.b, label=1 if same else 0))
    return records


def pair_recall(pairs: Iterable[CandidatePair], gold: Partition) -> tuple[float, dict]:
    """Upper-bound recall of a candidate graph, via an oracle clustering run.

    Scores each candidate pair with gold labels, clusters greedily, and
    reports the B-cubed recall of the result against gold: the best any
    downstream classifier could recover from this graph.
    """
    from .clustering import greedy_cluster
    from .metrics import b_cubed
    from .pairwise import oracle_score, oracle_scorer

    pairs = sorted(set(pairs))
    for pair in pairs:
        for m in (pair.a, pair.b):
            if m not in gold.assignment:
                raise KeyError(f"mention {m!r} has no gold label")
    scored = [oracle_score(pair, gold) for pair in pairs]
    mention_ids = sorted(gold.mention_ids())
    predicted, _ = greedy_cluster(mention_ids, scored, oracle_scorer(gold))
    recall = b_cubed(gold, predicted).recall
    counts = {
        "n_mentions": len(mention_ids),
        "n_pairs": len(pairs),
        "n_gold_positive_pairs": sum(1 for s in scored if s.probability == 1.0),
    }
    return recall, counts


def write_pairs_jsonl(records: Iterable[PairRecord], path_or_file: str | IO[str]) -> None:
    def _write(f: IO[str]) -> None:
        for rec in records:
            f.write(json.dumps(rec.to_dict()) + "\n")

    if isinstance(path_or_file, str):
        with open(path_or_file, "w", encoding="utf-8") as f:
            _write(f)
    else:
        _write(path_or_file)


def read_pairs_jsonl(path_or_file: str | IO[str]) -> list[PairRecord]:
    def _read(f: IO[str]) -> list[PairRecord]:
        records = []
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                rec = PairRecord(a=str(raw["a"]), b=str(raw["b"]),
                                 label=raw.get("label"), score=raw.get("score"))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise CorefError(f"bad pairs record at line {line_no}: {exc}") from None
            if rec.label not in (None, 0, 1):
                raise CorefError(f"bad label at line {line_no}: {rec.label!r}")
            if rec.score is not None and not 0.0 <= rec.score <= 1.0:
                raise CorefError(f"score out of range at line {line_no}: {rec.score!r}")
            records.append(rec)
        return records

    if isinstance(path_or_file, str):
        with open(path_or_file, "r", encoding="utf-8") as f:
            return _read(f)
    return _read(path_or_file)

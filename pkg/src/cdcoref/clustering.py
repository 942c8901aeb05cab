"""Greedy edge-local agglomerative clustering over scored candidate pairs.

Pairs below probability 0.5 are dropped; the rest are visited once in order
of descending probability. Each visit compares only the two clusters
currently containing the pair's endpoints and merges them iff their mean
cross-pair score exceeds 0.5. Scores come from a cache seeded with the
retrieved pairs and are computed on demand otherwise, so the full pairwise
matrix is never materialized.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

from .corpus import Partition
from .pairwise import PairScorer, ScoredPair
from .retrieval import CandidatePair, make_pair


@dataclass(frozen=True)
class MergeEvent:
    """One considered pair in a clustering run."""

    a: str
    b: str
    probability: float
    cluster_a: str  # root of a's cluster when considered
    cluster_b: str
    cluster_score: float | None  # None when skipped (already same cluster)
    merged: bool

    def to_dict(self) -> dict:
        return {
            "a": self.a, "b": self.b, "probability": self.probability,
            "cluster_a": self.cluster_a, "cluster_b": self.cluster_b,
            "cluster_score": self.cluster_score, "merged": self.merged,
        }


MergeTrace = list[MergeEvent]


class ClusterState:
    """Disjoint-set over mention ids with member lists and a pair-score cache.

    The root of every cluster is its lexicographically smallest member, so
    cluster ids are stable and deterministic.
    """

    def __init__(self, mention_ids: Iterable[str]):
        self.parent: dict[str, str] = {}
        self.members: dict[str, list[str]] = {}
        for m in mention_ids:
            if m in self.parent:
                raise ValueError(f"duplicate mention id {m!r}")
            self.parent[m] = m
            self.members[m] = [m]
        self.score_cache: dict[CandidatePair, float] = {}

    def find(self, mention_id: str) -> str:
        root = mention_id
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[mention_id] != root:  # path compression
            self.parent[mention_id], mention_id = root, self.parent[mention_id]
        return root

    def union(self, root_a: str, root_b: str) -> str:
        if root_a == root_b:
            raise ValueError("union of a cluster with itself")
        keep, drop = (root_a, root_b) if root_a < root_b else (root_b, root_a)
        self.parent[drop] = keep
        self.members[keep].extend(self.members.pop(drop))
        return keep

    def partition(self) -> Partition:
        return Partition({m: root for root, ms in self.members.items() for m in ms})


def filter_and_sort_pairs(scored: Sequence[ScoredPair]) -> list[ScoredPair]:
    """Keep pairs with probability >= 0.5, descending; ties by pair id."""
    kept = [s for s in scored if s.probability >= 0.5]
    kept.sort(key=lambda s: (-s.probability, s.pair.a, s.pair.b))
    return kept


def cluster_pair_score(state: ClusterState, root_a: str, root_b: str,
                       scorer: PairScorer) -> float:
    """Mean scorer probability over all cross-cluster mention pairs.

    Cache hits are reused; misses are scored on demand and cached. Raises
    whatever the scorer raises when it cannot score a needed pair.
    """
    if root_a == root_b:
        raise ValueError("cluster_pair_score requires two distinct clusters")
    total = 0.0
    count = 0
    for m in state.members[root_a]:
        for n in state.members[root_b]:
            key = make_pair(m, n)
            prob = state.score_cache.get(key)
            if prob is None:
                prob = scorer(m, n)
                state.score_cache[key] = prob
            total += prob
            count += 1
    return total / count


def greedy_cluster(mention_ids: Iterable[str], scored: Sequence[ScoredPair],
                   scorer: PairScorer, trace: bool = False
                   ) -> tuple[Partition, MergeTrace]:
    """Single-pass greedy merging over the retained, sorted pair list.

    Mentions never appearing in a retained pair stay singletons. Returns the
    final partition (cluster id = smallest member mention id) and, when
    ``trace`` is set, the ordered audit of every considered pair.
    """
    state = ClusterState(mention_ids)
    for s in scored:
        state.score_cache.setdefault(s.pair, s.probability)

    events: MergeTrace = []
    for s in filter_and_sort_pairs(scored):
        root_a = state.find(s.pair.a)
        root_b = state.find(s.pair.b)
        if root_a == root_b:
            if trace:
                events.append(MergeEvent(s.pair.a, s.pair.b, s.probability,
                                         root_a, root_b, None, False))
            continue
        score = cluster_pair_score(state, root_a, root_b, scorer)
        merged = score > 0.5
        if merged:
            state.union(root_a, root_b)
        if trace:
            events.append(MergeEvent(s.pair.a, s.pair.b, s.probability,
                                     root_a, root_b, score, merged))
    return state.partition(), events


def write_trace(events: MergeTrace, path_or_file: str | IO[str]) -> None:
    def _write(f: IO[str]) -> None:
        for e in events:
            f.write(json.dumps(e.to_dict()) + "\n")

    if isinstance(path_or_file, str):
        with open(path_or_file, "w", encoding="utf-8") as f:
            _write(f)
    else:
        _write(path_or_file)

from itertools import combinations

import numpy as np
import pytest

from cdcoref.clustering import (ClusterState, cluster_pair_score,
                                filter_and_sort_pairs, greedy_cluster,
                                write_trace)
from cdcoref.corpus import Partition
from cdcoref.errors import UnscoredPairError
from cdcoref.pairwise import ExternalScoreTable, ScoredPair, oracle_scorer
from cdcoref.retrieval import PairRecord, make_pair

from reference import ref_greedy_cluster


def sp(a, b, p):
    return ScoredPair(make_pair(a, b), p)


def clusters_of(partition: Partition) -> set[frozenset[str]]:
    return set(partition.clusters().values())


def test_filter_keeps_boundary_and_sorts():
    scored = [sp("a", "b", 0.9), sp("a", "c", 0.4), sp("b", "c", 0.5)]
    kept = filter_and_sort_pairs(scored)
    assert [(s.pair.a, s.pair.b, s.probability) for s in kept] == \
        [("a", "b", 0.9), ("b", "c", 0.5)]


def test_filter_all_below_threshold():
    assert filter_and_sort_pairs([sp("a", "b", 0.49), sp("a", "c", 0.0)]) == []


def test_filter_tie_break_lexicographic():
    scored = [sp("b", "c", 0.7), sp("a", "d", 0.7), sp("a", "b", 0.7)]
    kept = filter_and_sort_pairs(scored)
    assert [(s.pair.a, s.pair.b) for s in kept] == [("a", "b"), ("a", "d"), ("b", "c")]


def test_cluster_pair_score_two_singletons():
    state = ClusterState(["a", "b"])
    assert cluster_pair_score(state, "a", "b", lambda x, y: 0.73) == 0.73


def test_cluster_pair_score_mean_and_cache():
    state = ClusterState(["a", "b", "c"])
    state.union("a", "b")
    table = {("a", "c"): 1.0, ("b", "c"): 0.0}
    calls = []

    def scorer(x, y):
        key = tuple(sorted((x, y)))
        calls.append(key)
        return table[key]

    assert cluster_pair_score(state, "a", "c", scorer) == pytest.approx(0.5)
    # second call comes fully from cache
    assert cluster_pair_score(state, "a", "c", scorer) == pytest.approx(0.5)
    assert len(calls) == 2
    with pytest.raises(ValueError):
        cluster_pair_score(state, "a", "a", scorer)


def test_cluster_pair_score_oracle_same_gold():
    gold = Partition({"a": "g", "b": "g", "c": "g"})
    state = ClusterState(["a", "b", "c"])
    state.union("a", "b")
    assert cluster_pair_score(state, "a", "c", oracle_scorer(gold)) == 1.0


def test_no_retained_pairs_all_singletons():
    partition, trace = greedy_cluster(["a", "b", "c"], [sp("a", "b", 0.2)],
                                      lambda x, y: 0.0)
    assert clusters_of(partition) == {frozenset({"a"}), frozenset({"b"}),
                                      frozenset({"c"})}
    assert trace == []


def test_single_pair_merges():
    partition, _ = greedy_cluster(["a", "b", "c"], [sp("a", "b", 0.9)],
                                  lambda x, y: 0.9)
    assert clusters_of(partition) == {frozenset({"a", "b"}), frozenset({"c"})}


def test_chain_merges_with_oracle():
    gold = Partition({"a": "g", "b": "g", "c": "g"})
    scored = [sp("a", "b", 0.9), sp("b", "c", 0.8)]
    partition, trace = greedy_cluster(["a", "b", "c"], scored,
                                      oracle_scorer(gold), trace=True)
    assert clusters_of(partition) == {frozenset({"a", "b", "c"})}
    assert [e.merged for e in trace] == [True, True]


def test_same_cluster_pair_skipped_in_trace():
    gold = Partition({"a": "g", "b": "g", "c": "g"})
    scored = [sp("a", "b", 0.9), sp("b", "c", 0.8), sp("a", "c", 0.7)]
    _, trace = greedy_cluster(["a", "b", "c"], scored, oracle_scorer(gold),
                              trace=True)
    last = trace[-1]
    assert (last.merged, last.cluster_score) == (False, None)
    assert last.cluster_a == last.cluster_b


def test_merge_requires_strictly_above_half():
    # the pair is retained (>= 0.5) but the cluster score equals 0.5 exactly
    partition, trace = greedy_cluster(["a", "b"], [sp("a", "b", 0.5)],
                                      lambda x, y: 0.5, trace=True)
    assert clusters_of(partition) == {frozenset({"a"}), frozenset({"b"})}
    assert trace[0].merged is False and trace[0].cluster_score == 0.5


def test_trace_probability_sequence_non_increasing(trained_setup):
    rng = np.random.default_rng(4)
    mentions = [f"m{i}" for i in range(12)]
    scored = [sp(a, b, float(rng.random())) for a, b in combinations(mentions, 2)]
    lookup = {s.pair: s.probability for s in scored}
    _, trace = greedy_cluster(mentions, scored,
                              lambda x, y: lookup[make_pair(x, y)], trace=True)
    probs = [e.probability for e in trace]
    assert probs == sorted(probs, reverse=True)


def test_partition_covers_exactly_input_mentions():
    rng = np.random.default_rng(5)
    mentions = [f"m{i}" for i in range(9)]
    scored = [sp(a, b, float(rng.random())) for a, b in combinations(mentions, 2)]
    lookup = {s.pair: s.probability for s in scored}
    partition, _ = greedy_cluster(mentions, scored,
                                  lambda x, y: lookup[make_pair(x, y)])
    assert partition.mention_ids() == frozenset(mentions)


def test_external_table_gap_propagates():
    table = ExternalScoreTable([PairRecord("a", "b", score=0.9),
                                PairRecord("b", "c", score=0.8)])
    # merging {a,b} with {c} needs (a,c), which the table lacks
    scored = [sp("a", "b", 0.9), sp("b", "c", 0.8)]
    with pytest.raises(UnscoredPairError):
        greedy_cluster(["a", "b", "c"], scored, table.scorer())


def test_oracle_result_is_gold_connected_components():
    gold = Partition({"a": "g1", "b": "g1", "c": "g1", "d": "g2", "e": "g2"})
    scored = [sp("a", "b", 1.0), sp("b", "c", 1.0), sp("c", "d", 0.0),
              sp("d", "e", 1.0)]
    partition, _ = greedy_cluster(sorted(gold.assignment), scored,
                                  oracle_scorer(gold))
    assert clusters_of(partition) == {frozenset({"a", "b", "c"}),
                                      frozenset({"d", "e"})}


def test_greedy_matches_brute_force_reference():
    rng = np.random.default_rng(99)
    for trial in range(200):
        n = int(rng.integers(2, 11))
        mentions = [f"m{i}" for i in range(n)]
        probs = {}
        scored = []
        for a, b in combinations(mentions, 2):
            p = float(rng.random())
            probs[(a, b)] = p
            scored.append(sp(a, b, p))

        def scorer(x, y):
            return probs[(x, y) if x < y else (y, x)]

        partition, _ = greedy_cluster(mentions, scored, scorer)
        expected = set(ref_greedy_cluster(
            mentions, [(s.pair.a, s.pair.b, s.probability) for s in scored],
            scorer))
        assert clusters_of(partition) == expected


def test_trace_jsonl(tmp_path):
    gold = Partition({"a": "g", "b": "g"})
    _, trace = greedy_cluster(["a", "b"], [sp("a", "b", 0.9)],
                              oracle_scorer(gold), trace=True)
    path = str(tmp_path / "trace.jsonl")
    write_trace(trace, path)
    import json
    lines = [json.loads(line) for line in open(path, encoding="utf-8")]
    assert lines[0]["merged"] is True and lines[0]["probability"] == 0.9

"""Independent brute-force reference implementations used as test oracles.

Everything here is written straight from the metric/algorithm definitions,
with no code shared with the package under test. Deliberately slow and
simple: list-of-set cluster representations, exhaustive iteration, a
subset-bitmask search for the CEAFe alignment (exact for the small partition
sizes used in tests), and an uncached transcription of the greedy merge
algorithm.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np


def to_clusters(assignment: dict[str, str]) -> list[set[str]]:
    by_cluster: dict[str, set[str]] = {}
    for mention, cluster in assignment.items():
        by_cluster.setdefault(cluster, set()).add(mention)
    # sorted for determinism
    return [by_cluster[c] for c in sorted(by_cluster)]


def _f1(r: float, p: float) -> float:
    if r + p == 0.0:
        return 0.0
    return 2.0 * r * p / (r + p)


def ref_b_cubed(gold: dict[str, str], pred: dict[str, str]) -> tuple[float, float, float]:
    """Per-mention overlap averages (Bagga & Baldwin)."""
    mentions = set(gold)
    assert mentions == set(pred)
    gold_clusters = to_clusters(gold)
    pred_clusters = to_clusters(pred)

    def cluster_containing(m, clusters):
        for c in clusters:
            if m in c:
                return c
        raise AssertionError(m)

    recall = 0.0
    precision = 0.0
    for m in mentions:
        g = cluster_containing(m, gold_clusters)
        p = cluster_containing(m, pred_clusters)
        recall += len(g & p) / len(g)
        precision += len(g & p) / len(p)
    recall /= len(mentions)
    precision /= len(mentions)
    return recall, precision, _f1(recall, precision)


def ref_muc(gold: dict[str, str], pred: dict[str, str]) -> tuple[float, float, float]:
    """Link-based MUC (Vilain et al.): R = sum(|g| - p(g)) / sum(|g| - 1)."""
    assert set(gold) == set(pred)

    def score(key: list[set[str]], response: list[set[str]]) -> tuple[float, float]:
        num = 0.0
        den = 0.0
        for g in key:
            touched = set()
            for m in g:
                for j, p in enumerate(response):
                    if m in p:
                        touched.add(j)
            num += len(g) - len(touched)
            den += len(g) - 1
        return num, den

    r_num, r_den = score(to_clusters(gold), to_clusters(pred))
    p_num, p_den = score(to_clusters(pred), to_clusters(gold))
    recall = r_num / r_den if r_den else 0.0
    precision = p_num / p_den if p_den else 0.0
    return recall, precision, _f1(recall, precision)


def ref_ceafe(gold: dict[str, str], pred: dict[str, str]) -> tuple[float, float, float]:
    """Entity-based CEAF with phi4 and an exact subset-bitmask alignment search.

    dp[mask] after processing the first i gold clusters is the best total phi
    matching them one-to-one into the predicted clusters of ``mask`` (gold
    clusters may stay unmatched), so dp[full] enumerates every alignment.
    """
    assert set(gold) == set(pred)
    gold_clusters = to_clusters(gold)
    pred_clusters = to_clusters(pred)

    def phi4(g: set[str], p: set[str]) -> float:
        return 2.0 * len(g & p) / (len(g) + len(p))

    n_pred = len(pred_clusters)
    masks = np.arange(1 << n_pred)
    with_bit = [np.flatnonzero(masks & (1 << j)) for j in range(n_pred)]

    dp = np.zeros(1 << n_pred)
    for g in gold_clusters:
        new_dp = dp.copy()
        for j, p in enumerate(pred_clusters):
            idx = with_bit[j]
            candidate = dp[idx ^ (1 << j)] + phi4(g, p)
            new_dp[idx] = np.maximum(new_dp[idx], candidate)
        dp = new_dp
    total = float(dp[-1])

    recall = total / len(gold_clusters) if gold_clusters else 0.0
    precision = total / len(pred_clusters) if pred_clusters else 0.0
    return recall, precision, _f1(recall, precision)


def ref_lea(gold: dict[str, str], pred: dict[str, str]) -> tuple[float, float, float]:
    """Link-based entity-aware metric (Moosavi & Strube), coval conventions.

    A size-1 cluster has link count 1 and resolves iff the cluster containing
    its mention on the other side is also size 1.
    """
    assert set(gold) == set(pred)

    def links(c: set[str]) -> int:
        return len(c) * (len(c) - 1) // 2

    def side(key: list[set[str]], response: list[set[str]]) -> float:
        num = 0.0
        den = 0.0
        for k in key:
            if len(k) == 1:
                m = next(iter(k))
                resolved = any(m in r and len(r) == 1 for r in response)
                num += 1.0 * (1.0 if resolved else 0.0)
            else:
                common = 0
                for a, b in combinations(sorted(k), 2):
                    if any(a in r and b in r for r in response):
                        common += 1
                num += len(k) * common / links(k)
            den += len(k)
        return num / den if den else 0.0

    recall = side(to_clusters(gold), to_clusters(pred))
    precision = side(to_clusters(pred), to_clusters(gold))
    return recall, precision, _f1(recall, precision)


def ref_conll(gold: dict[str, str], pred: dict[str, str]) -> float:
    return (ref_muc(gold, pred)[2] + ref_b_cubed(gold, pred)[2]
            + ref_ceafe(gold, pred)[2]) / 3.0


def ref_greedy_cluster(mention_ids: list[str],
                       scored_pairs: list[tuple[str, str, float]],
                       scorer) -> list[frozenset[str]]:
    """Uncached transcription of the greedy merge algorithm.

    Pairs with probability >= 0.5 are kept and sorted by descending
    probability (ties by pair id); clusters start as singletons; each pair's
    current clusters are merged iff the mean cross-pair score exceeds 0.5.
    ``scorer(a, b)`` is called afresh for every needed pair, every time.
    """
    kept = [(a, b, s) for (a, b, s) in scored_pairs if s >= 0.5]
    kept.sort(key=lambda t: (-t[2], t[0], t[1]))
    clusters: list[set[str]] = [{m} for m in mention_ids]

    def find(m: str) -> set[str]:
        for c in clusters:
            if m in c:
                return c
        raise AssertionError(m)

    for a, b, _ in kept:
        ca = find(a)
        cb = find(b)
        if ca is cb:
            continue
        total = 0.0
        count = 0
        for m in ca:
            for n in cb:
                total += scorer(m, n)
                count += 1
        if total / count > 0.5:
            clusters.remove(ca)
            clusters.remove(cb)
            clusters.append(ca | cb)
    return [frozenset(c) for c in clusters]


def central_difference(f, x, h: float = 1e-4) -> float:
    """Scalar central finite difference of f at x."""
    return (f(x + h) - f(x - h)) / (2.0 * h)

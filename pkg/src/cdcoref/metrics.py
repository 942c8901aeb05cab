"""Coreference evaluation metrics: MUC, B-cubed, CEAFe, LEA, and CoNLL F1.

All metrics take a gold and a predicted Partition over the *same* mention
set; mismatched mention sets are an error (mention detection is assumed
perfect). Conventions: 0/0 ratios evaluate to 0, and F1 of (0, 0) is 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .corpus import Partition
from .errors import CorefError


class MentionSetMismatch(CorefError, ValueError):
    """Gold and predicted partitions cover different mention sets."""


@dataclass(frozen=True)
class MetricTriple:
    recall: float
    precision: float
    f1: float

    def to_dict(self) -> dict:
        return {"recall": self.recall, "precision": self.precision, "f1": self.f1}

    @classmethod
    def from_dict(cls, d: dict) -> "MetricTriple":
        return cls(d["recall"], d["precision"], d["f1"])


@dataclass(frozen=True)
class MetricReport:
    muc: MetricTriple
    b_cubed: MetricTriple
    ceaf_e: MetricTriple
    lea: MetricTriple
    conll_f1: float

    def to_dict(self) -> dict:
        return {
            "muc": self.muc.to_dict(),
            "b_cubed": self.b_cubed.to_dict(),
            "ceaf_e": self.ceaf_e.to_dict(),
            "lea": self.lea.to_dict(),
            "conll_f1": self.conll_f1,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MetricReport":
        return cls(
            muc=MetricTriple.from_dict(d["muc"]),
            b_cubed=MetricTriple.from_dict(d["b_cubed"]),
            ceaf_e=MetricTriple.from_dict(d["ceaf_e"]),
            lea=MetricTriple.from_dict(d["lea"]),
            conll_f1=d["conll_f1"],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def format_table(self) -> str:
        rows = [("MUC", self.muc), ("B3", self.b_cubed),
                ("CEAFe", self.ceaf_e), ("LEA", self.lea)]
        lines = [f"{'metric':<8}{'R':>8}{'P':>8}{'F1':>8}"]
        for name, t in rows:
            lines.append(f"{name:<8}{t.recall * 100:>8.2f}{t.precision * 100:>8.2f}"
                         f"{t.f1 * 100:>8.2f}")
        lines.append(f"{'CoNLL':<8}{'':>8}{'':>8}{self.conll_f1 * 100:>8.2f}")
        return "\n".join(lines)


def _f1(recall: float, precision: float) -> float:
    if recall + precision == 0.0:
        return 0.0
    return 2.0 * recall * precision / (recall + precision)


def _check_mention_sets(gold: Partition, pred: Partition) -> None:
    if gold.mention_ids() != pred.mention_ids():
        missing = sorted(gold.mention_ids() - pred.mention_ids())[:3]
        extra = sorted(pred.mention_ids() - gold.mention_ids())[:3]
        raise MentionSetMismatch(
            f"partitions cover different mentions (e.g. missing={missing}, extra={extra})"
        )


def b_cubed(gold: Partition, pred: Partition) -> MetricTriple:
    """Per-mention overlap: recall |G(m) & P(m)|/|G(m)| averaged over mentions."""
    _check_mention_sets(gold, pred)
    gold_clusters = gold.clusters()
    pred_clusters = pred.clusters()
    recall = 0.0
    precision = 0.0
    n = 0
    for mention, gold_cid in gold.assignment.items():
        g = gold_clusters[gold_cid]
        p = pred_clusters[pred.assignment[mention]]
        overlap = len(g & p)
        recall += overlap / len(g)
        precision += overlap / len(p)
        n += 1
    if n == 0:
        return MetricTriple(0.0, 0.0, 0.0)
    recall /= n
    precision /= n
    return MetricTriple(recall, precision, _f1(recall, precision))


def muc(gold: Partition, pred: Partition) -> MetricTriple:
    """Link-based: R = sum_g(|g| - p(g)) / sum_g(|g| - 1), precision dually.

    p(g) is the number of predicted clusters intersecting g. All-singleton
    inputs have no links on either side and score 0 by convention.
    """
    _check_mention_sets(gold, pred)

    def one_side(key: Partition, response: Partition) -> float:
        num = 0.0
        den = 0.0
        for cluster in key.clusters().values():
            num += len(cluster) - len({response.assignment[m] for m in cluster})
            den += len(cluster) - 1
        return num / den if den else 0.0

    recall = one_side(gold, pred)
    precision = one_side(pred, gold)
    return MetricTriple(recall, precision, _f1(recall, precision))


def ceaf_e(gold: Partition, pred: Partition) -> MetricTriple:
    """Entity-based CEAF: optimal one-to-one cluster alignment under phi4.

    phi4(g, p) = 2|g & p| / (|g| + |p|); the alignment is an exact
    maximum-weight bipartite matching; R = sum(phi)/|G|, P = sum(phi)/|P|.
    """
    _check_mention_sets(gold, pred)
    gold_clusters = list(gold.clusters().values())
    pred_clusters = list(pred.clusters().values())
    if not gold_clusters or not pred_clusters:
        return MetricTriple(0.0, 0.0, 0.0)
    weights = np.zeros((len(gold_clusters), len(pred_clusters)))
    for i, g in enumerate(gold_clusters):
        for j, p in enumerate(pred_clusters):
            weights[i, j] = 2.0 * len(g & p) / (len(g) + len(p))
    total = max_weight_assignment(weights)
    recall = total / len(gold_clusters)
    precision = total / len(pred_clusters)
    return MetricTriple(recall, precision, _f1(recall, precision))


def lea(gold: Partition, pred: Partition) -> MetricTriple:
    """Link-based entity-aware metric (size-weighted link resolution).

    link(k) = k(k-1)/2; each cluster contributes |c| * resolved/link(c).
    Singletons use the self-link convention: link = 1, resolved iff the
    counterpart cluster containing the mention is also a singleton.
    """
    _check_mention_sets(gold, pred)

    def one_side(key: Partition, response: Partition) -> float:
        response_clusters = response.clusters()
        num = 0.0
        den = 0.0
        for cluster in key.clusters().values():
            size = len(cluster)
            if size == 1:
                m = next(iter(cluster))
                counterpart = response_clusters[response.assignment[m]]
                resolved = 1.0 if len(counterpart) == 1 else 0.0
                num += resolved  # size * resolved / link with size = link = 1
            else:
                members = sorted(cluster)
                common = 0
                for i in range(len(members)):
                    for j in range(i + 1, len(members)):
                        if response.assignment[members[i]] == response.assignment[members[j]]:
                            common += 1
                num += size * common / (size * (size - 1) / 2.0)
            den += size
        return num / den if den else 0.0

    recall = one_side(gold, pred)
    precision = one_side(pred, gold)
    return MetricTriple(recall, precision, _f1(recall, precision))


def conll_f1(report: MetricReport) -> float:
    """Arithmetic mean of the MUC, B-cubed, and CEAFe F1 scores."""
    return (report.muc.f1 + report.b_cubed.f1 + report.ceaf_e.f1) / 3.0


def evaluate(gold: Partition, pred: Partition) -> MetricReport:
    """Compute the full metric suite over a (gold, predicted) partition pair."""
    muc_t = muc(gold, pred)
    b3_t = b_cubed(gold, pred)
    ceafe_t = ceaf_e(gold, pred)
    lea_t = lea(gold, pred)
    return MetricReport(
        muc=muc_t,
        b_cubed=b3_t,
        ceaf_e=ceafe_t,
        lea=lea_t,
        conll_f1=(muc_t.f1 + b3_t.f1 + ceafe_t.f1) / 3.0,
    )


def max_weight_assignment(weights: np.ndarray) -> float:
    """Maximum total weight of a one-to-one row/column assignment.

    Rectangular matrices are padded to square with zero-weight cells, so
    leaving a row or column unmatched costs nothing. O(n^3) Hungarian
    algorithm with potentials; the returned total is re-summed from the
    original weights of the chosen cells.
    """
    n_rows, n_cols = weights.shape
    n = max(n_rows, n_cols)
    cost = np.zeros((n + 1, n + 1))
    cost[1:n_rows + 1, 1:n_cols + 1] = -weights

    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    match = np.zeros(n + 1, dtype=np.int64)  # match[j] = row assigned to column j
    way = np.zeros(n + 1, dtype=np.int64)

    for i in range(1, n + 1):
        match[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = match[j0]
            delta = np.inf
            j1 = 0
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = cost[i0, j] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[match[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if match[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1

    total = 0.0
    for j in range(1, n + 1):
        i = match[j]
        if 1 <= i <= n_rows and 1 <= j <= n_cols:
            total += weights[i - 1, j - 1]
    return total

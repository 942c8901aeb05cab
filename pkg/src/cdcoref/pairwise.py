"""Fine-grained pair classification over retrieved candidate pairs.

A pair is represented as [v_i, v_j, v_i * v_j] built from the two mentions'
window-aware vectors; a small MLP maps that to a coreference probability.
Training uses binary cross entropy on KNN-sampled pairs, so negatives are
exactly the hard ones retrieval could not separate. An oracle scorer (gold
label lookup) and an external score table can stand in for the trained model.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .corpus import Partition
from .errors import DimensionMismatchError, UnscoredPairError
from .retrieval import CandidatePair, PairRecord, make_pair, read_pairs_jsonl

PairScorer = Callable[[str, str], float]


@dataclass(frozen=True)
class PairwiseConfig:
    window_w: int = 3
    hidden_dim: int = 128
    learning_rate: float = 0.01
    epochs: int = 10
    batch_size: int = 32
    seed: int = 0
    train_k: int = 15
    infer_k: int = 5

    def __post_init__(self):
        if self.window_w < 0:
            raise ValueError("window_w must be >= 0")
        if min(self.hidden_dim, self.batch_size, self.train_k, self.infer_k) <= 0:
            raise ValueError("hidden_dim, batch_size, train_k, infer_k must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")


@dataclass
class ScorerParams:
    """One hidden layer with rectification, one output logit."""

    w1: np.ndarray  # (3 * mention_dim, hidden_dim)
    b1: np.ndarray  # (hidden_dim,)
    w2: np.ndarray  # (hidden_dim,)
    b2: float

    @property
    def input_dim(self) -> int:
        return self.w1.shape[0]

    def copy(self) -> "ScorerParams":
        return ScorerParams(self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2)


@dataclass(frozen=True)
class ScoredPair:
    pair: CandidatePair
    probability: float

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"probability out of range: {self.probability}")


def pair_representation(v_i: np.ndarray, v_j: np.ndarray) -> np.ndarray:
    """[v_i, v_j, v_i * v_j]: the two vectors plus their elementwise product."""
    if v_i.shape != v_j.shape:
        raise DimensionMismatchError(f"pair dims differ: {v_i.shape} vs {v_j.shape}")
    return np.concatenate([v_i, v_j, v_i * v_j])


def _unit(v: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(v)
    return v / norm if norm > 0.0 else v


def init_scorer(config: PairwiseConfig, mention_dim: int) -> ScorerParams:
    """Seeded uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)], zero biases."""
    rng = np.random.default_rng(config.seed)
    input_dim = 3 * mention_dim
    w1 = rng.uniform(-1.0, 1.0, (input_dim, config.hidden_dim)) / np.sqrt(input_dim)
    w2 = rng.uniform(-1.0, 1.0, config.hidden_dim) / np.sqrt(config.hidden_dim)
    return ScorerParams(w1=w1, b1=np.zeros(config.hidden_dim), w2=w2, b2=0.0)


def save_scorer(params: ScorerParams, path: str) -> None:
    np.savez(path, w1=params.w1, b1=params.b1, w2=params.w2, b2=params.b2)


def load_scorer(path: str) -> ScorerParams:
    data = np.load(path)
    return ScorerParams(w1=data["w1"], b1=data["b1"], w2=data["w2"],
                        b2=float(data["b2"]))


def _forward_logits(params: ScorerParams, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    hidden = np.maximum(0.0, x @ params.w1 + params.b1)
    return hidden @ params.w2 + params.b2, hidden


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def pair_input(vectorizer, pair: CandidatePair, w: int) -> np.ndarray:
    """Eq.-4 input for a canonical pair from unit-normalized mention vectors."""
    v_a = _unit(vectorizer.vector(pair.a, w))
    v_b = _unit(vectorizer.vector(pair.b, w))
    return pair_representation(v_a, v_b)


def score_pair(params: ScorerParams, vectorizer, pair: CandidatePair,
               w: int) -> ScoredPair:
    """Coreference probability for one candidate pair.

    The vectorizer supplies window-aware mention vectors (trained encoder or
    imported embeddings); orientation is canonical, so (a, b) and (b, a)
    score identically.
    """
    x = pair_input(vectorizer, pair, w)
    logit, _ = _forward_logits(params, x[None, :])
    return ScoredPair(pair=pair, probability=float(_sigmoid(logit)[0]))


def _bce_loss(logits: np.ndarray, labels: np.ndarray) -> np.ndarray:
    # log(1 + e^z) - y*z, computed stably
    return np.maximum(logits, 0.0) - logits * labels + np.log1p(np.exp(-np.abs(logits)))


def bce_loss_and_grad(params: ScorerParams, x: np.ndarray,
                      labels: np.ndarray) -> tuple[float, ScorerParams]:
    """Mean binary cross entropy over a batch, with analytic gradients.

    x is (batch, input_dim); the returned gradient reuses the ScorerParams
    container (same shapes as the parameters).
    """
    logits, hidden = _forward_logits(params, x)
    loss = float(_bce_loss(logits, labels).mean())

    d_logit = (_sigmoid(logits) - labels) / len(labels)  # (batch,)
    d_w2 = hidden.T @ d_logit
    d_b2 = float(d_logit.sum())
    d_hidden = np.outer(d_logit, params.w2)
    d_hidden[hidden <= 0.0] = 0.0
    d_w1 = x.T @ d_hidden
    d_b1 = d_hidden.sum(axis=0)
    return loss, ScorerParams(w1=d_w1, b1=d_b1, w2=d_w2, b2=d_b2)


def train_pairwise(records: Iterable[PairRecord], vectorizer,
                   config: PairwiseConfig) -> tuple[ScorerParams, list[float]]:
    """Mini-batch SGD on BCE over labeled candidate pairs.

    Pairs are deduplicated (one vote per canonical pair). Returns the final
    parameters and the per-epoch mean loss.
    """
    seen: dict[CandidatePair, int] = {}
    for rec in records:
        if rec.label is None:
            raise ValueError(f"unlabeled training pair ({rec.a}, {rec.b})")
        seen.setdefault(rec.pair(), rec.label)
    if not seen:
        raise ValueError("train_pairwise: empty training set")
    labels_list = list(seen.values())
    if len(set(labels_list)) == 1:
        warnings.warn(f"train_pairwise: single-class training set "
                      f"(all labels {labels_list[0]})", stacklevel=2)

    pairs = sorted(seen)
    x = np.stack([pair_input(vectorizer, p, config.window_w) for p in pairs])
    y = np.array([float(seen[p]) for p in pairs])

    params = init_scorer(config, mention_dim=x.shape[1] // 3)
    rng = np.random.default_rng([config.seed, 1])
    log: list[float] = []
    for _ in range(config.epochs):
        perm = rng.permutation(len(pairs))
        total = 0.0
        for lo in range(0, len(pairs), config.batch_size):
            idx = perm[lo:lo + config.batch_size]
            loss, grad = bce_loss_and_grad(params, x[idx], y[idx])
            total += loss * len(idx)
            params.w1 -= config.learning_rate * grad.w1
            params.b1 -= config.learning_rate * grad.b1
            params.w2 -= config.learning_rate * grad.w2
            params.b2 -= config.learning_rate * grad.b2
        log.append(total / len(pairs))
    return params, log


def oracle_score(pair: CandidatePair, gold: Partition) -> ScoredPair:
    """Probability 1.0 when both mentions share a gold cluster, else 0.0."""
    for m in (pair.a, pair.b):
        if m not in gold.assignment:
            raise KeyError(f"mention {m!r} has no gold label")
    same = gold.cluster_of(pair.a) == gold.cluster_of(pair.b)
    return ScoredPair(pair=pair, probability=1.0 if same else 0.0)


def oracle_scorer(gold: Partition) -> PairScorer:
    def scorer(a: str, b: str) -> float:
        return oracle_score(make_pair(a, b), gold).probability

    return scorer


def trained_scorer(params: ScorerParams, vectorizer, w: int) -> PairScorer:
    def scorer(a: str, b: str) -> float:
        return score_pair(params, vectorizer, make_pair(a, b), w).probability

    return scorer


class ExternalScoreTable:
    """Pair scores loaded from a pairs JSONL; gaps raise UnscoredPairError."""

    def __init__(self, records: Iterable[PairRecord]):
        self.scores: dict[CandidatePair, float] = {}
        for rec in records:
            if rec.score is None:
                raise ValueError(f"pair ({rec.a}, {rec.b}) has no score")
            if not 0.0 <= rec.score <= 1.0:
                raise ValueError(f"score out of range for ({rec.a}, {rec.b}): {rec.score}")
            pair = rec.pair()
            if pair in self.scores:
                raise ValueError(f"duplicate pair ({pair.a}, {pair.b})")
            self.scores[pair] = rec.score

    def __len__(self) -> int:
        return len(self.scores)

    def scorer(self) -> PairScorer:
        def scorer(a: str, b: str) -> float:
            pair = make_pair(a, b)
            try:
                return self.scores[pair]
            except KeyError:
                raise UnscoredPairError(pair.a, pair.b) from None

        return scorer


def load_external_scores(path_or_file) -> ExternalScoreTable:
    """Read a scored pairs JSONL into a score table."""
    return ExternalScoreTable(read_pairs_jsonl(path_or_file))

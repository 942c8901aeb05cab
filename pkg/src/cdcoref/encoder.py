"""Mention bi-encoder: featurization, embedding, centroids, loss, training.

Mentions are embedded independently so nearest-neighbor retrieval scales
linearly. A mention's vector is the concatenation of a start-boundary half
and an end-boundary half, each a linear projection of hashed sparse features
drawn from the mention span, its near-span neighborhood, and its sentence
window. Training pulls each mention toward the centroid of its gold cluster
and pushes it from in-batch and hard-negative cluster centroids via softmax
cross entropy over inner-product scores; centroids are recomputed from the
current parameters before every epoch and held constant within it.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus
from .errors import DimensionMismatchError

# Type alias: gold cluster id -> centroid vector.
CentroidTable = dict[str, np.ndarray]

_NEAR_SPAN = 3  # tokens on each side of the span used as boundary neighborhood


@dataclass(frozen=True)
class EncoderConfig:
    embedding_dim: int = 64
    feature_space_size: int = 2 ** 18
    window_w: int = 5
    learning_rate: float = 0.05
    epochs: int = 20
    batch_size: int = 32
    hard_negative_clusters: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.embedding_dim <= 0 or self.embedding_dim % 2:
            raise ValueError("embedding_dim must be a positive even integer")
        if self.feature_space_size <= 0:
            raise ValueError("feature_space_size must be positive")
        if self.window_w < 0:
            raise ValueError("window_w must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size <= 0 or self.hard_negative_clusters <= 0:
            raise ValueError("batch_size and hard_negative_clusters must be positive")


@dataclass
class EncoderParams:
    """Two projection matrices, one per boundary view, plus the init seed.

    Each matrix is feature_space_size x (embedding_dim / 2). The init seed is
    kept so parameters can be persisted as a delta against the reproducible
    initialization instead of a full dense dump.
    """

    start: np.ndarray
    end: np.ndarray
    init_seed: int

    @property
    def feature_space_size(self) -> int:
        return self.start.shape[0]

    @property
    def embedding_dim(self) -> int:
        return 2 * self.start.shape[1]

    def copy(self) -> "EncoderParams":
        return EncoderParams(self.start.copy(), self.end.copy(), self.init_seed)


@dataclass(frozen=True)
class FeatureVector:
    """Sparse hashed features, one map per boundary view."""

    mention_id: str
    start: dict[int, float]
    end: dict[int, float]


@dataclass(frozen=True)
class MentionEmbedding:
    mention_id: str
    vector: np.ndarray


@dataclass
class EncoderGrad:
    """Sparse gradient over EncoderParams: touched row -> row gradient."""

    start: dict[int, np.ndarray] = field(default_factory=dict)
    end: dict[int, np.ndarray] = field(default_factory=dict)


def _hash_feature(s: str, feature_space_size: int) -> int:
    digest = hashlib.blake2b(s.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") % feature_space_size


def _add(counts: dict[int, float], key: str, feature_space_size: int) -> None:
    idx = _hash_feature(key, feature_space_size)
    counts[idx] = counts.get(idx, 0.0) + 1.0


def _add_ngrams(counts: dict[int, float], prefix: str, tokens: list[str],
                feature_space_size: int) -> None:
    for tok in tokens:
        _add(counts, f"{prefix}={tok}", feature_space_size)
    for a, b in zip(tokens, tokens[1:]):
        _add(counts, f"{prefix}2={a}\x1f{b}", feature_space_size)


def _normalize(counts: dict[int, float]) -> dict[int, float]:
    norm = np.sqrt(sum(w * w for w in counts.values()))
    if norm == 0.0:
        return counts
    return {i: w / norm for i, w in counts.items()}


def featurize_mention(corpus: Corpus, mention_id: str, w: int,
                      feature_space_size: int) -> FeatureVector:
    """Deterministic sparse features for one mention.

    Both views carry the mention-token n-grams and the window-token n-grams
    (bucketed by mention sentence vs. context sentence); the start view adds
    the left boundary neighborhood, the end view adds the right. Each view is
    L2-normalized.
    """
    m = corpus.mention(mention_id)
    doc = corpus.document(m.doc_id)
    sent = doc.sentences[m.sentence_idx]
    span = list(sent.tokens[m.start_tok:m.end_tok + 1])
    left = list(sent.tokens[max(0, m.start_tok - _NEAR_SPAN):m.start_tok])
    right = list(sent.tokens[m.end_tok + 1:m.end_tok + 1 + _NEAR_SPAN])

    shared: dict[int, float] = {}
    _add_ngrams(shared, "m", span, feature_space_size)
    lo = max(0, m.sentence_idx - w)
    hi = min(len(doc.sentences) - 1, m.sentence_idx + w)
    for si in range(lo, hi + 1):
        bucket = "wm" if si == m.sentence_idx else "wc"
        _add_ngrams(shared, bucket, list(doc.sentences[si].tokens), feature_space_size)

    start = dict(shared)
    _add_ngrams(start, "l", left, feature_space_size)
    end = dict(shared)
    _add_ngrams(end, "r", right, feature_space_size)
    return FeatureVector(mention_id=mention_id,
                         start=_normalize(start), end=_normalize(end))


def init_params(config: EncoderConfig) -> EncoderParams:
    """Seeded uniform init in [-1/sqrt(F), +1/sqrt(F)], start matrix first."""
    rng = np.random.default_rng(config.seed)
    bound = 1.0 / np.sqrt(config.feature_space_size)
    half = config.embedding_dim // 2
    shape = (config.feature_space_size, half)
    start = rng.uniform(-bound, bound, shape)
    end = rng.uniform(-bound, bound, shape)
    return EncoderParams(start=start, end=end, init_seed=config.seed)


def save_params(params: EncoderParams, path: str) -> None:
    """Persist as (init seed, rows differing from the reproducible init)."""
    fresh = init_params(EncoderConfig(
        embedding_dim=params.embedding_dim,
        feature_space_size=params.feature_space_size,
        seed=params.init_seed,
    ))
    idx_start = np.flatnonzero((params.start != fresh.start).any(axis=1))
    idx_end = np.flatnonzero((params.end != fresh.end).any(axis=1))
    np.savez(
        path,
        feature_space_size=params.feature_space_size,
        embedding_dim=params.embedding_dim,
        init_seed=params.init_seed,
        idx_start=idx_start,
        rows_start=params.start[idx_start],
        idx_end=idx_end,
        rows_end=params.end[idx_end],
    )


def load_params(path: str) -> EncoderParams:
    data = np.load(path)
    params = init_params(EncoderConfig(
        embedding_dim=int(data["embedding_dim"]),
        feature_space_size=int(data["feature_space_size"]),
        seed=int(data["init_seed"]),
    ))
    params.start[data["idx_start"]] = data["rows_start"]
    params.end[data["idx_end"]] = data["rows_end"]
    return params


def embed_mention(params: EncoderParams, features: FeatureVector) -> MentionEmbedding:
    """Linear embedding: concat of (start features x start matrix, end dito)."""
    half = params.start.shape[1]
    vector = np.zeros(2 * half)
    if features.start:
        idx = list(features.start)
        _check_indices(idx, params.feature_space_size)
        weights = np.array([features.start[i] for i in idx])
        vector[:half] = weights @ params.start[idx]
    if features.end:
        idx = list(features.end)
        _check_indices(idx, params.feature_space_size)
        weights = np.array([features.end[i] for i in idx])
        vector[half:] = weights @ params.end[idx]
    return MentionEmbedding(mention_id=features.mention_id, vector=vector)


def _check_indices(indices: list[int], feature_space_size: int) -> None:
    if indices and (min(indices) < 0 or max(indices) >= feature_space_size):
        raise DimensionMismatchError(
            f"feature index out of range for feature space of {feature_space_size}"
        )


def compute_centroids(embeddings: list[MentionEmbedding], gold) -> CentroidTable:
    """Arithmetic mean of member embeddings per gold cluster (Partition)."""
    by_id = {e.mention_id: e.vector for e in embeddings}
    sums: dict[str, np.ndarray] = {}
    counts: dict[str, int] = {}
    for mention_id, cluster_id in gold.assignment.items():
        if mention_id not in by_id:
            raise KeyError(f"no embedding for gold mention {mention_id!r}")
        if cluster_id in sums:
            sums[cluster_id] = sums[cluster_id] + by_id[mention_id]
            counts[cluster_id] += 1
        else:
            sums[cluster_id] = by_id[mention_id].copy()
            counts[cluster_id] = 1
    return {c: sums[c] / counts[c] for c in sums}


def score_mention_cluster(embedding: MentionEmbedding, centroid: np.ndarray) -> float:
    """Inner product between a mention embedding and a cluster centroid."""
    vector = embedding.vector if isinstance(embedding, MentionEmbedding) else embedding
    if vector.shape != centroid.shape:
        raise DimensionMismatchError(
            f"embedding dim {vector.shape} != centroid dim {centroid.shape}"
        )
    return float(np.dot(vector, centroid))


def loss_and_grad(params: EncoderParams, features: FeatureVector,
                  true_cluster: str, negatives: set[str],
                  centroids: CentroidTable) -> tuple[float, EncoderGrad]:
    """Softmax cross entropy over centroid scores, with analytic gradient.

    loss = -s(m, c') + log sum_{c in B ∪ {c'}} exp(s(m, c)). Centroids are
    constants: the gradient flows only through the mention embedding (they
    are recomputed at epoch boundaries, not per step).
    """
    if true_cluster not in centroids:
        raise KeyError(f"unknown cluster id {true_cluster!r}")
    for c in negatives:
        if c not in centroids:
            raise KeyError(f"unknown cluster id {c!r}")

    embedding = embed_mention(params, features)
    candidates = [true_cluster] + sorted(set(negatives) - {true_cluster})
    matrix = np.stack([centroids[c] for c in candidates])
    scores = matrix @ embedding.vector

    shift = scores.max()
    exp = np.exp(scores - shift)
    log_z = shift + np.log(exp.sum())
    loss = float(-scores[0] + log_z)

    probs = exp / exp.sum()
    d_vector = probs @ matrix - matrix[0]

    half = params.start.shape[1]
    grad = EncoderGrad()
    d_start = d_vector[:half]
    d_end = d_vector[half:]
    for idx, weight in features.start.items():
        grad.start[idx] = weight * d_start
    for idx, weight in features.end.items():
        grad.end[idx] = weight * d_end
    return loss, grad


def select_hard_negatives(embedding: MentionEmbedding, true_cluster: str,
                          centroids: CentroidTable, n: int) -> set[str]:
    """The n highest-scoring clusters for this mention, excluding its own.

    Ties break lexicographically by cluster id; fewer than n clusters
    available means all of them are returned.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    scored = [(-score_mention_cluster(embedding, vec), cid)
              for cid, vec in centroids.items() if cid != true_cluster]
    scored.sort()
    return {cid for _, cid in scored[:n]}


def embed_all(corpus: Corpus, params: EncoderParams, w: int,
              mention_type: str | None = None) -> list[MentionEmbedding]:
    """Embed every (optionally type-filtered) mention in document order."""
    out = []
    for mention_id in corpus.mention_ids(mention_type):
        features = featurize_mention(corpus, mention_id, w, params.feature_space_size)
        out.append(embed_mention(params, features))
    return out


def train_encoder(corpus: Corpus, config: EncoderConfig,
                  mention_type: str | None = None) -> tuple[EncoderParams, list[float]]:
    """Epoch-based training loop over gold-labeled mentions.

    Per epoch: embed all mentions with the current parameters, recompute
    cluster centroids, pick each mention's hard-negative clusters, then run
    seeded mini-batch SGD where a sample's negative set is the other in-batch
    samples' true clusters plus its own hard negatives. Gradients within a
    batch are taken at the batch-start parameters and applied once, averaged.

    Returns the final parameters and the per-epoch mean loss.
    """
    mentions = [m for m in corpus.mentions(mention_type) if m.gold_cluster_id is not None]
    if not mentions:
        raise ValueError("train_encoder: corpus has no gold-labeled mentions")
    ids = [m.mention_id for m in mentions]
    true_of = {m.mention_id: m.gold_cluster_id for m in mentions}
    gold = corpus.gold_partition(mention_type)

    features = {
        mid: featurize_mention(corpus, mid, config.window_w, config.feature_space_size)
        for mid in ids
    }
    params = init_params(config)
    shuffle_rng = np.random.default_rng([config.seed, 1])
    log: list[float] = []

    for _ in range(config.epochs):
        embeddings = [embed_mention(params, features[mid]) for mid in ids]
        centroids = compute_centroids(embeddings, gold)
        hard = {
            e.mention_id: select_hard_negatives(
                e, true_of[e.mention_id], centroids, config.hard_negative_clusters)
            for e in embeddings
        }

        perm = shuffle_rng.permutation(len(ids))
        total_loss = 0.0
        for lo in range(0, len(ids), config.batch_size):
            batch = [ids[i] for i in perm[lo:lo + config.batch_size]]
            batch_clusters = {true_of[mid] for mid in batch}
            acc = EncoderGrad()
            for mid in batch:
                negatives = (batch_clusters - {true_of[mid]}) | hard[mid]
                loss, grad = loss_and_grad(params, features[mid], true_of[mid],
                                           negatives, centroids)
                total_loss += loss
                for idx, row in grad.start.items():
                    if idx in acc.start:
                        acc.start[idx] = acc.start[idx] + row
                    else:
                        acc.start[idx] = row
                for idx, row in grad.end.items():
                    if idx in acc.end:
                        acc.end[idx] = acc.end[idx] + row
                    else:
                        acc.end[idx] = row
            step = config.learning_rate / len(batch)
            for idx, row in acc.start.items():
                params.start[idx] -= step * row
            for idx, row in acc.end.items():
                params.end[idx] -= step * row
        log.append(total_loss / len(ids))
    return params, log


class MentionVectorizer:
    """Window-aware mention vectors from a trained encoder, with caching.

    vector(mention_id, w) featurizes the mention at radius w and embeds it
    with the fixed parameters. Pure per (mention, w); safe to share.
    """

    def __init__(self, corpus: Corpus, params: EncoderParams):
        self.corpus = corpus
        self.params = params
        self._cache: dict[tuple[str, int], np.ndarray] = {}

    def vector(self, mention_id: str, w: int) -> np.ndarray:
        key = (mention_id, w)
        if key not in self._cache:
            features = featurize_mention(self.corpus, mention_id, w,
                                         self.params.feature_space_size)
            self._cache[key] = embed_mention(self.params, features).vector
        return self._cache[key]


class ImportedVectorizer:
    """Mention vectors from an external embedding table (CEMB import).

    The window radius is ignored: imported vectors were produced with the
    exporter's own window baked in.
    """

    def __init__(self, table: dict[str, np.ndarray]):
        self.table = table

    def vector(self, mention_id: str, w: int) -> np.ndarray:
        try:
            return self.table[mention_id]
        except KeyError:
            raise KeyError(f"no imported embedding for mention {mention_id!r}") from None

import numpy as np
import pytest

from cdcoref.corpus import Corpus, Document, Mention, Sentence
from cdcoref.encoder import EncoderConfig, embed_all, train_encoder
from cdcoref.pairwise import PairwiseConfig
from cdcoref.retrieval import build_index
from cdcoref.synth import make_synthetic_corpus

# Tuned small-scale training settings used across integration tests: the
# module defaults are sized for real corpora and converge too slowly on the
# 200-mention synthetic benchmark.
ENCODER_CFG = EncoderConfig(feature_space_size=2 ** 16, learning_rate=8.0)
PAIRWISE_CFG = PairwiseConfig(learning_rate=1.0, epochs=30)


def build_corpus(docs: list[dict], corpus_id: str = "test") -> Corpus:
    """Compact corpus builder: sentences as token lists, mentions as tuples.

    Mention tuples are (mention_id, sentence_idx, start, end[, type[, gold]]).
    Optional per-doc "tags" parallels sentences with lists of tag lists.
    """
    documents = []
    for doc in docs:
        raw_tags = doc.get("tags")
        sentences = []
        for si, toks in enumerate(doc["sentences"]):
            tags = None
            if raw_tags is not None:
                tags = tuple(frozenset(t) for t in raw_tags[si])
            sentences.append(Sentence(tuple(toks), tags))
        mentions = []
        for entry in doc.get("mentions", []):
            mid, sent_idx, start, end = entry[:4]
            mtype = entry[4] if len(entry) > 4 else "event"
            gold = entry[5] if len(entry) > 5 else None
            mentions.append(Mention(mention_id=mid, doc_id=doc["doc_id"],
                                    sentence_idx=sent_idx, start_tok=start,
                                    end_tok=end, mention_type=mtype,
                                    gold_cluster_id=gold))
        documents.append(Document(doc_id=doc["doc_id"], topic_id=doc.get("topic_id"),
                                  sentences=tuple(sentences), mentions=tuple(mentions)))
    return Corpus(documents, corpus_id=corpus_id)


@pytest.fixture
def tiny_corpus() -> Corpus:
    return build_corpus([
        {
            "doc_id": "d1",
            "sentences": [
                ["A", "quake", "struck", "Chile", "today"],
                ["The", "tremor", "damaged", "houses"],
                ["Rescue", "teams", "arrived"],
            ],
            "tags": [
                [[], [], [], ["location"], ["time"]],
                [[], ["within_doc_coreference"], ["event"], []],
                [[], ["entity"], []],
            ],
            "mentions": [
                ("d1m1", 0, 1, 2, "event", "g1"),
                ("d1m2", 1, 2, 2, "event", "g1"),
                ("d1m3", 2, 1, 1, "entity", "e1"),
            ],
        },
        {
            "doc_id": "d2",
            "sentences": [
                ["An", "earthquake", "struck", "Chile"],
                ["Nobody", "was", "hurt"],
            ],
            "tags": [
                [[], [], [], ["location"]],
                [[], [], []],
            ],
            "mentions": [
                ("d2m1", 0, 2, 2, "event", "g1"),
                ("d2m2", 1, 0, 0, "entity", "e1"),
            ],
        },
    ])


@pytest.fixture(scope="session")
def synth_corpus() -> Corpus:
    return make_synthetic_corpus(seed=0)


@pytest.fixture(scope="session")
def trained_setup(synth_corpus):
    """Shared trained encoder + embeddings + index over the synthetic corpus."""
    params, log = train_encoder(synth_corpus, ENCODER_CFG, "event")
    embeddings = embed_all(synth_corpus, params, ENCODER_CFG.window_w, "event")
    index = build_index([(e.mention_id, e.vector) for e in embeddings])
    return {
        "corpus": synth_corpus,
        "gold": synth_corpus.gold_partition("event"),
        "params": params,
        "log": log,
        "embeddings": embeddings,
        "index": index,
    }


def random_partition_pair(rng: np.random.Generator, max_mentions: int = 12):
    n = int(rng.integers(1, max_mentions + 1))
    mentions = [f"m{i}" for i in range(n)]
    k_gold = int(rng.integers(1, n + 1))
    k_pred = int(rng.integers(1, n + 1))
    gold = {m: f"g{int(rng.integers(k_gold))}" for m in mentions}
    pred = {m: f"p{int(rng.integers(k_pred))}" for m in mentions}
    return gold, pred

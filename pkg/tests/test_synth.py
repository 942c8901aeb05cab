from cdcoref.corpus import serialize_corpus
from cdcoref.synth import make_synthetic_corpus


def test_shape_and_labels(synth_corpus):
    assert len(synth_corpus) == 20
    mentions = synth_corpus.mentions("event")
    assert len(mentions) == 200
    gold = synth_corpus.gold_partition("event")
    clusters = gold.clusters()
    assert len(clusters) == 40
    assert all(len(c) == 5 for c in clusters.values())
    assert synth_corpus.has_tags()


def test_deterministic():
    a = make_synthetic_corpus(seed=5, n_clusters=6, mentions_per_cluster=3, n_docs=4)
    b = make_synthetic_corpus(seed=5, n_clusters=6, mentions_per_cluster=3, n_docs=4)
    assert serialize_corpus(a) == serialize_corpus(b)
    c = make_synthetic_corpus(seed=6, n_clusters=6, mentions_per_cluster=3, n_docs=4)
    assert serialize_corpus(a) != serialize_corpus(c)


def test_twin_clusters_share_triggers(synth_corpus):
    def trigger(mention):
        doc = synth_corpus.document(mention.doc_id)
        return doc.sentences[mention.sentence_idx].tokens[mention.end_tok]

    by_cluster = {}
    for m in synth_corpus.mentions("event"):
        by_cluster.setdefault(m.gold_cluster_id, set()).add(trigger(m))
    # each cluster uses one trigger, shared with exactly its twin
    for cid, triggers in by_cluster.items():
        assert len(triggers) == 1
    for c in range(0, 40, 2):
        assert by_cluster[f"g{c:03d}"] == by_cluster[f"g{c + 1:03d}"]


def test_tagged_context_tokens_present(synth_corpus):
    seen = set()
    for doc in synth_corpus.documents:
        for sent in doc.sentences:
            for tags in sent.tags:
                seen |= tags
    assert seen == {"time", "location", "entity", "event", "within_doc_coreference"}

"""Corpus data model: documents, mentions, gold clusters, and token tags.

The on-disk format is JSONL with one document per line:

    {"doc_id": str, "topic_id": str|null,
     "sentences": [[str, ...], ...],
     "tags": [[[str, ...], ...], ...] | null,
     "mentions": [{"mention_id": str, "sentence_idx": int,
                   "start_tok": int, "end_tok": int,
                   "mention_type": "event"|"entity",
                   "gold_cluster_id": str|null}, ...]}

Token spans are inclusive on both ends. A partition is serialized as
{"assignment": {mention_id: cluster_id, ...}}.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from typing import IO, Iterable

from .errors import CorpusFormatError, UnknownMentionError

TOKEN_TAGS = frozenset({"time", "location", "within_doc_coreference", "entity", "event"})
MENTION_TYPES = frozenset({"event", "entity"})
MASK_TOKEN = "[MASK]"


@dataclass(frozen=True)
class Mention:
    """A token span in one sentence denoting an event trigger or entity."""

    mention_id: str
    doc_id: str
    sentence_idx: int
    start_tok: int
    end_tok: int  # inclusive
    mention_type: str
    gold_cluster_id: str | None = None

    def to_dict(self) -> dict:
        return {
            "mention_id": self.mention_id,
            "sentence_idx": self.sentence_idx,
            "start_tok": self.start_tok,
            "end_tok": self.end_tok,
            "mention_type": self.mention_type,
            "gold_cluster_id": self.gold_cluster_id,
        }


@dataclass(frozen=True)
class Sentence:
    """Tokens plus an optional parallel list of per-token tag sets."""

    tokens: tuple[str, ...]
    tags: tuple[frozenset[str], ...] | None = None

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class Document:
    doc_id: str
    sentences: tuple[Sentence, ...]
    mentions: tuple[Mention, ...]
    topic_id: str | None = None

    def to_dict(self) -> dict:
        tags = None
        if any(s.tags is not None for s in self.sentences):
            tags = [
                [sorted(ts) for ts in (s.tags or tuple(frozenset() for _ in s.tokens))]
                for s in self.sentences
            ]
        return {
            "doc_id": self.doc_id,
            "topic_id": self.topic_id,
            "sentences": [list(s.tokens) for s in self.sentences],
            "tags": tags,
            "mentions": [m.to_dict() for m in self.mentions],
        }


class Corpus:
    """An immutable collection of documents with a mention lookup table."""

    def __init__(self, documents: Iterable[Document], corpus_id: str = "corpus"):
        self.documents: tuple[Document, ...] = tuple(documents)
        self.corpus_id = corpus_id
        self._docs_by_id: dict[str, Document] = {}
        self._mentions: dict[str, Mention] = {}
        for doc in self.documents:
            if doc.doc_id in self._docs_by_id:
                raise CorpusFormatError("duplicate document id", doc_id=doc.doc_id)
            self._docs_by_id[doc.doc_id] = doc
            for m in doc.mentions:
                if m.mention_id in self._mentions:
                    raise CorpusFormatError(
                        f"duplicate mention_id {m.mention_id!r}", doc_id=doc.doc_id
                    )
                _check_span(doc, m)
                self._mentions[m.mention_id] = m

    def __len__(self) -> int:
        return len(self.documents)

    def document(self, doc_id: str) -> Document:
        return self._docs_by_id[doc_id]

    def mention(self, mention_id: str) -> Mention:
        try:
            return self._mentions[mention_id]
        except KeyError:
            raise UnknownMentionError(mention_id) from None

    def mentions(self, mention_type: str | None = None) -> list[Mention]:
        """All mentions in document order, optionally filtered by type."""
        out = []
        for doc in self.documents:
            for m in doc.mentions:
                if mention_type is None or m.mention_type == mention_type:
                    out.append(m)
        return out

    def mention_ids(self, mention_type: str | None = None) -> list[str]:
        return [m.mention_id for m in self.mentions(mention_type)]

    def gold_partition(self, mention_type: str | None = None) -> "Partition":
        """Partition induced by gold_cluster_id; unlabeled mentions are skipped."""
        assignment = {}
        for m in self.mentions(mention_type):
            if m.gold_cluster_id is not None:
                assignment[m.mention_id] = m.gold_cluster_id
        return Partition(assignment)

    def has_tags(self) -> bool:
        return any(s.tags is not None for d in self.documents for s in d.sentences)


@dataclass(frozen=True)
class Partition:
    """Assignment of mention ids to cluster ids."""

    assignment: dict[str, str]

    def clusters(self) -> dict[str, frozenset[str]]:
        out: dict[str, set[str]] = {}
        for m, c in self.assignment.items():
            out.setdefault(c, set()).add(m)
        return {c: frozenset(ms) for c, ms in out.items()}

    def cluster_of(self, mention_id: str) -> str:
        return self.assignment[mention_id]

    def mention_ids(self) -> frozenset[str]:
        return frozenset(self.assignment)

    def to_json(self) -> str:
        return json.dumps({"assignment": dict(sorted(self.assignment.items()))},
                          indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Partition":
        data = json.loads(text)
        if not isinstance(data, dict) or "assignment" not in data:
            raise CorpusFormatError("partition JSON must contain an 'assignment' object")
        return cls({str(k): str(v) for k, v in data["assignment"].items()})


def _check_span(doc: Document, m: Mention) -> None:
    if m.mention_type not in MENTION_TYPES:
        raise CorpusFormatError(
            f"mention {m.mention_id!r} has invalid mention_type {m.mention_type!r}",
            doc_id=doc.doc_id,
        )
    if not 0 <= m.sentence_idx < len(doc.sentences):
        raise CorpusFormatError(
            f"mention {m.mention_id!r}: sentence_idx {m.sentence_idx} out of range",
            doc_id=doc.doc_id,
        )
    if m.start_tok > m.end_tok:
        raise CorpusFormatError(
            f"mention {m.mention_id!r}: start_tok > end_tok", doc_id=doc.doc_id
        )
    n = len(doc.sentences[m.sentence_idx])
    if m.start_tok < 0 or m.end_tok >= n:
        raise CorpusFormatError(
            f"mention {m.mention_id!r}: span out of bounds "
            f"({m.start_tok}, {m.end_tok}) in {n}-token sentence",
            doc_id=doc.doc_id,
        )


def _parse_document(record: dict, line: int) -> Document:
    try:
        doc_id = record["doc_id"]
        raw_sentences = record["sentences"]
        raw_mentions = record.get("mentions", [])
    except (KeyError, TypeError) as exc:
        raise CorpusFormatError(f"malformed record: missing {exc}", line=line) from None
    if not isinstance(doc_id, str) or not isinstance(raw_sentences, list):
        raise CorpusFormatError("malformed record: bad doc_id/sentences", line=line)

    raw_tags = record.get("tags")
    if raw_tags is not None and len(raw_tags) != len(raw_sentences):
        raise CorpusFormatError(
            "tags must parallel sentences", doc_id=doc_id, line=line
        )

    sentences = []
    for si, toks in enumerate(raw_sentences):
        if not isinstance(toks, list) or not all(isinstance(t, str) for t in toks):
            raise CorpusFormatError(
                f"sentence {si} is not a list of tokens", doc_id=doc_id, line=line
            )
        tags = None
        if raw_tags is not None:
            sent_tags = raw_tags[si]
            if len(sent_tags) != len(toks):
                raise CorpusFormatError(
                    f"sentence {si}: tags length {len(sent_tags)} != {len(toks)} tokens",
                    doc_id=doc_id,
                    line=line,
                )
            tags = []
            for token_tags in sent_tags:
                bad = set(token_tags) - TOKEN_TAGS
                if bad:
                    raise CorpusFormatError(
                        f"unknown token tag(s) {sorted(bad)}", doc_id=doc_id, line=line
                    )
                tags.append(frozenset(token_tags))
            tags = tuple(tags)
        sentences.append(Sentence(tuple(toks), tags))

    mentions = []
    for raw in raw_mentions:
        try:
            mentions.append(
                Mention(
                    mention_id=str(raw["mention_id"]),
                    doc_id=doc_id,
                    sentence_idx=int(raw["sentence_idx"]),
                    start_tok=int(raw["start_tok"]),
                    end_tok=int(raw["end_tok"]),
                    mention_type=str(raw["mention_type"]),
                    gold_cluster_id=(
                        None if raw.get("gold_cluster_id") is None
                        else str(raw["gold_cluster_id"])
                    ),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CorpusFormatError(
                f"malformed mention record: {exc}", doc_id=doc_id, line=line
            ) from None
    return Document(doc_id=doc_id, topic_id=record.get("topic_id"),
                    sentences=tuple(sentences), mentions=tuple(mentions))


def parse_corpus(stream: IO[bytes] | IO[str] | bytes | str, corpus_id: str = "corpus") -> Corpus:
    """Parse a Corpus from JSONL (one document per line).

    Raises CorpusFormatError with a document/line locus on malformed records,
    out-of-bounds spans, and duplicate document or mention ids.
    """
    if isinstance(stream, bytes):
        stream = io.StringIO(stream.decode("utf-8"))
    elif isinstance(stream, str):
        stream = io.StringIO(stream)
    elif isinstance(stream, io.BufferedIOBase) or (
        hasattr(stream, "mode") and "b" in getattr(stream, "mode", "")
    ):
        stream = io.TextIOWrapper(stream, encoding="utf-8")

    documents = []
    for line_no, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(f"malformed JSON: {exc.msg}", line=line_no) from None
        documents.append(_parse_document(record, line_no))
    return Corpus(documents, corpus_id=corpus_id)


def load_corpus(path: str, corpus_id: str | None = None) -> Corpus:
    import os

    if corpus_id is None:
        corpus_id = os.path.splitext(os.path.basename(path))[0]
    with open(path, "rb") as f:
        return parse_corpus(f, corpus_id=corpus_id)


def serialize_corpus(corpus: Corpus) -> str:
    """Inverse of parse_corpus: one JSON document per line."""
    return "".join(json.dumps(doc.to_dict()) + "\n" for doc in corpus.documents)


def save_corpus(corpus: Corpus, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(serialize_corpus(corpus))


def context_window(corpus: Corpus, mention_id: str, w: int) -> tuple[list[str], int, int]:
    """Tokens of sentences i-w..i+w around a mention, clipped to the document.

    Returns (tokens, span_start, span_end) where span_start/span_end are the
    mention's boundary positions within the returned token list (inclusive).
    """
    if w < 0:
        raise ValueError("window radius must be >= 0")
    m = corpus.mention(mention_id)
    doc = corpus.document(m.doc_id)
    lo = max(0, m.sentence_idx - w)
    hi = min(len(doc.sentences) - 1, m.sentence_idx + w)
    tokens: list[str] = []
    offset = 0
    span_start = span_end = -1
    for si in range(lo, hi + 1):
        sent = doc.sentences[si]
        if si == m.sentence_idx:
            span_start = offset + m.start_tok
            span_end = offset + m.end_tok
        tokens.extend(sent.tokens)
        offset += len(sent)
    return tokens, span_start, span_end


def merge_corpora(corpora: list[Corpus], corpus_id: str = "merged") -> Corpus:
    """Union of all documents and mentions, namespaced by source corpus_id.

    Doc ids, mention ids, and gold cluster ids become "<corpus_id>/<original>",
    so merging never collides ids and never joins gold clusters across corpora.
    """
    if not corpora:
        raise ValueError("merge_corpora: empty input list")
    documents = []
    for corpus in corpora:
        prefix = corpus.corpus_id
        for doc in corpus.documents:
            new_doc_id = f"{prefix}/{doc.doc_id}"
            mentions = tuple(
                Mention(
                    mention_id=f"{prefix}/{m.mention_id}",
                    doc_id=new_doc_id,
                    sentence_idx=m.sentence_idx,
                    start_tok=m.start_tok,
                    end_tok=m.end_tok,
                    mention_type=m.mention_type,
                    gold_cluster_id=(
                        None if m.gold_cluster_id is None
                        else f"{prefix}/{m.gold_cluster_id}"
                    ),
                )
                for m in doc.mentions
            )
            documents.append(
                Document(doc_id=new_doc_id, topic_id=doc.topic_id,
                         sentences=doc.sentences, mentions=mentions)
            )
    return Corpus(documents, corpus_id=corpus_id)


def mask_tokens(corpus: Corpus, tags_to_mask: set[str] | frozenset[str], w: int) -> Corpus:
    """Replace tagged tokens inside mention context windows with MASK_TOKEN.

    A token is masked iff it carries one of ``tags_to_mask``, lies within the
    radius-w sentence window of at least one mention, and lies in no mention's
    own sentence. Token counts, spans, and gold labels are never altered; the
    input corpus is left unmodified. With an empty tag set this is the identity.
    """
    bad = set(tags_to_mask) - TOKEN_TAGS
    if bad:
        raise ValueError(f"unknown token tag(s): {sorted(bad)}")
    tags_to_mask = frozenset(tags_to_mask)
    if not tags_to_mask:
        return Corpus(corpus.documents, corpus_id=corpus.corpus_id)
    if not corpus.has_tags():
        raise CorpusFormatError("masking requested but corpus has no token tags")

    documents = []
    for doc in corpus.documents:
        mention_sents = {m.sentence_idx for m in doc.mentions}
        in_window = set()
        for m in doc.mentions:
            lo = max(0, m.sentence_idx - w)
            hi = min(len(doc.sentences) - 1, m.sentence_idx + w)
            in_window.update(range(lo, hi + 1))
        maskable = in_window - mention_sents

        sentences = []
        for si, sent in enumerate(doc.sentences):
            if si not in maskable or sent.tags is None:
                sentences.append(sent)
                continue
            tokens = tuple(
                MASK_TOKEN if (tags & tags_to_mask) else tok
                for tok, tags in zip(sent.tokens, sent.tags)
            )
            sentences.append(Sentence(tokens, sent.tags))
        documents.append(
            Document(doc_id=doc.doc_id, topic_id=doc.topic_id,
                     sentences=tuple(sentences), mentions=doc.mentions)
        )
    return Corpus(documents, corpus_id=corpus.corpus_id)

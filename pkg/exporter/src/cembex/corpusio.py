"""Minimal reader for the corpus JSONL interchange format.

One JSON document per line: doc_id, sentences (token lists), mentions with
inclusive token spans. Only the fields the exporter needs are validated;
full validation is the consumer pipeline's job.
"""

from __future__ import annotations

import json
from dataclasses import dataclass


class CorpusReadError(Exception):
    pass


@dataclass(frozen=True)
class MentionRef:
    mention_id: str
    doc_id: str
    sentence_idx: int
    start_tok: int
    end_tok: int


@dataclass
class SimpleCorpus:
    sentences_by_doc: dict[str, list[list[str]]]
    mentions: list[MentionRef]  # corpus order

    def window(self, mention: MentionRef, w: int) -> tuple[list[str], int, int]:
        """Window words around the mention and its word span within them."""
        sentences = self.sentences_by_doc[mention.doc_id]
        lo = max(0, mention.sentence_idx - w)
        hi = min(len(sentences) - 1, mention.sentence_idx + w)
        words: list[str] = []
        span_start = span_end = -1
        for si in range(lo, hi + 1):
            if si == mention.sentence_idx:
                span_start = len(words) + mention.start_tok
                span_end = len(words) + mention.end_tok
            words.extend(sentences[si])
        return words, span_start, span_end


def load_corpus(path: str) -> SimpleCorpus:
    sentences_by_doc: dict[str, list[list[str]]] = {}
    mentions: list[MentionRef] = []
    seen_ids: set[str] = set()
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                doc_id = record["doc_id"]
                sentences = [list(map(str, s)) for s in record["sentences"]]
                raw_mentions = record.get("mentions", [])
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise CorpusReadError(f"line {line_no}: bad document record ({exc})")
            if doc_id in sentences_by_doc:
                raise CorpusReadError(f"line {line_no}: duplicate doc_id {doc_id!r}")
            sentences_by_doc[doc_id] = sentences
            for raw in raw_mentions:
                try:
                    mention = MentionRef(
                        mention_id=str(raw["mention_id"]),
                        doc_id=doc_id,
                        sentence_idx=int(raw["sentence_idx"]),
                        start_tok=int(raw["start_tok"]),
                        end_tok=int(raw["end_tok"]),
                    )
                except (KeyError, TypeError, ValueError) as exc:
                    raise CorpusReadError(f"line {line_no}: bad mention ({exc})")
                if mention.mention_id in seen_ids:
                    raise CorpusReadError(
                        f"line {line_no}: duplicate mention_id {mention.mention_id!r}")
                sent_count = len(sentences)
                if not 0 <= mention.sentence_idx < sent_count:
                    raise CorpusReadError(
                        f"line {line_no}: mention {mention.mention_id!r} "
                        f"sentence_idx out of range")
                tokens = sentences[mention.sentence_idx]
                if not (0 <= mention.start_tok <= mention.end_tok < len(tokens)):
                    raise CorpusReadError(
                        f"line {line_no}: mention {mention.mention_id!r} "
                        f"span out of bounds")
                seen_ids.add(mention.mention_id)
                mentions.append(mention)
    return SimpleCorpus(sentences_by_doc=sentences_by_doc, mentions=mentions)

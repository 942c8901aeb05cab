"""Mention embedding export from frozen pretrained language models.

For every mention, the sentences within a configurable window radius are fed
through the model in split-word mode; the mention's vector is the
concatenation of the hidden states at its boundary sub-tokens (first
sub-token of the first span word, last sub-token of the last), so the output
dimension is twice the model's hidden size. Weights stay frozen; there is no
training here. Records are written in corpus order, one per mention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from .cemb import write_cemb
from .corpusio import load_corpus


class ModelResolutionError(Exception):
    pass


class AlignmentError(Exception):
    """Some mention spans could not be mapped to sub-token positions."""

    def __init__(self, failures: list[tuple[str, str]]):
        lines = "; ".join(f"{mid}: {why}" for mid, why in failures[:10])
        more = "" if len(failures) <= 10 else f" (+{len(failures) - 10} more)"
        super().__init__(f"{len(failures)} mention(s) failed alignment: {lines}{more}")
        self.failures = failures


@dataclass
class ExportConfig:
    corpus_path: str
    model_id: str
    output_path: str
    window_w: int = 5
    device: str = "cpu"
    batch_size: int = 16
    deterministic: bool = True

    def __post_init__(self):
        if self.window_w < 0:
            raise ValueError("window_w must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


@dataclass
class ExportResult:
    output_path: str
    count: int
    dim: int
    hidden_size: int


def _load_model(model_id: str, device: str):
    from transformers import AutoModel, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(model_id)
        model = AutoModel.from_pretrained(model_id)
    except (OSError, ValueError, EnvironmentError) as exc:
        raise ModelResolutionError(f"cannot resolve model {model_id!r}: {exc}") from exc
    model.to(torch.device(device))
    model.eval()
    return tokenizer, model


def _max_length(tokenizer, model) -> int:
    limit = getattr(tokenizer, "model_max_length", None)
    if limit is None or limit > 1_000_000:
        limit = getattr(model.config, "max_position_embeddings", 512)
    return int(limit)


def _boundary_positions(word_ids: list[int | None], span_start: int,
                        span_end: int) -> tuple[int, int] | str:
    first = last = None
    for pos, wid in enumerate(word_ids):
        if wid is None:
            continue
        if wid == span_start and first is None:
            first = pos
        if wid == span_end:
            last = pos
    if first is None or last is None:
        return "span sub-tokens missing (truncated or empty boundary word)"
    return first, last


def export_embeddings(config: ExportConfig) -> ExportResult:
    """Encode every corpus mention and write one CEMB record each.

    The record count always equals the corpus mention count: any mention
    whose boundary words cannot be aligned to sub-token positions makes the
    whole export fail with a per-mention report.
    """
    corpus = load_corpus(config.corpus_path)
    tokenizer, model = _load_model(config.model_id, config.device)
    if config.deterministic:
        torch.manual_seed(0)
    max_length = _max_length(tokenizer, model)
    hidden_size = int(model.config.hidden_size)

    vectors: list[tuple[str, np.ndarray]] = []
    failures: list[tuple[str, str]] = []
    mentions = corpus.mentions
    for lo in range(0, len(mentions), config.batch_size):
        batch = mentions[lo:lo + config.batch_size]
        windows = []
        spans = []
        for mention in batch:
            words, span_start, span_end = corpus.window(mention, config.window_w)
            windows.append(words)
            spans.append((span_start, span_end))
        encoded = tokenizer(windows, is_split_into_words=True, padding=True,
                            truncation=True, max_length=max_length,
                            return_tensors="pt")
        encoded = encoded.to(model.device)
        with torch.no_grad():
            hidden = model(**encoded).last_hidden_state
        for i, mention in enumerate(batch):
            word_ids = encoded.word_ids(i)
            located = _boundary_positions(word_ids, *spans[i])
            if isinstance(located, str):
                failures.append((mention.mention_id, located))
                continue
            first, last = located
            vector = torch.cat([hidden[i, first], hidden[i, last]])
            vectors.append((mention.mention_id,
                            vector.cpu().numpy().astype(np.float32)))
    if failures:
        raise AlignmentError(failures)

    dim = 2 * hidden_size
    count = write_cemb(config.output_path, vectors, dim=dim)
    return ExportResult(output_path=config.output_path, count=count, dim=dim,
                        hidden_size=hidden_size)

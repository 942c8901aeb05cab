import json
import os

import pytest
import torch

# keep the test hermetic: never touch the hub
os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")

WORDS = ["a", "quake", "##shock", "struck", "the", "city", "on", "tuesday",
         "rescue", "teams", "arrived", "hit", "village", "pad"]
SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]

HIDDEN_SIZE = 16
MAX_POSITIONS = 48


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory) -> str:
    """A wordpiece tokenizer + randomly initialized tiny BERT, saved locally."""
    from tokenizers import Tokenizer
    from tokenizers.models import WordPiece
    from tokenizers.pre_tokenizers import WhitespaceSplit
    from tokenizers.processors import TemplateProcessing
    from transformers import BertConfig, BertModel, PreTrainedTokenizerFast

    directory = str(tmp_path_factory.mktemp("tiny-model"))
    vocab = {w: i for i, w in enumerate(SPECIALS + WORDS)}
    tok = Tokenizer(WordPiece(vocab, unk_token="[UNK]", max_input_chars_per_word=64))
    tok.pre_tokenizer = WhitespaceSplit()
    tok.post_processor = TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B [SEP]",
        special_tokens=[("[CLS]", vocab["[CLS]"]), ("[SEP]", vocab["[SEP]"])],
    )
    fast = PreTrainedTokenizerFast(
        tokenizer_object=tok, unk_token="[UNK]", pad_token="[PAD]",
        cls_token="[CLS]", sep_token="[SEP]", mask_token="[MASK]",
        model_max_length=MAX_POSITIONS,
    )
    fast.save_pretrained(directory)

    torch.manual_seed(1234)
    config = BertConfig(vocab_size=len(vocab), hidden_size=HIDDEN_SIZE,
                        num_hidden_layers=1, num_attention_heads=2,
                        intermediate_size=32,
                        max_position_embeddings=MAX_POSITIONS)
    BertModel(config).save_pretrained(directory)
    return directory


def write_corpus(path: str, docs: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for doc in docs:
            f.write(json.dumps(doc) + "\n")


@pytest.fixture
def corpus_path(tmp_path) -> str:
    """Five mentions over two documents, one with a sub-token-splitting span."""
    docs = [
        {
            "doc_id": "d1", "topic_id": None,
            "sentences": [
                ["a", "quakeshock", "struck", "the", "city"],
                ["rescue", "teams", "arrived", "on", "tuesday"],
            ],
            "tags": None,
            "mentions": [
                {"mention_id": "m1", "sentence_idx": 0, "start_tok": 1,
                 "end_tok": 1, "mention_type": "event", "gold_cluster_id": "g1"},
                {"mention_id": "m2", "sentence_idx": 0, "start_tok": 2,
                 "end_tok": 3, "mention_type": "event", "gold_cluster_id": "g1"},
                {"mention_id": "m3", "sentence_idx": 1, "start_tok": 0,
                 "end_tok": 1, "mention_type": "entity", "gold_cluster_id": None},
            ],
        },
        {
            "doc_id": "d2", "topic_id": "t",
            "sentences": [
                ["the", "quake", "hit", "a", "village"],
            ],
            "tags": None,
            "mentions": [
                {"mention_id": "m4", "sentence_idx": 0, "start_tok": 1,
                 "end_tok": 1, "mention_type": "event", "gold_cluster_id": "g1"},
                {"mention_id": "m5", "sentence_idx": 0, "start_tok": 4,
                 "end_tok": 4, "mention_type": "entity", "gold_cluster_id": None},
            ],
        },
    ]
    path = str(tmp_path / "corpus.jsonl")
    write_corpus(path, docs)
    return path

"""End-to-end orchestration: staged runs, oracle studies, and ablations.

Every stage reads its inputs from and writes its outputs to the run
directory, so the monolithic pipeline command and isolated stage commands
produce bit-identical artifacts. The single global seed derives the encoder
and pairwise seeds by fixed offsets; no stage consults the wall clock, so a
(config, seed) pair fully determines every byte written.

Run directory layout:

    config.json                          resolved config echo
    encoder_params.npz, encoder_log.json
    scorer_params.npz, pairwise_log.json
    train/embeddings.cemb, index.json, pairs_train.jsonl
    eval/<corpus>/embeddings.cemb, index.json, pairs_infer.jsonl,
                  pairs_scored.jsonl, partition.json, trace.jsonl,
                  report.json, report.txt
    report.json, report.txt              per-corpus + harmonic-mean summary
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import clustering, encoder, metrics, pairwise, retrieval
from .corpus import Corpus, Partition, load_corpus, mask_tokens, merge_corpora
from .embedfile import read_embeddings, write_embeddings
from .encoder import EncoderConfig, ImportedVectorizer, MentionVectorizer
from .errors import ConfigError, CorefError, StageError
from .pairwise import PairwiseConfig, ScoredPair
from .metrics import MetricReport, MetricTriple

_ENCODER_SEED_OFFSET = 1
_PAIRWISE_SEED_OFFSET = 2


@dataclass
class PipelineConfig:
    train_corpora: list[str]
    test_corpora: list[str]
    dev_corpora: list[str] = field(default_factory=list)
    mention_type: str = "event"
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    pairwise: PairwiseConfig = field(default_factory=PairwiseConfig)
    train_k: int | None = None  # overrides pairwise.train_k when set
    infer_k: int | None = None
    mask_tag_sets: list[list[str]] = field(default_factory=list)
    window_sweep: list[int] = field(default_factory=list)
    embeddings: dict[str, str] = field(default_factory=dict)  # corpus id -> CEMB path
    seed: int = 0
    out_dir: str = "run"

    def validate(self) -> None:
        if not self.train_corpora:
            raise ConfigError("no train corpora configured")
        if not self.test_corpora:
            raise ConfigError("no test corpora configured")
        for path in [*self.train_corpora, *self.dev_corpora, *self.test_corpora]:
            if not os.path.exists(path):
                raise ConfigError(f"corpus file not found: {path}")
        for cid, path in self.embeddings.items():
            if not os.path.exists(path):
                raise ConfigError(f"embedding file not found for {cid!r}: {path}")
        if self.mention_type not in ("event", "entity"):
            raise ConfigError(f"bad mention_type: {self.mention_type!r}")
        if self.train_k is not None and self.train_k < 1:
            raise ConfigError("train_k must be positive")
        if self.infer_k is not None and self.infer_k < 1:
            raise ConfigError("infer_k must be positive")
        for w in self.window_sweep:
            if w < 0:
                raise ConfigError("window sweep values must be >= 0")
        if self.embeddings and len(self.train_corpora) > 1:
            raise ConfigError("embedding import supports a single train corpus only")

    # Per-stage configs: the global seed wins over the nested seed fields.
    def encoder_config(self) -> EncoderConfig:
        return dataclasses.replace(self.encoder, seed=self.seed + _ENCODER_SEED_OFFSET)

    def pairwise_config(self) -> PairwiseConfig:
        cfg = dataclasses.replace(self.pairwise, seed=self.seed + _PAIRWISE_SEED_OFFSET)
        if self.train_k is not None:
            cfg = dataclasses.replace(cfg, train_k=self.train_k)
        if self.infer_k is not None:
            cfg = dataclasses.replace(cfg, infer_k=self.infer_k)
        return cfg

    def to_dict(self) -> dict:
        return {
            "corpora": {"train": self.train_corpora, "dev": self.dev_corpora,
                        "test": self.test_corpora},
            "mention_type": self.mention_type,
            "encoder": dataclasses.asdict(self.encoder),
            "pairwise": dataclasses.asdict(self.pairwise),
            "train_k": self.train_k,
            "infer_k": self.infer_k,
            "ablations": {"mask_tag_sets": self.mask_tag_sets,
                          "window_sweep": self.window_sweep},
            "embeddings": self.embeddings,
            "seed": self.seed,
            "out_dir": self.out_dir,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        corpora = raw.get("corpora", {})
        ablations = raw.get("ablations", {})
        try:
            return cls(
                train_corpora=list(corpora.get("train", [])),
                dev_corpora=list(corpora.get("dev", [])),
                test_corpora=list(corpora.get("test", [])),
                mention_type=raw.get("mention_type", "event"),
                encoder=EncoderConfig(**raw.get("encoder", {})),
                pairwise=PairwiseConfig(**raw.get("pairwise", {})),
                train_k=raw.get("train_k"),
                infer_k=raw.get("infer_k"),
                mask_tag_sets=[list(s) for s in ablations.get("mask_tag_sets", [])],
                window_sweep=list(ablations.get("window_sweep", [])),
                embeddings=dict(raw.get("embeddings", {})),
                seed=int(raw.get("seed", 0)),
                out_dir=raw.get("out_dir", "run"),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad config: {exc}") from None

    @classmethod
    def from_json_file(cls, path: str) -> "PipelineConfig":
        with open(path, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


def _write_json(path: str, payload) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _eval_dir(config: PipelineConfig, corpus_id: str) -> str:
    return os.path.join(config.out_dir, "eval", corpus_id)


def _prepare_dirs(config: PipelineConfig) -> None:
    os.makedirs(os.path.join(config.out_dir, "train"), exist_ok=True)
    for corpus in _load_eval_corpora(config):
        os.makedirs(_eval_dir(config, corpus.corpus_id), exist_ok=True)
    _write_json(os.path.join(config.out_dir, "config.json"), config.to_dict())


def _load_train_corpus(config: PipelineConfig) -> Corpus:
    corpora = [load_corpus(p) for p in config.train_corpora]
    if len(corpora) == 1:
        return corpora[0]
    return merge_corpora(corpora)


def _load_eval_corpora(config: PipelineConfig) -> list[Corpus]:
    return [load_corpus(p) for p in config.test_corpora]


def _load_encoder_params(config: PipelineConfig) -> encoder.EncoderParams:
    path = os.path.join(config.out_dir, "encoder_params.npz")
    if not os.path.exists(path):
        raise CorefError(f"encoder parameters not found at {path}; "
                         "run train-encoder first")
    return encoder.load_params(path)


def _vectorizer(config: PipelineConfig, corpus: Corpus):
    """Window-aware mention vectors: trained encoder or imported table."""
    if corpus.corpus_id in config.embeddings:
        table = {mid: np.asarray(vec, dtype=np.float64)
                 for mid, vec in read_embeddings(config.embeddings[corpus.corpus_id])}
        return ImportedVectorizer(table)
    return MentionVectorizer(corpus, _load_encoder_params(config))


# ---------------------------------------------------------------- stages


def stage_train_encoder(config: PipelineConfig) -> None:
    """Train the bi-encoder on the (merged) train corpus; save params + log."""
    train_corpus = _load_train_corpus(config)
    if train_corpus.corpus_id in config.embeddings:
        return  # imported embeddings replace the built-in encoder
    params, log = encoder.train_encoder(train_corpus, config.encoder_config(),
                                        config.mention_type)
    encoder.save_params(params, os.path.join(config.out_dir, "encoder_params.npz"))
    _write_json(os.path.join(config.out_dir, "encoder_log.json"),
                {"epoch_mean_loss": log})


def _embed_corpus_to(config: PipelineConfig, corpus: Corpus, out_path: str) -> None:
    wanted = corpus.mention_ids(config.mention_type)
    if corpus.corpus_id in config.embeddings:
        table = dict(read_embeddings(config.embeddings[corpus.corpus_id]))
        missing = [m for m in wanted if m not in table]
        if missing:
            raise StageError("embed", f"imported embeddings missing {len(missing)} "
                                      f"mention(s), e.g. {missing[:3]}")
        write_embeddings(out_path, [(m, table[m]) for m in wanted])
        return
    params = _load_encoder_params(config)
    embeddings = encoder.embed_all(corpus, params, config.encoder.window_w,
                                   config.mention_type)
    write_embeddings(out_path, [(e.mention_id, e.vector) for e in embeddings],
                     dim=params.embedding_dim)


def stage_embed(config: PipelineConfig) -> None:
    """Write one CEMB file per corpus (train + each test corpus)."""
    _embed_corpus_to(config, _load_train_corpus(config),
                     os.path.join(config.out_dir, "train", "embeddings.cemb"))
    for corpus in _load_eval_corpora(config):
        _embed_corpus_to(config, corpus,
                         os.path.join(_eval_dir(config, corpus.corpus_id),
                                      "embeddings.cemb"))


def stage_build_index(config: PipelineConfig) -> None:
    """Validate each CEMB file and stamp its index metadata."""
    targets = [os.path.join(config.out_dir, "train")]
    targets += [_eval_dir(config, c.corpus_id) for c in _load_eval_corpora(config)]
    for directory in targets:
        cemb = os.path.join(directory, "embeddings.cemb")
        if not os.path.exists(cemb):
            raise StageError("build-index", f"missing embedding file {cemb}")
        index = retrieval.build_index(cemb)
        _write_json(os.path.join(directory, "index.json"),
                    {"count": len(index), "dim": index.dim,
                     "source": "embeddings.cemb"})


def stage_gen_pairs(config: PipelineConfig) -> None:
    """Candidate pairs: labeled at train_k for training, raw at infer_k per test."""
    pw = config.pairwise_config()
    train_corpus = _load_train_corpus(config)
    index = retrieval.build_index(
        os.path.join(config.out_dir, "train", "embeddings.cemb"))
    pairs = retrieval.generate_pairs(train_corpus, index, pw.train_k,
                                     config.mention_type)
    labeled = retrieval.label_pairs(pairs, train_corpus.gold_partition(config.mention_type))
    retrieval.write_pairs_jsonl(
        labeled, os.path.join(config.out_dir, "train", "pairs_train.jsonl"))

    for corpus in _load_eval_corpora(config):
        directory = _eval_dir(config, corpus.corpus_id)
        index = retrieval.build_index(os.path.join(directory, "embeddings.cemb"))
        pairs = retrieval.generate_pairs(corpus, index, pw.infer_k,
                                         config.mention_type)
        records = [retrieval.PairRecord(a=p.a, b=p.b) for p in sorted(pairs)]
        retrieval.write_pairs_jsonl(
            records, os.path.join(directory, "pairs_infer.jsonl"))


def stage_train_pairwise(config: PipelineConfig) -> None:
    train_corpus = _load_train_corpus(config)
    records = retrieval.read_pairs_jsonl(
        os.path.join(config.out_dir, "train", "pairs_train.jsonl"))
    params, log = pairwise.train_pairwise(records, _vectorizer(config, train_corpus),
                                          config.pairwise_config())
    pairwise.save_scorer(params, os.path.join(config.out_dir, "scorer_params.npz"))
    _write_json(os.path.join(config.out_dir, "pairwise_log.json"),
                {"epoch_mean_loss": log})


def stage_score_pairs(config: PipelineConfig) -> None:
    pw = config.pairwise_config()
    params = pairwise.load_scorer(os.path.join(config.out_dir, "scorer_params.npz"))
    for corpus in _load_eval_corpora(config):
        directory = _eval_dir(config, corpus.corpus_id)
        vectorizer = _vectorizer(config, corpus)
        records = retrieval.read_pairs_jsonl(
            os.path.join(directory, "pairs_infer.jsonl"))
        for rec in records:
            rec.score = pairwise.score_pair(params, vectorizer, rec.pair(),
                                            pw.window_w).probability
        retrieval.write_pairs_jsonl(
            records, os.path.join(directory, "pairs_scored.jsonl"))


def stage_cluster(config: PipelineConfig) -> None:
    pw = config.pairwise_config()
    params = pairwise.load_scorer(os.path.join(config.out_dir, "scorer_params.npz"))
    for corpus in _load_eval_corpora(config):
        directory = _eval_dir(config, corpus.corpus_id)
        records = retrieval.read_pairs_jsonl(
            os.path.join(directory, "pairs_scored.jsonl"))
        scored = [ScoredPair(pair=r.pair(), probability=r.score) for r in records]
        scorer = pairwise.trained_scorer(params, _vectorizer(config, corpus),
                                         pw.window_w)
        mention_ids = corpus.mention_ids(config.mention_type)
        partition, trace = clustering.greedy_cluster(mention_ids, scored, scorer,
                                                     trace=True)
        with open(os.path.join(directory, "partition.json"), "w",
                  encoding="utf-8") as f:
            f.write(partition.to_json() + "\n")
        clustering.write_trace(trace, os.path.join(directory, "trace.jsonl"))


def stage_score(config: PipelineConfig) -> dict[str, MetricReport]:
    reports: dict[str, MetricReport] = {}
    for corpus in _load_eval_corpora(config):
        directory = _eval_dir(config, corpus.corpus_id)
        with open(os.path.join(directory, "partition.json"), encoding="utf-8") as f:
            predicted = Partition.from_json(f.read())
        gold = corpus.gold_partition(config.mention_type)
        report = metrics.evaluate(gold, predicted)
        reports[corpus.corpus_id] = report
        _write_json(os.path.join(directory, "report.json"), report.to_dict())
        with open(os.path.join(directory, "report.txt"), "w", encoding="utf-8") as f:
            f.write(report.format_table() + "\n")
    summary = harmonic_mean_report(list(reports.values()))
    _write_json(os.path.join(config.out_dir, "report.json"),
                {"per_corpus": {c: r.to_dict() for c, r in reports.items()},
                 "summary": summary.to_dict()})
    with open(os.path.join(config.out_dir, "report.txt"), "w", encoding="utf-8") as f:
        for cid, rep in reports.items():
            f.write(f"== {cid} ==\n{rep.format_table()}\n\n")
        if len(reports) > 1:
            f.write(f"== harmonic mean ==\n{summary.format_table()}\n")
    return reports


_STAGES = [
    ("train-encoder", stage_train_encoder),
    ("embed", stage_embed),
    ("build-index", stage_build_index),
    ("gen-pairs", stage_gen_pairs),
    ("train-pairwise", stage_train_pairwise),
    ("score-pairs", stage_score_pairs),
    ("cluster", stage_cluster),
    ("score", stage_score),
]

STAGE_FUNCTIONS = dict(_STAGES)


def run_stage(config: PipelineConfig, name: str):
    config.validate()
    _prepare_dirs(config)
    try:
        return STAGE_FUNCTIONS[name](config)
    except StageError:
        raise
    except CorefError as exc:
        raise StageError(name, str(exc)) from exc


def run_pipeline(config: PipelineConfig) -> dict[str, MetricReport]:
    """All stages in order; returns the per-corpus metric reports."""
    config.validate()
    _prepare_dirs(config)
    reports: dict[str, MetricReport] = {}
    for name, fn in _STAGES:
        try:
            result = fn(config)
        except StageError:
            raise
        except CorefError as exc:
            raise StageError(name, str(exc)) from exc
        if name == "score":
            reports = result
    return reports


def harmonic_mean_report(reports: list[MetricReport]) -> MetricReport:
    """Elementwise harmonic mean across per-corpus reports (0 if any is 0)."""
    if len(reports) == 1:
        return reports[0]

    def hmean(values: list[float]) -> float:
        if any(v == 0.0 for v in values):
            return 0.0
        return len(values) / sum(1.0 / v for v in values)

    def triple(name: str) -> MetricTriple:
        return MetricTriple(
            recall=hmean([getattr(r, name).recall for r in reports]),
            precision=hmean([getattr(r, name).precision for r in reports]),
            f1=hmean([getattr(r, name).f1 for r in reports]),
        )

    return MetricReport(
        muc=triple("muc"), b_cubed=triple("b_cubed"), ceaf_e=triple("ceaf_e"),
        lea=triple("lea"), conll_f1=hmean([r.conll_f1 for r in reports]),
    )


def run_oracle_study(config: PipelineConfig) -> dict[str, dict]:
    """Upper-bound study: KNN retrieval with a gold-label scorer.

    The bi-encoder and candidate retrieval run as usual; the trained pairwise
    scorer is replaced by the oracle. Per test corpus, reports the candidate
    graph's pair recall and the metric suite of the oracle clustering.
    """
    config.validate()
    _prepare_dirs(config)
    for name in ("train-encoder", "embed", "build-index"):
        run_stage(config, name)

    pw = config.pairwise_config()
    results: dict[str, dict] = {}
    for corpus in _load_eval_corpora(config):
        directory = os.path.join(config.out_dir, "oracle", corpus.corpus_id)
        os.makedirs(directory, exist_ok=True)
        gold = corpus.gold_partition(config.mention_type)
        index = retrieval.build_index(
            os.path.join(_eval_dir(config, corpus.corpus_id), "embeddings.cemb"))
        pairs = retrieval.generate_pairs(corpus, index, pw.infer_k,
                                         config.mention_type)
        recall, counts = retrieval.pair_recall(pairs, gold)

        scored = [pairwise.oracle_score(p, gold) for p in sorted(pairs)]
        mention_ids = corpus.mention_ids(config.mention_type)
        partition, _ = clustering.greedy_cluster(mention_ids, scored,
                                                 pairwise.oracle_scorer(gold))
        report = metrics.evaluate(gold, partition)
        with open(os.path.join(directory, "partition.json"), "w",
                  encoding="utf-8") as f:
            f.write(partition.to_json() + "\n")
        payload = {"pair_recall": recall, "pair_counts": counts,
                   "report": report.to_dict()}
        _write_json(os.path.join(directory, "report.json"), payload)
        results[corpus.corpus_id] = {"pair_recall": recall, "pair_counts": counts,
                                     "report": report}
    return results


def run_ablations(config: PipelineConfig) -> dict[str, dict[str, MetricReport]]:
    """Masking and window ablation grid with a fixed bi-encoder.

    The encoder, embeddings, and candidate pairs are computed once from the
    unablated corpus; each grid cell retrains and rescores only the pairwise
    stage (window cells change its radius, mask cells mask its corpus view).
    All cells share the run's seed.
    """
    config.validate()
    if config.embeddings:
        raise ConfigError("ablations require the built-in encoder "
                          "(imported embeddings ignore masking and windows)")
    _prepare_dirs(config)
    for name in ("train-encoder", "embed", "build-index", "gen-pairs"):
        run_stage(config, name)

    cells: list[tuple[str, int, frozenset[str]]] = [
        ("baseline", config.pairwise.window_w, frozenset())]
    for w in config.window_sweep:
        cells.append((f"w{w}", w, frozenset()))
    for tag_set in config.mask_tag_sets:
        name = "mask_" + ("+".join(sorted(tag_set)) if tag_set else "none")
        cells.append((name, config.pairwise.window_w, frozenset(tag_set)))

    train_corpus = _load_train_corpus(config)
    eval_corpora = _load_eval_corpora(config)
    train_records = retrieval.read_pairs_jsonl(
        os.path.join(config.out_dir, "train", "pairs_train.jsonl"))
    params = encoder.load_params(os.path.join(config.out_dir, "encoder_params.npz"))

    results: dict[str, dict[str, MetricReport]] = {}
    for cell_name, window_w, tags in cells:
        cell_dir = os.path.join(config.out_dir, "ablate", cell_name)
        os.makedirs(cell_dir, exist_ok=True)
        pw_cfg = dataclasses.replace(config.pairwise_config(), window_w=window_w)

        cell_train = mask_tokens(train_corpus, tags, window_w) if tags else train_corpus
        scorer_params, _ = pairwise.train_pairwise(
            train_records, MentionVectorizer(cell_train, params), pw_cfg)

        cell_reports: dict[str, MetricReport] = {}
        for corpus in eval_corpora:
            cell_eval = mask_tokens(corpus, tags, window_w) if tags else corpus
            vectorizer = MentionVectorizer(cell_eval, params)
            infer_records = retrieval.read_pairs_jsonl(
                os.path.join(_eval_dir(config, corpus.corpus_id),
                             "pairs_infer.jsonl"))
            scored = [
                pairwise.score_pair(scorer_params, vectorizer, r.pair(),
                                    pw_cfg.window_w)
                for r in infer_records
            ]
            scorer = pairwise.trained_scorer(scorer_params, vectorizer,
                                             pw_cfg.window_w)
            mention_ids = corpus.mention_ids(config.mention_type)
            partition, _ = clustering.greedy_cluster(mention_ids, scored, scorer)
            report = metrics.evaluate(
                corpus.gold_partition(config.mention_type), partition)
            cell_reports[corpus.corpus_id] = report

            corpus_dir = os.path.join(cell_dir, corpus.corpus_id)
            os.makedirs(corpus_dir, exist_ok=True)
            with open(os.path.join(corpus_dir, "partition.json"), "w",
                      encoding="utf-8") as f:
                f.write(partition.to_json() + "\n")
            _write_json(os.path.join(corpus_dir, "report.json"), report.to_dict())
        results[cell_name] = cell_reports

    _write_json(os.path.join(config.out_dir, "ablations.json"),
                {cell: {cid: rep.to_dict() for cid, rep in reps.items()}
                 for cell, reps in results.items()})
    return results

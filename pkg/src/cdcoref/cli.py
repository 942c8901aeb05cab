"""Command-line interface.

All pipeline settings live in one JSON config file (see PipelineConfig);
``--seed`` and ``--out`` override its seed and output directory. Stage
commands rerun a single stage against an existing run directory. Exit code
is 0 on success and 1 with a stage-tagged message on failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from .corpus import Partition, save_corpus
from .errors import CorefError
from .metrics import evaluate
from .pipeline import (PipelineConfig, STAGE_FUNCTIONS, run_ablations,
                       run_oracle_study, run_pipeline, run_stage)
from .synth import make_synthetic_corpus

_STAGE_COMMANDS = list(STAGE_FUNCTIONS)


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="pipeline config JSON")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument("--out", default=None, help="override output directory")


def _load_config(args: argparse.Namespace) -> PipelineConfig:
    config = PipelineConfig.from_json_file(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if args.out is not None:
        config.out_dir = args.out
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cdcoref",
        description="Cross-document coreference resolution pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name in _STAGE_COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} stage")
        if name == "score":
            p.add_argument("--config", default=None, help="pipeline config JSON")
            p.add_argument("--seed", type=int, default=None)
            p.add_argument("--out", default=None)
            p.add_argument("--gold", default=None, help="gold partition JSON")
            p.add_argument("--pred", default=None, help="predicted partition JSON")
        else:
            _add_config_args(p)

    for name, help_text in [
        ("pipeline", "run every stage end to end"),
        ("oracle-study", "retrieval upper bound with a gold-label scorer"),
        ("ablate", "masking and window ablation grid"),
    ]:
        _add_config_args(sub.add_parser(name, help=help_text))

    synth = sub.add_parser("synth", help="write a seeded synthetic corpus")
    synth.add_argument("--out", required=True, help="output corpus JSONL path")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--clusters", type=int, default=40)
    synth.add_argument("--mentions-per-cluster", type=int, default=5)
    synth.add_argument("--docs", type=int, default=20)
    return parser


def _cmd_score_files(gold_path: str, pred_path: str, out_dir: str | None) -> int:
    with open(gold_path, encoding="utf-8") as f:
        gold = Partition.from_json(f.read())
    with open(pred_path, encoding="utf-8") as f:
        pred = Partition.from_json(f.read())
    report = evaluate(gold, pred)
    print(report.format_table())
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as f:
            f.write(report.to_json() + "\n")
        with open(os.path.join(out_dir, "report.txt"), "w", encoding="utf-8") as f:
            f.write(report.format_table() + "\n")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "synth":
            corpus = make_synthetic_corpus(
                n_clusters=args.clusters,
                mentions_per_cluster=args.mentions_per_cluster,
                n_docs=args.docs, seed=args.seed)
            save_corpus(corpus, args.out)
            print(f"wrote {args.out}: {len(corpus)} documents, "
                  f"{len(corpus.mention_ids())} mentions")
            return 0
        if args.command == "score" and args.gold and args.pred:
            return _cmd_score_files(args.gold, args.pred, args.out)
        if args.command == "score" and not args.config:
            print("score: need either --config or both --gold and --pred",
                  file=sys.stderr)
            return 1

        config = _load_config(args)
        if args.command == "pipeline":
            reports = run_pipeline(config)
            for corpus_id, report in reports.items():
                print(f"== {corpus_id} ==")
                print(report.format_table())
        elif args.command == "oracle-study":
            results = run_oracle_study(config)
            for corpus_id, payload in results.items():
                print(f"== {corpus_id} ==")
                print(f"pair recall: {payload['pair_recall']:.4f} "
                      f"({payload['pair_counts']})")
                print(payload["report"].format_table())
        elif args.command == "ablate":
            results = run_ablations(config)
            for cell, reports in results.items():
                for corpus_id, report in reports.items():
                    print(f"{cell:<24} {corpus_id:<16} "
                          f"B3 F1 {report.b_cubed.f1 * 100:6.2f}  "
                          f"CoNLL {report.conll_f1 * 100:6.2f}")
        else:
            result = run_stage(config, args.command)
            if args.command == "score" and result:
                for corpus_id, report in result.items():
                    print(f"== {corpus_id} ==")
                    print(report.format_table())
    except CorefError as exc:
        print(f"cdcoref: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"cdcoref: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

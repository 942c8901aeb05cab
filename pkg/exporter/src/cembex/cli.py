"""Command-line interface: ``cembex export``."""

from __future__ import annotations

import argparse
import sys

from .corpusio import CorpusReadError
from .export import (AlignmentError, ExportConfig, ModelResolutionError,
                     export_embeddings)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cembex",
        description="Export CEMB mention embeddings from a pretrained language model",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    export = sub.add_parser("export", help="encode corpus mentions to a CEMB file")
    export.add_argument("--corpus", required=True, help="corpus JSONL path")
    export.add_argument("--model", required=True,
                        help="model identifier or local model directory")
    export.add_argument("--window", type=int, default=5,
                        help="sentence window radius (default 5)")
    export.add_argument("--out", required=True, help="output CEMB path")
    export.add_argument("--device", default="cpu", help="torch device hint")
    export.add_argument("--batch-size", type=int, default=16)
    export.add_argument("--no-deterministic", action="store_true",
                        help="skip deterministic-mode seeding")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = ExportConfig(
        corpus_path=args.corpus,
        model_id=args.model,
        output_path=args.out,
        window_w=args.window,
        device=args.device,
        batch_size=args.batch_size,
        deterministic=not args.no_deterministic,
    )
    try:
        result = export_embeddings(config)
    except (ModelResolutionError, AlignmentError, CorpusReadError, OSError) as exc:
        print(f"cembex: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {result.output_path}: {result.count} records, "
          f"dim {result.dim} (2 x hidden {result.hidden_size})")
    return 0


if __name__ == "__main__":
    sys.exit(main())

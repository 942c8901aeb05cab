"""CEMB embedding exporter for pretrained contextual language models."""

from .cemb import read_cemb, write_cemb
from .corpusio import load_corpus
from .export import (AlignmentError, ExportConfig, ExportResult,
                     ModelResolutionError, export_embeddings)

__version__ = "0.1.0"

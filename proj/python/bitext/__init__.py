"""Parallel sentence extraction toolkit."""

from ._core import Scorer, bleu, precision_recall_f1, run, tokenize

__all__ = ["Scorer", "bleu", "precision_recall_f1", "run", "tokenize"]

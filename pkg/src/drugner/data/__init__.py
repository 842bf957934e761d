"""Bundled data files."""
from __future__ import annotations

from importlib import resources

from ..corpus import Corpus, load_column_corpus


def synthetic_overfit_corpus() -> Corpus:
    """20 synthetic IOB sentences covering all four entity classes, small
    enough for every architecture to memorize; used by the overfit checks."""
    path = resources.files(__package__) / "synthetic_overfit.tsv"
    with resources.as_file(path) as real_path:
        return load_column_corpus(real_path, label="synthetic-overfit")

"""The three recurrent architectures and their shared construction surface."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from ..evaluation import TAGS
from ..vocab import EmbeddingTable, Vocabulary
from .base import SentenceGrads, TaggerBase, output_distribution
from .bilstm import (
    BiLstmCrfTagger,
    LstmCrfParams,
    LstmDirectionParams,
    LstmState,
    bilstm_forward,
    lstm_step,
)
from .elman import ElmanParams, ElmanTagger, elman_step
from .jordan import JordanParams, JordanTagger, jordan_step

ARCHITECTURES = ("elman", "jordan", "bilstm-crf")

_TAGGER_CLASSES = {
    "elman": (ElmanTagger, ElmanParams),
    "jordan": (JordanTagger, JordanParams),
    "bilstm-crf": (BiLstmCrfTagger, LstmCrfParams),
}


def create_tagger(
    arch: str,
    vocab: Vocabulary,
    hidden: int,
    dim: int,
    window: int,
    rng: np.random.Generator | None,
    tags: tuple[str, ...] = TAGS,
) -> TaggerBase:
    """Build a tagger with freshly initialized parameters.

    The rng is consumed in a fixed order (embedding table first, then the
    architecture's weight matrices) so a seed pins the whole model. With
    rng=None all parameters are zero, ready to be filled from a checkpoint.
    """
    if arch not in _TAGGER_CLASSES:
        raise ValueError(f"unknown architecture {arch!r}, expected one of {ARCHITECTURES}")
    tagger_cls, params_cls = _TAGGER_CLASSES[arch]
    if rng is None:
        emb = EmbeddingTable(vectors=np.zeros((len(vocab), dim)))
    else:
        emb = EmbeddingTable.init(len(vocab), dim, rng)
    params = params_cls.create(hidden, window * dim, len(tags), rng)
    return tagger_cls(vocab=vocab, emb=emb, window=window, tags=tags, params=params)


def predict_tags(model: TaggerBase, sentence: Sequence[str]) -> list[str]:
    """Tag names for one sentence of raw tokens; errors on empty input."""
    if len(sentence) == 0:
        raise ValueError("cannot predict tags for an empty sentence")
    return model.predict_tags(sentence)


__all__ = [
    "ARCHITECTURES",
    "BiLstmCrfTagger",
    "ElmanParams",
    "ElmanTagger",
    "JordanParams",
    "JordanTagger",
    "LstmCrfParams",
    "LstmDirectionParams",
    "LstmState",
    "SentenceGrads",
    "TaggerBase",
    "bilstm_forward",
    "create_tagger",
    "elman_step",
    "jordan_step",
    "lstm_step",
    "output_distribution",
    "predict_tags",
]

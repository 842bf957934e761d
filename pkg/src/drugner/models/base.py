"""Shared tagger plumbing: input construction, dropout, prediction surface.

A tagger owns a vocabulary, the trainable embedding table, and one
architecture's weights. Per-sentence inputs are the context-window
concatenations of embedding rows; training-time dropout is applied to that
input vector and to the hidden representation feeding the output/emission
projection (inverted scaling, never at prediction time).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..numeric import dropout_mask, softmax
from ..vocab import EmbeddingTable, Vocabulary, embed_windows, sentence_windows


@dataclass
class SentenceGrads:
    """Gradients of one sentence loss: dense per-parameter arrays plus sparse
    embedding-row updates (row index -> d-vector)."""

    params: dict[str, np.ndarray]
    emb_rows: dict[int, np.ndarray] = field(default_factory=dict)

    def add_embedding_rows(self, windows: np.ndarray, d_x: np.ndarray, dim: int) -> None:
        """Scatter (T, s*d) input gradients back onto embedding rows."""
        t_len, s = windows.shape
        for t in range(t_len):
            for j in range(s):
                row = int(windows[t, j])
                seg = d_x[t, j * dim : (j + 1) * dim]
                acc = self.emb_rows.get(row)
                if acc is None:
                    self.emb_rows[row] = seg.copy()
                else:
                    acc += seg


def output_distribution(h: np.ndarray, w: np.ndarray, b_y: np.ndarray) -> np.ndarray:
    """softmax(W h + b_y): the per-token class distribution."""
    h = np.asarray(h, dtype=np.float64)
    if w.shape[1] != h.shape[0] or w.shape[0] != b_y.shape[0]:
        raise ValueError(
            f"output projection shapes {w.shape}/{b_y.shape} do not match h of {h.shape}"
        )
    return softmax(w @ h + b_y)


@dataclass
class TaggerBase:
    vocab: Vocabulary
    emb: EmbeddingTable
    window: int
    tags: tuple[str, ...]

    @property
    def num_tags(self) -> int:
        return len(self.tags)

    @property
    def input_dim(self) -> int:
        return self.window * self.emb.dim

    def encode(self, tokens: Sequence[str]) -> list[int]:
        return self.vocab.encode(tokens)

    def _inputs(
        self,
        token_ids: Sequence[int],
        dropout: float = 0.0,
        rng: np.random.Generator | None = None,
    ):
        """(windows, dropped input matrix, input mask or None)."""
        if len(token_ids) == 0:
            raise ValueError("cannot run a model on an empty sentence")
        windows = sentence_windows(token_ids, self.window)
        x = embed_windows(windows, self.emb)
        if dropout > 0.0:
            if rng is None:
                raise ValueError("dropout requires an rng")
            mask = dropout_mask(x.shape, dropout, rng)
            return windows, x * mask, mask
        return windows, x, None

    def _hidden_mask(
        self, shape, dropout: float, rng: np.random.Generator | None
    ) -> np.ndarray | None:
        if dropout > 0.0:
            return dropout_mask(shape, dropout, rng)
        return None

    def predict_tags(self, tokens: Sequence[str]) -> list[str]:
        """Tag names for a raw token sequence (deterministic, mask-free)."""
        ids = self.encode(tokens)
        return [self.tags[i] for i in self.predict_tag_ids(ids)]

    # subclasses implement:
    #   param_arrays() -> dict[str, np.ndarray]    (live arrays, no copies)
    #   sentence_loss(token_ids, gold_ids) -> float
    #   loss_and_grads(token_ids, gold_ids, dropout=0.0, rng=None)
    #   predict_tag_ids(token_ids) -> list[int]

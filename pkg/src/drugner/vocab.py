"""Vocabulary, trainable embedding table, and context-window input construction.

Tokens are normalized before lookup: lowercased, with every digit run
collapsed to a single "0". Unseen tokens map to the reserved UNK entry and
sentence boundaries are filled with the reserved PAD entry, which has its own
trainable embedding row.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .numeric import uniform_init

PAD = "<pad>"
UNK = "<unk>"
PAD_INDEX = 0
UNK_INDEX = 1

_DIGIT_RUN = re.compile(r"\d+")


def normalize_token(token: str) -> str:
    """Lowercase and collapse digit runs: 'Warfarin12mg' -> 'warfarin0mg'."""
    return _DIGIT_RUN.sub("0", token.lower())


@dataclass
class Vocabulary:
    """Dense word->index map with PAD at 0 and UNK at 1.

    Words are stored in normalized form, indexed in first-occurrence order.
    """

    words: list[str]
    _index: dict[str, int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.words[:2] != [PAD, UNK]:
            raise ValueError("vocabulary must start with the PAD and UNK entries")
        self._index = {w: i for i, w in enumerate(self.words)}
        if len(self._index) != len(self.words):
            raise ValueError("vocabulary contains duplicate words")

    def __len__(self) -> int:
        return len(self.words)

    def lookup(self, token: str) -> int:
        """Index of the normalized token; UNK_INDEX when unseen."""
        return self._index.get(normalize_token(token), UNK_INDEX)

    def word(self, index: int) -> str:
        return self.words[index]

    def encode(self, tokens: Iterable[str]) -> list[int]:
        return [self.lookup(t) for t in tokens]


def build_vocabulary(sentences: Iterable[Sequence[str]]) -> Vocabulary:
    """Vocabulary over every distinct (normalized) token, first-occurrence order."""
    words = [PAD, UNK]
    seen = {PAD, UNK}
    empty = True
    for tokens in sentences:
        empty = False
        for token in tokens:
            norm = normalize_token(token)
            if norm not in seen:
                seen.add(norm)
                words.append(norm)
    if empty:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    return Vocabulary(words)


@dataclass
class EmbeddingTable:
    """One trainable d-vector per vocabulary index."""

    vectors: np.ndarray  # (|V|, d) float64
    trainable: bool = True

    @classmethod
    def init(
        cls,
        vocab_size: int,
        dim: int,
        rng: np.random.Generator,
        lo: float = -1.0,
        hi: float = 1.0,
    ) -> "EmbeddingTable":
        return cls(vectors=uniform_init(vocab_size, dim, lo, hi, rng))

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return self.vectors.shape[0]


def context_window(
    sentence: Sequence[int], t: int, s: int, pad_index: int = PAD_INDEX
) -> list[int]:
    """The s token indices centered at position t; out-of-sentence slots are PAD."""
    if s < 1 or s % 2 == 0:
        raise ValueError(f"window size must be odd and >= 1, got {s}")
    n = len(sentence)
    if not 0 <= t < n:
        raise ValueError(f"position {t} out of range for sentence of length {n}")
    half = s // 2
    return [
        sentence[i] if 0 <= i < n else pad_index
        for i in range(t - half, t + half + 1)
    ]


def window_embed(window: Sequence[int], table: EmbeddingTable) -> np.ndarray:
    """Concatenation of the embedding rows for `window`, length s*d."""
    n = len(table)
    for idx in window:
        if not 0 <= idx < n:
            raise ValueError(f"embedding index {idx} out of range for table of size {n}")
    return np.concatenate([table.vectors[i] for i in window])


def sentence_windows(
    sentence: Sequence[int], s: int, pad_index: int = PAD_INDEX
) -> np.ndarray:
    """(T, s) integer matrix of window indices for every position."""
    return np.array(
        [context_window(sentence, t, s, pad_index) for t in range(len(sentence))],
        dtype=np.int64,
    )


def embed_windows(windows: np.ndarray, table: EmbeddingTable) -> np.ndarray:
    """(T, s*d) matrix: row t is the concatenated embedding of window t."""
    t, s = windows.shape
    return table.vectors[windows.reshape(-1)].reshape(t, s * table.dim)

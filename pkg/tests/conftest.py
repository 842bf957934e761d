import numpy as np
import pytest

from drugner.corpus import Sentence
from drugner.vocab import PAD, UNK, Vocabulary

# The worked example sentence used across corpus/evaluation tests.
EXAMPLE_TOKENS = (
    "Cimetidine", "reduces", "clearance", "of", "ALFENTA",
    "and", "volatile", "inhalation", "anesthetics",
)
EXAMPLE_TAGS = (
    "B-drug", "O", "O", "O", "B-brand", "O", "B-group", "I-group", "I-group",
)
EXAMPLE_TEXT = " ".join(EXAMPLE_TOKENS)

# Small tag set for fast model-level tests.
TAGS5 = ("O", "B-drug", "I-drug", "B-group", "I-group")


@pytest.fixture
def example_sentence() -> Sentence:
    return Sentence(tokens=EXAMPLE_TOKENS, tags=EXAMPLE_TAGS)


@pytest.fixture
def tiny_vocab() -> Vocabulary:
    return Vocabulary([PAD, UNK, "a", "b", "c", "d"])


def dense_embedding_grad(grads, shape) -> np.ndarray:
    out = np.zeros(shape)
    for row, vec in grads.emb_rows.items():
        out[row] += vec
    return out

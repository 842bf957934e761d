import numpy as np
import pytest

from drugner.numeric import new_rng
from drugner.vocab import (
    PAD,
    PAD_INDEX,
    UNK,
    UNK_INDEX,
    EmbeddingTable,
    Vocabulary,
    build_vocabulary,
    context_window,
    embed_windows,
    normalize_token,
    sentence_windows,
    window_embed,
)
from tests.conftest import EXAMPLE_TOKENS


class TestNormalize:
    def test_lowercase(self):
        assert normalize_token("ALFENTA") == "alfenta"

    def test_digit_runs_collapse(self):
        assert normalize_token("Warfarin12mg") == "warfarin0mg"
        assert normalize_token("12.5") == "0.0"


class TestVocabulary:
    def test_build_from_single_sentence(self):
        vocab = build_vocabulary([["a", "b", "a"]])
        assert vocab.words == [PAD, UNK, "a", "b"]
        assert len(vocab) == 4

    def test_unseen_token_maps_to_unk(self):
        vocab = build_vocabulary([["a", "b"]])
        assert vocab.lookup("never-seen-token") == UNK_INDEX

    def test_deterministic_order(self):
        corpus = [["x", "y"], ["z", "x"]]
        assert build_vocabulary(corpus).words == build_vocabulary(corpus).words

    def test_round_trip(self):
        vocab = build_vocabulary([["alpha", "beta", "gamma"]])
        for word in vocab.words:
            assert vocab.word(vocab.lookup(word)) == word

    def test_normalized_lookup(self):
        vocab = build_vocabulary([["Cimetidine"]])
        assert vocab.lookup("CIMETIDINE") == vocab.lookup("cimetidine")

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            build_vocabulary([])


class TestContextWindow:
    def test_example_sentence_center(self):
        # position of "reduces" with s=3 picks its two neighbours
        ids = list(range(10, 10 + len(EXAMPLE_TOKENS)))
        t = EXAMPLE_TOKENS.index("reduces")
        assert context_window(ids, t, 3) == [ids[t - 1], ids[t], ids[t + 1]]

    def test_boundary_padding(self):
        ids = [5, 6, 7]
        assert context_window(ids, 0, 3) == [PAD_INDEX, 5, 6]
        assert context_window(ids, 2, 3) == [6, 7, PAD_INDEX]
        assert context_window(ids, 0, 5) == [PAD_INDEX, PAD_INDEX, 5, 6, 7]

    def test_degenerate_window(self):
        ids = [5, 6, 7]
        for t in range(3):
            assert context_window(ids, t, 1) == [ids[t]]

    def test_even_window_rejected(self):
        with pytest.raises(ValueError):
            context_window([1, 2, 3], 0, 2)

    def test_position_out_of_range(self):
        with pytest.raises(ValueError):
            context_window([1, 2, 3], 3, 3)
        with pytest.raises(ValueError):
            context_window([1, 2, 3], -1, 3)

    def test_layout_property(self):
        rng = new_rng(21)
        for _ in range(100):
            n = int(rng.integers(1, 12))
            ids = [int(v) for v in rng.integers(2, 50, n)]
            s = int(rng.choice([1, 3, 5, 7]))
            t = int(rng.integers(0, n))
            window = context_window(ids, t, s)
            assert len(window) == s
            for off, value in zip(range(-(s // 2), s // 2 + 1), window):
                pos = t + off
                expected = ids[pos] if 0 <= pos < n else PAD_INDEX
                assert value == expected


class TestWindowEmbed:
    def test_output_length(self):
        table = EmbeddingTable.init(6, 50, new_rng(0))
        assert window_embed([1, 2, 3], table).shape == (150,)

    def test_single_row_identity(self):
        table = EmbeddingTable.init(6, 4, new_rng(1))
        np.testing.assert_array_equal(window_embed([3], table), table.vectors[3])

    def test_repeated_index_shares_row(self):
        table = EmbeddingTable.init(6, 4, new_rng(2))
        out = window_embed([2, 4, 2], table)
        np.testing.assert_array_equal(out[:4], out[8:])

    def test_out_of_range_rejected(self):
        table = EmbeddingTable.init(4, 3, new_rng(3))
        with pytest.raises(ValueError):
            window_embed([0, 4], table)

    def test_matches_row_concatenation(self):
        rng = new_rng(4)
        table = EmbeddingTable.init(8, 5, rng)
        ids = [2, 3, 4, 5, 6]
        windows = sentence_windows(ids, 3)
        embedded = embed_windows(windows, table)
        assert embedded.shape == (5, 15)
        for t in range(5):
            expected = np.concatenate([table.vectors[i] for i in windows[t]])
            np.testing.assert_array_equal(embedded[t], expected)

    def test_initial_entries_in_range(self):
        table = EmbeddingTable.init(50, 20, new_rng(5))
        assert (table.vectors >= -1.0).all() and (table.vectors < 1.0).all()

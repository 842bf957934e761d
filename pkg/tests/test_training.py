import numpy as np
import pytest

from drugner.checkpoint import (
    load_checkpoint,
    save_checkpoint,
    tagger_from_checkpoint,
)
from drugner.corpus import Sentence
from drugner.data import synthetic_overfit_corpus
from drugner.errors import DataError
from drugner.hyperparams import (
    DIM_CHOICES,
    HIDDEN_CHOICES,
    RATE_RANGE,
    WINDOW_CHOICES,
    HyperParams,
    sample_hyperparams,
)
from drugner.models import create_tagger
from drugner.numeric import new_rng
from drugner.training import (
    random_search,
    sgd_epoch,
    singleton_token_ids,
    split_train_validation,
    train,
    validation_f1,
)
from drugner.vocab import UNK_INDEX, build_vocabulary
from tests.conftest import TAGS5


def make_sentences(n: int) -> list[Sentence]:
    words = ["alpha", "beta", "gamma", "delta", "epsilon"]
    out = []
    for i in range(n):
        tokens = (words[i % 5], words[(i + 1) % 5], words[(i + 3) % 5])
        tags = ("B-drug" if i % 2 == 0 else "O", "O", "O")
        out.append(Sentence(tokens=tokens, tags=tags))
    return out


TINY_HP = HyperParams(
    hidden=4, window=1, dim=5, learning_rate=0.05,
    dropout_rate=0.05, max_epochs=2, seed=3,
)


class TestSplit:
    def test_seventy_thirty(self):
        train_set, val_set = split_train_validation(make_sentences(100), 0.7, 1)
        assert (len(train_set), len(val_set)) == (70, 30)

    def test_deterministic(self):
        sents = make_sentences(50)
        a = split_train_validation(sents, 0.7, 42)
        b = split_train_validation(sents, 0.7, 42)
        assert a == b

    def test_partition(self):
        sents = make_sentences(31)
        train_set, val_set = split_train_validation(sents, 0.6, 5)
        combined = sorted(
            (s.tokens for s in train_set + val_set), key=lambda t: t
        )
        assert combined == sorted(s.tokens for s in sents)
        assert len(train_set) + len(val_set) == 31

    def test_bad_ratio_rejected(self):
        with pytest.raises(ValueError):
            split_train_validation(make_sentences(10), 1.0, 0)
        with pytest.raises(ValueError):
            split_train_validation(make_sentences(10), 0.0, 0)

    def test_too_small_corpus_rejected(self):
        with pytest.raises(ValueError):
            split_train_validation(make_sentences(1), 0.7, 0)


class TestHyperParams:
    def test_validate_accepts_search_space(self):
        HyperParams(hidden=25, window=1, dim=50, learning_rate=0.1,
                    dropout_rate=0.05, seed=0).validate()

    def test_validate_rejects_out_of_set_hidden(self):
        with pytest.raises(ValueError, match=r"25, 50, 100"):
            HyperParams(hidden=37, seed=0).validate()

    def test_unrestricted_allows_anything_sane(self):
        HyperParams(hidden=37, window=7, dim=12, learning_rate=0.5,
                    dropout_rate=0.0, seed=0).validate(unrestricted=True)

    def test_sampling_stays_in_space(self):
        rng = new_rng(9)
        for _ in range(200):
            hp = sample_hyperparams(rng, seed=0)
            assert hp.hidden in HIDDEN_CHOICES
            assert hp.window in WINDOW_CHOICES
            assert hp.dim in DIM_CHOICES
            assert RATE_RANGE[0] <= hp.learning_rate <= RATE_RANGE[1]
            assert RATE_RANGE[0] <= hp.dropout_rate <= RATE_RANGE[1]


class TestSgdEpoch:
    def _tagger_and_sents(self, seed=7):
        sents = make_sentences(5)
        vocab = build_vocabulary([s.tokens for s in sents])
        tagger = create_tagger("elman", vocab, 4, 5, 1, new_rng(seed), TAGS5)
        return tagger, sents

    def test_zero_learning_rate_keeps_parameters(self):
        tagger, sents = self._tagger_and_sents()
        hp = HyperParams(hidden=4, window=1, dim=5, learning_rate=0.0,
                         dropout_rate=0.0, seed=0)
        before = {n: a.tobytes() for n, a in tagger.param_arrays().items()}
        emb_before = tagger.emb.vectors.tobytes()
        sgd_epoch(tagger, sents, hp, new_rng(0))
        assert all(a.tobytes() == before[n] for n, a in tagger.param_arrays().items())
        assert tagger.emb.vectors.tobytes() == emb_before

    def test_fixed_seed_reproduces_loss_sequence(self):
        losses = []
        for _ in range(2):
            tagger, sents = self._tagger_and_sents()
            hp = HyperParams(hidden=4, window=1, dim=5, learning_rate=0.05,
                             dropout_rate=0.0, seed=0)
            run = [sgd_epoch(tagger, sents, hp, new_rng(11)) for _ in range(3)]
            losses.append(run)
        assert losses[0] == losses[1]

    def test_loss_decreases_on_tiny_corpus(self):
        tagger, sents = self._tagger_and_sents()
        hp = HyperParams(hidden=4, window=1, dim=5, learning_rate=0.05,
                         dropout_rate=0.0, seed=0)
        rng = new_rng(12)
        first = sgd_epoch(tagger, sents, hp, rng)
        second = sgd_epoch(tagger, sents, hp, rng)
        assert second < first

    def test_empty_training_set_rejected(self):
        tagger, _ = self._tagger_and_sents()
        with pytest.raises(ValueError):
            sgd_epoch(tagger, [], TINY_HP, new_rng(0))

    def test_untagged_sentence_rejected(self):
        tagger, sents = self._tagger_and_sents()
        bad = sents + [Sentence(tokens=("alpha",))]
        with pytest.raises(DataError):
            sgd_epoch(tagger, bad, TINY_HP, new_rng(0))

    def test_singletons_detected(self):
        sents = [
            Sentence(tokens=("alpha", "beta"), tags=("O", "O")),
            Sentence(tokens=("alpha", "rare"), tags=("O", "O")),
        ]
        vocab = build_vocabulary([s.tokens for s in sents])
        tagger = create_tagger("elman", vocab, 3, 4, 1, new_rng(0), TAGS5)
        singles = singleton_token_ids(tagger, sents)
        assert vocab.lookup("rare") in singles
        assert vocab.lookup("alpha") not in singles
        assert UNK_INDEX not in singles

    def test_unk_row_receives_gradient_from_singletons(self):
        sents = [
            Sentence(tokens=("alpha", "rare"), tags=("O", "B-drug")),
            Sentence(tokens=("alpha", "beta"), tags=("O", "O")),
        ]
        vocab = build_vocabulary([s.tokens for s in sents])
        tagger = create_tagger("elman", vocab, 3, 4, 1, new_rng(2), TAGS5)
        singles = singleton_token_ids(tagger, sents)
        unk_before = tagger.emb.vectors[UNK_INDEX].copy()
        hp = HyperParams(hidden=3, window=1, dim=4, learning_rate=0.1,
                         dropout_rate=0.0, seed=0)
        for epoch in range(5):
            sgd_epoch(tagger, sents, hp, new_rng(epoch), singletons=singles)
        assert not np.array_equal(tagger.emb.vectors[UNK_INDEX], unk_before)

    def test_untrainable_embeddings_stay_fixed(self):
        tagger, sents = self._tagger_and_sents()
        tagger.emb.trainable = False
        before = tagger.emb.vectors.tobytes()
        hp = HyperParams(hidden=4, window=1, dim=5, learning_rate=0.1,
                         dropout_rate=0.0, seed=0)
        sgd_epoch(tagger, sents, hp, new_rng(1))
        assert tagger.emb.vectors.tobytes() == before


class TestTrain:
    def test_respects_epoch_budget_and_best_retention(self):
        sents = make_sentences(12)
        train_set, val_set = split_train_validation(sents, 0.7, 0)
        ckpt, record = train("elman", train_set, val_set, TINY_HP)
        assert len(record.epochs) <= TINY_HP.max_epochs
        assert record.best_val_f1 == max(r.val_f1 for r in record.epochs)
        assert record.best_val_f1 >= record.epochs[-1].val_f1

    def test_zero_learning_rate_freezes_validation_curve(self):
        sents = make_sentences(12)
        train_set, val_set = split_train_validation(sents, 0.7, 0)
        hp = HyperParams(hidden=4, window=1, dim=5, learning_rate=0.0,
                         dropout_rate=0.05, max_epochs=3, seed=5)
        _, record = train("elman", train_set, val_set, hp)
        f1s = {r.val_f1 for r in record.epochs}
        assert len(f1s) == 1
        assert record.best_epoch == 1

    def test_checkpoint_matches_best_epoch_score(self):
        corpus = synthetic_overfit_corpus()
        hp = HyperParams(hidden=4, window=1, dim=5, learning_rate=0.1,
                         dropout_rate=0.05, max_epochs=4, seed=2)
        ckpt, record = train("elman", corpus.sentences, corpus.sentences, hp)
        tagger = tagger_from_checkpoint(ckpt)
        assert validation_f1(tagger, corpus.sentences) == pytest.approx(
            record.best_val_f1
        )

    def test_deterministic_checkpoints(self, tmp_path):
        sents = make_sentences(12)
        train_set, val_set = split_train_validation(sents, 0.7, 0)
        paths = []
        for run in range(2):
            ckpt, _ = train("jordan", train_set, val_set, TINY_HP)
            path = tmp_path / f"run{run}.ckpt"
            save_checkpoint(ckpt, path)
            paths.append(path)
        assert paths[0].read_bytes() == paths[1].read_bytes()


class TestCheckpointRoundTrip:
    def test_bit_exact(self, tmp_path):
        sents = make_sentences(10)
        train_set, val_set = split_train_validation(sents, 0.7, 1)
        ckpt, _ = train("bilstm-crf", train_set, val_set, TINY_HP)
        path = tmp_path / "model.ckpt"
        save_checkpoint(ckpt, path)
        loaded = load_checkpoint(path)
        assert loaded.architecture == ckpt.architecture
        assert loaded.hyperparams == ckpt.hyperparams
        assert loaded.vocab_words == ckpt.vocab_words
        assert loaded.tags == ckpt.tags
        for name, arr in ckpt.arrays.items():
            assert loaded.arrays[name].tobytes() == arr.tobytes()
        second = tmp_path / "again.ckpt"
        save_checkpoint(loaded, second)
        assert second.read_bytes() == path.read_bytes()

    def test_prediction_survives_round_trip(self, tmp_path):
        corpus = synthetic_overfit_corpus()
        hp = HyperParams(hidden=4, window=1, dim=5, learning_rate=0.1,
                         dropout_rate=0.0, max_epochs=2, seed=4)
        ckpt, _ = train("elman", corpus.sentences, corpus.sentences, hp)
        path = tmp_path / "m.ckpt"
        save_checkpoint(ckpt, path)
        tagger = tagger_from_checkpoint(load_checkpoint(path))
        tokens = corpus.sentences[0].tokens
        assert tagger.predict_tags(tokens) == tagger_from_checkpoint(ckpt).predict_tags(tokens)

    def test_corrupt_file_rejected(self, tmp_path):
        path = tmp_path / "junk.ckpt"
        path.write_bytes(b"not a checkpoint at all")
        with pytest.raises(DataError):
            load_checkpoint(path)


class TestDropout:
    def test_prediction_is_mask_free(self):
        corpus = synthetic_overfit_corpus()
        hp = HyperParams(hidden=4, window=1, dim=5, learning_rate=0.1,
                         dropout_rate=0.1, max_epochs=1, seed=6)
        ckpt, _ = train("elman", corpus.sentences, corpus.sentences, hp)
        tagger = tagger_from_checkpoint(ckpt)
        tokens = corpus.sentences[0].tokens
        assert tagger.predict_tags(tokens) == tagger.predict_tags(tokens)


class TestRandomSearch:
    def test_single_trial_returns_its_config(self):
        corpus = synthetic_overfit_corpus()
        result = random_search("elman", corpus.sentences, trials=1, seed=8, max_epochs=1)
        assert result.best_index == 0
        assert result.best_hyperparams == result.trials[0].hyperparams

    def test_best_is_argmax_and_samples_legal(self):
        corpus = synthetic_overfit_corpus()
        result = random_search("elman", corpus.sentences, trials=4, seed=9, max_epochs=1)
        assert len(result.trials) == 4
        best_f1 = max(t.val_f1 for t in result.trials)
        assert result.best_record.best_val_f1 == best_f1
        for t in result.trials:
            assert t.hyperparams.hidden in HIDDEN_CHOICES
            assert t.hyperparams.window in WINDOW_CHOICES
            assert t.hyperparams.dim in DIM_CHOICES

    def test_parallel_matches_sequential(self):
        corpus = synthetic_overfit_corpus()
        seq = random_search("elman", corpus.sentences, trials=2, seed=10, max_epochs=1)
        par = random_search("elman", corpus.sentences, trials=2, seed=10,
                            max_epochs=1, jobs=2)
        assert [t.val_f1 for t in seq.trials] == [t.val_f1 for t in par.trials]
        assert seq.best_index == par.best_index
        for name, arr in seq.best_checkpoint.arrays.items():
            assert par.best_checkpoint.arrays[name].tobytes() == arr.tobytes()

    def test_bad_trial_count_rejected(self):
        with pytest.raises(ValueError):
            random_search("elman", make_sentences(10), trials=0, seed=0)


class TestDropoutMaskStatistics:
    def test_inverted_scaling_preserves_mean(self):
        from drugner.numeric import dropout_mask

        rng = new_rng(13)
        value = np.full(100_000, 2.5)
        rate = 0.07
        masked = value * dropout_mask(value.shape, rate, rng)
        assert abs(masked.mean() - 2.5) / 2.5 < 0.01

"""SGD training with BPTT, early stopping, and random hyperparameter search.

One training run is plain SGD: one full-sequence gradient step per sentence,
sentence order reshuffled every epoch, inverted dropout on the input and
pre-projection hidden vectors. Training runs for at most max_epochs epochs;
after each epoch the model is scored by strict micro-F1 on the validation
set and the best-scoring epoch's parameters are the ones retained (ties go
to the earliest epoch).

Everything random flows from the run seed: initialization, shuffling,
dropout masks and the UNK-exposure noise, in a fixed order, so identical
inputs and seed reproduce a bit-identical checkpoint.
"""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .checkpoint import Checkpoint, checkpoint_from_tagger
from .corpus import Sentence
from .errors import DataError, NumericError
from .evaluation import TAGS, evaluate_strict, iob_to_spans
from .hyperparams import HyperParams, sample_hyperparams
from .models import TaggerBase, create_tagger
from .numeric import derive_seed, new_rng
from .vocab import UNK_INDEX, build_vocabulary


def split_train_validation(
    sentences: Sequence[Sentence], ratio: float, seed: int
) -> tuple[list[Sentence], list[Sentence]]:
    """Sentence-level split: round(ratio*N) sentences to train, rest to
    validation; deterministic for a given seed; disjoint and exhaustive."""
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"split ratio must be in (0, 1), got {ratio}")
    n = len(sentences)
    if n < 2:
        raise ValueError(f"need at least 2 sentences to split, got {n}")
    perm = new_rng(seed).permutation(n)
    n_train = int(round(ratio * n))
    train = [sentences[i] for i in perm[:n_train]]
    val = [sentences[i] for i in perm[n_train:]]
    return train, val


def _encode_gold(tagger: TaggerBase, sentences: Sequence[Sentence]):
    """Per-sentence (token ids, gold tag ids); fails on untagged sentences."""
    tag_to_id = {t: i for i, t in enumerate(tagger.tags)}
    encoded = []
    for sent in sentences:
        if sent.tags is None:
            raise DataError(f"sentence {sent.sid or ''} has no gold tags")
        try:
            gold = [tag_to_id[t] for t in sent.tags]
        except KeyError as exc:
            raise DataError(f"tag {exc.args[0]!r} not in the model tag set") from exc
        encoded.append((tagger.encode(sent.tokens), gold))
    return encoded


def singleton_token_ids(
    tagger: TaggerBase, sentences: Sequence[Sentence]
) -> frozenset[int]:
    """Ids of tokens occurring exactly once in the training split. During
    training these are swapped for UNK with probability 0.5 per occurrence,
    so the UNK row gets gradient signal."""
    counts: dict[int, int] = {}
    for sent in sentences:
        for idx in tagger.encode(sent.tokens):
            counts[idx] = counts.get(idx, 0) + 1
    return frozenset(idx for idx, c in counts.items() if c == 1 and idx != UNK_INDEX)


def _clip_grads(grads, max_norm: float) -> None:
    total = 0.0
    for arr in grads.params.values():
        total += float(np.sum(arr * arr))
    for vec in grads.emb_rows.values():
        total += float(np.sum(vec * vec))
    norm = np.sqrt(total)
    if norm > max_norm:
        scale = max_norm / norm
        for arr in grads.params.values():
            arr *= scale
        for vec in grads.emb_rows.values():
            vec *= scale


def sgd_epoch(
    tagger: TaggerBase,
    sentences: Sequence[Sentence],
    hp: HyperParams,
    rng: np.random.Generator,
    singletons: frozenset[int] = frozenset(),
    clip_norm: float | None = None,
) -> float:
    """One pass in shuffled order, one SGD step per sentence; returns the
    mean per-sentence loss."""
    if len(sentences) == 0:
        raise ValueError("cannot run an epoch on an empty training set")
    encoded = _encode_gold(tagger, sentences)
    order = rng.permutation(len(encoded))
    params = tagger.param_arrays()
    total = 0.0
    for pos in order:
        ids, gold = encoded[pos]
        if singletons:
            ids = [
                UNK_INDEX if i in singletons and rng.random() < 0.5 else i
                for i in ids
            ]
        loss, grads = tagger.loss_and_grads(
            ids, gold, dropout=hp.dropout_rate, rng=rng
        )
        if not np.isfinite(loss):
            raise NumericError(f"non-finite training loss {loss!r}")
        if clip_norm is not None:
            _clip_grads(grads, clip_norm)
        for name, arr in params.items():
            arr -= hp.learning_rate * grads.params[name]
        if tagger.emb.trainable:
            for idx, vec in grads.emb_rows.items():
                tagger.emb.vectors[idx] -= hp.learning_rate * vec
        total += loss
    return total / len(encoded)


def validation_f1(tagger: TaggerBase, sentences: Sequence[Sentence]) -> float:
    """Strict micro-F1 of mask-free predictions against gold tags."""
    gold_spans = []
    pred_spans = []
    for sent in sentences:
        if sent.tags is None:
            raise DataError(f"sentence {sent.sid or ''} has no gold tags")
        gold_spans.append(iob_to_spans(sent.tags))
        pred = tagger.predict_tag_ids(tagger.encode(sent.tokens))
        pred_spans.append(iob_to_spans([tagger.tags[i] for i in pred]))
    return evaluate_strict(gold_spans, pred_spans).micro.f1


@dataclass(frozen=True)
class EpochRecord:
    epoch: int  # 1-based
    train_loss: float
    val_f1: float
    timestamp: float  # seconds since the epoch


@dataclass
class TrainRecord:
    epochs: list[EpochRecord]
    best_epoch: int  # 1-based

    @property
    def best_val_f1(self) -> float:
        return self.epochs[self.best_epoch - 1].val_f1

    def to_tsv(self) -> str:
        lines = [f"# best_epoch\t{self.best_epoch}", "epoch\ttrain_loss\tval_f1\ttimestamp"]
        for rec in self.epochs:
            lines.append(
                f"{rec.epoch}\t{rec.train_loss:.6f}\t{rec.val_f1:.2f}\t{rec.timestamp:.3f}"
            )
        return "\n".join(lines) + "\n"


def train(
    architecture: str,
    train_sentences: Sequence[Sentence],
    val_sentences: Sequence[Sentence],
    hp: HyperParams,
    tags: tuple[str, ...] = TAGS,
    clip_norm: float | None = None,
) -> tuple[Checkpoint, TrainRecord]:
    """Full training run; returns the best-on-validation checkpoint."""
    if len(train_sentences) == 0:
        raise ValueError("empty training set")
    if hp.max_epochs < 1:
        raise ValueError(f"max_epochs must be >= 1, got {hp.max_epochs}")
    vocab = build_vocabulary([s.tokens for s in train_sentences])
    rng = new_rng(hp.seed)
    tagger = create_tagger(architecture, vocab, hp.hidden, hp.dim, hp.window, rng, tags)
    singletons = singleton_token_ids(tagger, train_sentences)

    records: list[EpochRecord] = []
    best_f1 = -1.0
    best_epoch = 0
    best_ckpt: Checkpoint | None = None
    for epoch in range(1, hp.max_epochs + 1):
        mean_loss = sgd_epoch(tagger, train_sentences, hp, rng, singletons, clip_norm)
        f1 = validation_f1(tagger, val_sentences) if val_sentences else 0.0
        records.append(
            EpochRecord(epoch=epoch, train_loss=mean_loss, val_f1=f1, timestamp=time.time())
        )
        if f1 > best_f1:
            best_f1 = f1
            best_epoch = epoch
            best_ckpt = checkpoint_from_tagger(tagger, hp)
    assert best_ckpt is not None
    return best_ckpt, TrainRecord(epochs=records, best_epoch=best_epoch)


@dataclass(frozen=True)
class TrialRecord:
    index: int
    hyperparams: HyperParams
    val_f1: float
    best_epoch: int


@dataclass
class SearchResult:
    best_index: int
    best_checkpoint: Checkpoint
    best_record: TrainRecord
    trials: list[TrialRecord]

    @property
    def best_hyperparams(self) -> HyperParams:
        return self.trials[self.best_index].hyperparams

    def trials_tsv(self) -> str:
        lines = [
            f"# best_trial\t{self.best_index}",
            "trial\thidden\twindow\tdim\tlearning_rate\tdropout_rate\tseed\tbest_epoch\tval_f1",
        ]
        for t in self.trials:
            hp = t.hyperparams
            lines.append(
                f"{t.index}\t{hp.hidden}\t{hp.window}\t{hp.dim}"
                f"\t{hp.learning_rate:.6f}\t{hp.dropout_rate:.6f}\t{hp.seed}"
                f"\t{t.best_epoch}\t{t.val_f1:.2f}"
            )
        return "\n".join(lines) + "\n"


def _run_trial(args) -> tuple[int, Checkpoint, TrainRecord]:
    index, architecture, train_sents, val_sents, hp, tags, clip_norm = args
    ckpt, record = train(architecture, train_sents, val_sents, hp, tags, clip_norm)
    return index, ckpt, record


def random_search(
    architecture: str,
    sentences: Sequence[Sentence],
    trials: int,
    seed: int,
    ratio: float = 0.7,
    max_epochs: int = 100,
    tags: tuple[str, ...] = TAGS,
    clip_norm: float | None = None,
    jobs: int = 1,
) -> SearchResult:
    """Random search: one 70/30 split shared by all trials, per-trial
    hyperparameters sampled upfront, per-trial seeds derived from
    (seed, trial index) so results do not depend on scheduling."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    train_sents, val_sents = split_train_validation(sentences, ratio, derive_seed(seed, 0))
    sample_rng = new_rng(derive_seed(seed, 1))
    configs = [
        sample_hyperparams(sample_rng, max_epochs=max_epochs, seed=derive_seed(seed, 2 + i))
        for i in range(trials)
    ]
    work = [
        (i, architecture, train_sents, val_sents, hp, tags, clip_norm)
        for i, hp in enumerate(configs)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_trial, work))
    else:
        outcomes = [_run_trial(item) for item in work]
    outcomes.sort(key=lambda item: item[0])

    trial_records = []
    best: tuple[int, Checkpoint, TrainRecord] | None = None
    for index, ckpt, record in outcomes:
        trial_records.append(
            TrialRecord(
                index=index,
                hyperparams=configs[index],
                val_f1=record.best_val_f1,
                best_epoch=record.best_epoch,
            )
        )
        if best is None or record.best_val_f1 > best[2].best_val_f1:
            best = (index, ckpt, record)
    assert best is not None
    return SearchResult(
        best_index=best[0],
        best_checkpoint=best[1],
        best_record=best[2],
        trials=trial_records,
    )

"""Recurrent sequence taggers for drug name recognition.

Three architectures (Elman, Jordan, bidirectional LSTM-CRF) over trainable
context-window embeddings, with strict entity-level evaluation, seeded SGD
training, random hyperparameter search, and a batch CLI.
"""
from .checkpoint import (
    Checkpoint,
    checkpoint_from_tagger,
    load_checkpoint,
    save_checkpoint,
    tagger_from_checkpoint,
)
from .errors import DataError, DrugNerError, NumericError
from .evaluation import (
    ENTITY_CLASSES,
    TAGS,
    EntitySpan,
    EvalReport,
    evaluate_strict,
    iob_to_spans,
    spans_to_iob,
)
from .hyperparams import HyperParams, sample_hyperparams
from .models import create_tagger, predict_tags
from .training import random_search, sgd_epoch, split_train_validation, train

__version__ = "0.1.0"

__all__ = [
    "Checkpoint",
    "DataError",
    "DrugNerError",
    "ENTITY_CLASSES",
    "EntitySpan",
    "EvalReport",
    "HyperParams",
    "NumericError",
    "TAGS",
    "checkpoint_from_tagger",
    "create_tagger",
    "evaluate_strict",
    "iob_to_spans",
    "load_checkpoint",
    "predict_tags",
    "random_search",
    "sample_hyperparams",
    "save_checkpoint",
    "sgd_epoch",
    "spans_to_iob",
    "split_train_validation",
    "tagger_from_checkpoint",
    "train",
]

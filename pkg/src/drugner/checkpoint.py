"""Self-contained model checkpoints with a bit-exact binary layout.

File layout (all integers little-endian):

    bytes 0-7    magic "DNRTAG\\x00\\x01"
    bytes 8-11   format version (uint32)
    bytes 12-19  header length in bytes (uint64)
    then         UTF-8 JSON header
    then         raw float64 array data, little-endian, row-major,
                 concatenated in the header's manifest order

The JSON header carries the architecture id, hyperparameters, tag-set
listing, the index-ordered vocabulary, the embedding trainable flag, and a
manifest of (name, shape) for every parameter array. Loading a checkpoint
requires nothing else; save -> load -> save reproduces identical bytes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .fileio import atomic_write_bytes
from .hyperparams import HyperParams
from .models import TaggerBase, create_tagger
from .vocab import Vocabulary

MAGIC = b"DNRTAG\x00\x01"
FORMAT_VERSION = 1


@dataclass
class Checkpoint:
    architecture: str
    hyperparams: HyperParams
    vocab_words: list[str]
    tags: tuple[str, ...]
    arrays: dict[str, np.ndarray]  # includes the embedding table under "emb"
    emb_trainable: bool = True
    version: int = FORMAT_VERSION


def checkpoint_from_tagger(tagger: TaggerBase, hp: HyperParams) -> Checkpoint:
    """Deep-copied snapshot of a tagger's current parameters."""
    arrays = {name: arr.copy() for name, arr in tagger.param_arrays().items()}
    arrays["emb"] = tagger.emb.vectors.copy()
    return Checkpoint(
        architecture=tagger.arch,
        hyperparams=hp,
        vocab_words=list(tagger.vocab.words),
        tags=tuple(tagger.tags),
        arrays=arrays,
        emb_trainable=tagger.emb.trainable,
    )


def tagger_from_checkpoint(ckpt: Checkpoint) -> TaggerBase:
    """Rebuild a ready-to-predict tagger; prediction needs nothing else."""
    vocab = Vocabulary(list(ckpt.vocab_words))
    hp = ckpt.hyperparams
    tagger = create_tagger(
        ckpt.architecture, vocab, hp.hidden, hp.dim, hp.window,
        rng=None, tags=ckpt.tags,
    )
    live = tagger.param_arrays()
    live["emb"] = tagger.emb.vectors
    for name, arr in live.items():
        stored = ckpt.arrays.get(name)
        if stored is None:
            raise DataError(f"checkpoint is missing parameter array {name!r}")
        if stored.shape != arr.shape:
            raise DataError(
                f"checkpoint array {name!r} has shape {stored.shape}, "
                f"expected {arr.shape}"
            )
        arr[...] = stored
    tagger.emb.trainable = ckpt.emb_trainable
    return tagger


def save_checkpoint(ckpt: Checkpoint, path: str | Path) -> None:
    names = sorted(ckpt.arrays)
    header = {
        "architecture": ckpt.architecture,
        "hyperparams": ckpt.hyperparams.to_dict(),
        "tags": list(ckpt.tags),
        "vocab": ckpt.vocab_words,
        "emb_trainable": ckpt.emb_trainable,
        "arrays": [
            {"name": name, "shape": list(ckpt.arrays[name].shape)} for name in names
        ],
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    blob = bytearray()
    blob += MAGIC
    blob += np.uint32(ckpt.version).tobytes()
    blob += np.uint64(len(header_bytes)).tobytes()
    blob += header_bytes
    for name in names:
        arr = np.ascontiguousarray(ckpt.arrays[name], dtype="<f8")
        blob += arr.tobytes()
    atomic_write_bytes(path, bytes(blob))


def load_checkpoint(path: str | Path) -> Checkpoint:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read checkpoint {path}: {exc}") from exc
    if raw[:8] != MAGIC:
        raise DataError(f"{path} is not a checkpoint file (bad magic)")
    version = int(np.frombuffer(raw[8:12], dtype="<u4")[0])
    if version != FORMAT_VERSION:
        raise DataError(f"unsupported checkpoint format version {version}")
    header_len = int(np.frombuffer(raw[12:20], dtype="<u8")[0])
    try:
        header = json.loads(raw[20 : 20 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataError(f"corrupt checkpoint header in {path}: {exc}") from exc

    arrays: dict[str, np.ndarray] = {}
    offset = 20 + header_len
    for entry in header["arrays"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        end = offset + 8 * count
        if end > len(raw):
            raise DataError(f"checkpoint {path} truncated in array {entry['name']!r}")
        arrays[entry["name"]] = (
            np.frombuffer(raw[offset:end], dtype="<f8").reshape(shape).copy()
        )
        offset = end
    if offset != len(raw):
        raise DataError(f"checkpoint {path} has {len(raw) - offset} trailing bytes")
    return Checkpoint(
        architecture=header["architecture"],
        hyperparams=HyperParams.from_dict(header["hyperparams"]),
        vocab_words=list(header["vocab"]),
        tags=tuple(header["tags"]),
        arrays=arrays,
        emb_trainable=bool(header.get("emb_trainable", True)),
        version=version,
    )

"""Checkpoint container: one .npz holding config, vocabulary, and weights."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from ..vocab import Vocabulary
from .acgn import ACGN
from .concat import ConcatModel
from .config import ModelConfig

FORMAT_TAG = "acgn-checkpoint/1"


def save_checkpoint(model, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    meta = {
        "format": FORMAT_TAG,
        "kind": model.kind,
        "config": model.config.to_json(),
        "vocabulary": model.vocab.to_json(),
    }
    if model.kind == "acgn":
        meta["word_block_sizes"] = model.word_block_sizes
    else:
        meta["proj_channels"] = model.proj_channels
    arrays = {f"param/{k}": v for k, v in model.store.state_arrays().items()}
    with open(path, "wb") as f:
        np.savez(f, __meta__=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8),
                 **arrays)
    return path


def load_checkpoint(path):
    path = Path(path)
    with np.load(path) as data:
        meta = json.loads(bytes(data["__meta__"]).decode())
        if meta.get("format") != FORMAT_TAG:
            raise ValueError(f"not a checkpoint file: {path}")
        config = ModelConfig.from_json(meta["config"])
        vocab = Vocabulary.from_json(meta["vocabulary"])
        if meta["kind"] == "acgn":
            model = ACGN(config, vocab, word_block_sizes=meta["word_block_sizes"])
        elif meta["kind"] == "concat":
            model = ConcatModel(config, vocab, proj_channels=meta["proj_channels"],
                                match_count=None)
        else:
            raise ValueError(f"unknown model kind {meta['kind']!r}")
        arrays = {k[len("param/"):]: data[k] for k in data.files if k.startswith("param/")}
    model.store.load_arrays(arrays)
    return model


def checkpoint_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()

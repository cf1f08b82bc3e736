"""Ablation model: tiled action vector concatenated onto encoder features.

The capsule machinery is replaced by a dense projection of [latent,
tiled one-hot action vector]; everything downstream (recurrent predictor,
decoder) matches the capsule model. The projection width is solved so the
trainable parameter counts agree within 1%.
"""

from __future__ import annotations

import numpy as np

from .. import autodiff as ad
from ..vocab import Vocabulary
from .acgn import ACGN, HiddenState, command_batch
from .config import ModelConfig
from .layers import Conv, Decoder, Encoder, ParamStore, Predictor

MATCH_TOLERANCE = 0.01


def action_vector_length(vocab: Vocabulary) -> int:
    return sum(len(vocab.words[c]) for c in vocab.clauses)


class ConcatModel:
    kind = "concat"

    def __init__(self, config: ModelConfig, vocab: Vocabulary, seed: int = 0,
                 match_count: int | None = None, proj_channels: int | None = None):
        self.config = config
        self.vocab = vocab
        self.dtype = np.dtype(config.dtype)
        if match_count is None and proj_channels is None:
            match_count = ACGN(config, vocab, seed=seed).parameter_count()
        if proj_channels is None:
            proj_channels = _solve_projection(config, vocab, match_count)
        self.proj_channels = proj_channels
        self.store = ParamStore(self.dtype)
        rng = np.random.default_rng([seed, 0xC0CA])
        c_lat = config.latent_channels
        ch = config.hidden_channels
        a_len = action_vector_length(vocab)
        self.encoder = Encoder(self.store, rng, 3, config.enc_channels)
        self.proj = Conv(self.store, "act.proj", rng, c_lat + a_len,
                         proj_channels, k=1, gain=1.0)
        self.predictor = Predictor(self.store, rng, proj_channels, ch,
                                   config.lstm_layers)
        self.decoder = Decoder(self.store, rng, ch, config.enc_channels)
        if match_count is not None:
            diff = abs(self.parameter_count() - match_count) / match_count
            if diff > MATCH_TOLERANCE:
                raise ValueError(f"parameter match off by {diff:.2%}")

        self._offsets = {}
        off = 0
        for c in vocab.clauses:
            self._offsets[c] = off
            off += len(vocab.words[c])
        self._local = {}
        for gi, (clause, word) in enumerate(vocab.entries):
            self._local[gi] = self._offsets[clause] + vocab.words[clause].index(word)

    def action_vector(self, command) -> np.ndarray:
        """(B, A) concatenation of the per-clause one-hots."""
        idx = command if isinstance(command, np.ndarray) else command_batch([command], self.vocab)
        a_len = action_vector_length(self.vocab)
        out = np.zeros((idx.shape[0], a_len), dtype=self.dtype)
        for b in range(idx.shape[0]):
            for j in range(idx.shape[1]):
                out[b, self._local[int(idx[b, j])]] = 1.0
        return out

    def init_hidden(self, batch: int, n_slots: int = 1) -> HiddenState:
        if n_slots != 1:
            raise ValueError("the concatenation baseline is single-action")
        hw = self.config.latent_hw
        return HiddenState([self.predictor.init_state(batch, hw, self.dtype)])

    def forward(self, frame: ad.Tensor, commands, hidden: HiddenState):
        if len(commands) != 1 or len(hidden.slots) != 1:
            raise ValueError("the concatenation baseline takes exactly one command slot")
        latent, skips = self.encode(frame)
        vec = self.action_vector(self._as_idx(frame.shape[0], commands[0]))
        h, w = self.config.latent_hw
        tiled = ad.tile_spatial(ad.Tensor(vec), h, w)
        mixed = ad.relu(self.proj(ad.concat([latent, tiled])))
        out, new_state = self.predictor.step(mixed, hidden.slots[0])
        pred = self.decoder(out, skips)
        return pred, HiddenState([new_state])

    def _as_idx(self, batch, command) -> np.ndarray:
        if isinstance(command, np.ndarray):
            idx = command
        else:
            idx = np.repeat(command_batch([command], self.vocab), batch, axis=0)
        if idx.ndim == 1:
            idx = np.repeat(idx[None, :], batch, axis=0)
        return idx

    def encode(self, frame):
        b, c, h, w = frame.shape
        if (h, w) != (self.config.height, self.config.width) or c != 3:
            raise ValueError(f"bad frame shape {frame.shape}")
        return self.encoder(frame)

    def rollout(self, x0, command_seq, hidden=None):
        if not command_seq:
            raise ValueError("command sequence is empty")
        with ad.no_grad():
            frame = ad.Tensor(np.ascontiguousarray(x0, dtype=self.dtype))
            if frame.data.ndim == 3:
                frame = ad.Tensor(frame.data[None])
            if hidden is None:
                hidden = self.init_hidden(frame.shape[0], len(command_seq[0]))
            preds = []
            for commands in command_seq:
                pred, hidden = self.forward(frame, commands, hidden)
                preds.append(pred.data.copy())
                frame = pred
        return preds, hidden

    def parameter_count(self) -> int:
        return self.store.count()


def _solve_projection(config: ModelConfig, vocab: Vocabulary, target: int) -> int:
    """Projection width whose total parameter count best matches target."""

    def count_for(p):
        return ConcatModel(config, vocab, proj_channels=p, match_count=None).parameter_count()

    p0, p1 = 16, 48
    c0, c1 = count_for(p0), count_for(p1)
    slope = (c1 - c0) / (p1 - p0)
    base = c0 - slope * p0
    guess = max(8, round((target - base) / slope))
    best = min(range(max(8, guess - 3), guess + 4), key=lambda p: abs(count_for(p) - target))
    return best

"""The capsule video-prediction network.

Pipeline per step: encode the frame, compute one capsule map per
dictionary word, let each clause's one-hot select and transform its word
capsule (no iterative routing — the label already fixes the coupling),
run the selected capsules through a per-slot recurrent predictor, fuse
slot outputs with a projection of the full word-capsule stack, decode.

Commands enter as arrays of global word indices, shape (B, n_clauses);
`command_batch` builds them from ActionCommands or clause encodings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import autodiff as ad
from ..errors import VocabularyError
from ..vocab import ActionCommand, ClauseEncoding, Vocabulary
from .config import ModelConfig
from .layers import Conv, Decoder, Encoder, ParamStore, Predictor, conv_init


@dataclass
class HiddenState:
    """Per-slot recurrent state: one (h, c) pair per predictor layer."""

    slots: list[list[tuple[ad.Tensor, ad.Tensor]]]

    def __len__(self):
        return len(self.slots)

    def detach(self) -> "HiddenState":
        return HiddenState([[(h.detach(), c.detach()) for h, c in slot]
                            for slot in self.slots])

    def arrays(self) -> list[list[tuple[np.ndarray, np.ndarray]]]:
        return [[(h.data.copy(), c.data.copy()) for h, c in slot] for slot in self.slots]

    @staticmethod
    def from_arrays(arrays) -> "HiddenState":
        return HiddenState([[(ad.Tensor(np.asarray(h)), ad.Tensor(np.asarray(c)))
                             for h, c in slot] for slot in arrays])


def command_batch(commands, vocab: Vocabulary) -> np.ndarray:
    """(B, n_clauses) global word indices from commands or clause encodings."""
    index = {e: i for i, e in enumerate(vocab.entries)}
    rows = []
    for cmd in commands:
        if isinstance(cmd, ClauseEncoding):
            cmd.validate()
            local = cmd.local_indices()
            words = {c: vocab.words[c][local[c]] for c in vocab.clauses}
        elif isinstance(cmd, ActionCommand):
            words = {c: vocab.clause_word(cmd, c) for c in vocab.clauses}
        else:
            raise TypeError(f"cannot encode {type(cmd)}")
        row = []
        for c in vocab.clauses:
            key = (c, words[c])
            if key not in index:
                raise VocabularyError(c, words[c])
            row.append(index[key])
        rows.append(row)
    return np.asarray(rows, dtype=np.int64)


class ACGN:
    kind = "acgn"

    def __init__(self, config: ModelConfig, vocab: Vocabulary, seed: int = 0,
                 word_block_sizes: list[int] | None = None):
        self.config = config
        self.vocab = vocab
        self.dtype = np.dtype(config.dtype)
        self.store = ParamStore(self.dtype)
        rng = np.random.default_rng([seed, 0xACC1])
        k = config.capsule_dim
        c_lat = config.latent_channels
        ch = config.hidden_channels
        self.n_clauses = len(vocab.clauses)
        self.word_block_sizes = list(word_block_sizes or [vocab.n_words])
        if sum(self.word_block_sizes) != vocab.n_words:
            raise ValueError("word blocks do not cover the vocabulary")

        self.encoder = Encoder(self.store, rng, 3, config.enc_channels)
        self.word_w = []
        self.word_b = []
        for bi, n in enumerate(self.word_block_sizes):
            self.word_w.append(self.store.add(
                f"words.w{bi}", conv_init(rng, c_lat, n * k, 1, gain=1.0)))
            self.word_b.append(self.store.add(f"words.b{bi}", np.zeros(n * k)))
        if config.transform_per_word:
            self.transforms = {}
            for j, clause in enumerate(vocab.clauses):
                for li, word in enumerate(vocab.words[clause]):
                    self.transforms[(j, li)] = (
                        self.store.add(f"route.t{j}.{li}.w", conv_init(rng, k, k, 3, gain=1.0)),
                        self.store.add(f"route.t{j}.{li}.b", np.zeros(k)),
                    )
        else:
            self.transforms = {
                j: (self.store.add(f"route.t{j}.w", conv_init(rng, k, k, 3, gain=1.0)),
                    self.store.add(f"route.t{j}.b", np.zeros(k)))
                for j in range(self.n_clauses)
            }
        self.predictor = Predictor(self.store, rng, self.n_clauses * k, ch,
                                   config.lstm_layers)
        self.fuse_w = []
        for bi, n in enumerate(self.word_block_sizes):
            init = conv_init(rng, n * k, ch, 1, gain=1.0) if bi == 0 \
                else np.zeros((ch, n * k, 1, 1))
            self.fuse_w.append(self.store.add(f"fuse.w{bi}", init))
        self.fuse_b = self.store.add("fuse.b", np.zeros(ch))
        self.decoder = Decoder(self.store, rng, ch, config.enc_channels)

        self._entry_index = {e: i for i, e in enumerate(vocab.entries)}
        self._global_to_local = {}
        for clause in vocab.clauses:
            for li, word in enumerate(vocab.words[clause]):
                self._global_to_local[self._entry_index[(clause, word)]] = li
        self._zero_bias = {}

    # ----- pipeline stages -------------------------------------------------

    def encode(self, frame: ad.Tensor):
        """(B, 3, H, W) -> latent (B, C, H/8, W/8) plus multi-scale skips."""
        b, c, h, w = frame.shape
        if (h, w) != (self.config.height, self.config.width) or c != 3:
            raise ValueError(f"expected (B, 3, {self.config.height}, {self.config.width}), "
                             f"got {frame.shape}")
        return self.encoder(frame)

    def word_capsules(self, latent: ad.Tensor) -> ad.Tensor:
        """One capsule map per dictionary word: (B, N*K, H', W')."""
        parts = [ad.conv2d(latent, w, b, stride=1, pad=0)
                 for w, b in zip(self.word_w, self.word_b)]
        return parts[0] if len(parts) == 1 else ad.concat(parts)

    def _transform(self, j: int, idx: np.ndarray, u: ad.Tensor) -> ad.Tensor:
        if not self.config.transform_per_word:
            w, b = self.transforms[j]
            return ad.conv2d(u, w, b, pad=1)
        # per-word transforms: apply item-wise (correctness path, small batches)
        outs = []
        for i in range(u.shape[0]):
            li = self._global_to_local[int(idx[i])]
            w, b = self.transforms[(j, li)]
            outs.append(ad.conv2d(ad.narrow(u, i, 1, axis=0), w, b, pad=1))
        return ad.concat(outs, axis=0)

    def route(self, words: ad.Tensor, command) -> ad.Tensor:
        """Select each clause's word capsule, transform, squash, concatenate.

        `command` is a (B, n_clauses) index array, a ClauseEncoding, or an
        ActionCommand. The one-hot coupling makes routing a pure selection,
        so non-selected word capsules cannot influence the output.
        """
        idx = self._as_indices(words.shape[0], command)
        k = self.config.capsule_dim
        caps = []
        for j in range(self.n_clauses):
            u = ad.select_words(words, idx[:, j], k)
            v = ad.squash(self._transform(j, idx[:, j], u))
            caps.append(v)
        return ad.concat(caps)

    def _as_indices(self, batch: int, command) -> np.ndarray:
        if isinstance(command, (ClauseEncoding, ActionCommand)):
            idx = command_batch([command], self.vocab)
            idx = np.repeat(idx, batch, axis=0)
        else:
            idx = np.asarray(command, dtype=np.int64)
            if idx.ndim == 1:
                idx = np.repeat(idx[None, :], batch, axis=0)
        if idx.shape != (batch, self.n_clauses):
            raise ValueError(f"command indices must be ({batch}, {self.n_clauses})")
        if idx.min() < 0 or idx.max() >= self.vocab.n_words:
            raise VocabularyError("<index>", int(idx.max()), "outside the dictionary")
        return idx

    def predict_step(self, action_caps: ad.Tensor, slot_state):
        """One recurrent update for one action slot."""
        return self.predictor.step(action_caps, slot_state)

    def fuse(self, slot_latents: list[ad.Tensor], words: ad.Tensor) -> ad.Tensor:
        """Sum slot outputs pointwise, plus a 1x1 projection of the word stack."""
        if not slot_latents:
            raise ValueError("fuse needs at least one slot")
        total = slot_latents[0]
        for extra in slot_latents[1:]:
            total = ad.add(total, extra)
        k = self.config.capsule_dim
        offset = 0
        for bi, n in enumerate(self.word_block_sizes):
            block = ad.narrow(words, offset * k, n * k)
            bias = self.fuse_b if bi == 0 else self._zeros_like_bias(bi)
            total = ad.add(total, ad.conv2d(block, self.fuse_w[bi], bias, pad=0))
            offset += n
        return total

    def _zeros_like_bias(self, bi):
        if bi not in self._zero_bias:
            self._zero_bias[bi] = ad.Tensor(
                np.zeros(self.config.hidden_channels, dtype=self.dtype))
        return self._zero_bias[bi]

    def decode(self, fused: ad.Tensor, skips) -> ad.Tensor:
        return self.decoder(fused, skips)

    # ----- full step and rollout -------------------------------------------

    def init_hidden(self, batch: int, n_slots: int = 1) -> HiddenState:
        if not 1 <= n_slots <= self.config.a_max:
            raise ValueError(f"slot count must be in [1, {self.config.a_max}]")
        hw = self.config.latent_hw
        return HiddenState([self.predictor.init_state(batch, hw, self.dtype)
                            for _ in range(n_slots)])

    def forward(self, frame: ad.Tensor, commands, hidden: HiddenState):
        """One prediction step for one or more concurrent command slots."""
        if len(commands) != len(hidden.slots):
            raise ValueError(f"{len(commands)} commands for {len(hidden.slots)} hidden slots")
        if not 1 <= len(commands) <= self.config.a_max:
            raise ValueError(f"slot count must be in [1, {self.config.a_max}]")
        latent, skips = self.encode(frame)
        words = self.word_capsules(latent)
        slot_outs = []
        new_slots = []
        for command, slot_state in zip(commands, hidden.slots):
            caps = self.route(words, command)
            out, new_state = self.predict_step(caps, slot_state)
            slot_outs.append(out)
            new_slots.append(new_state)
        fused = self.fuse(slot_outs, words)
        pred = self.decode(fused, skips)
        return pred, HiddenState(new_slots)

    def rollout(self, x0: np.ndarray, command_seq, hidden: HiddenState | None = None):
        """Closed-loop prediction: feed each output back as the next input.

        command_seq: one entry per predicted frame; each entry is the list
        of per-slot commands for that step.
        """
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

    # ----- vocabulary extension ---------------------------------------------

    def extend_vocabulary(self, new_words: dict[str, list[str]], seed: int = 0) -> "ACGN":
        """New model accepting extra words; existing behavior is unchanged.

        New word-capsule filters are freshly initialized; their fusion
        rows start at zero so old-vocabulary predictions are identical.
        """
        new_vocab = self.vocab.extend(new_words)
        n_new = new_vocab.n_words - self.vocab.n_words
        blocks = self.word_block_sizes + [n_new]
        model = ACGN(self.config, new_vocab, seed=seed, word_block_sizes=blocks)
        for name, tensor in self.store.params.items():
            model.store.params[name].data = tensor.data.copy()
        return model

    def parameter_count(self) -> int:
        return self.store.count()

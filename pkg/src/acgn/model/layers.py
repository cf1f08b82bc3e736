"""Parameter store and layer building blocks on top of the autodiff ops."""

from __future__ import annotations

import numpy as np

from .. import autodiff as ad


class ParamStore:
    """Ordered name -> Tensor registry; the unit of checkpointing."""

    def __init__(self, dtype=np.float32):
        self.dtype = np.dtype(dtype)
        self.params: dict[str, ad.Tensor] = {}

    def add(self, name: str, array: np.ndarray) -> ad.Tensor:
        if name in self.params:
            raise KeyError(f"duplicate parameter {name}")
        t = ad.parameter(np.ascontiguousarray(array, dtype=self.dtype))
        self.params[name] = t
        return t

    def tensors(self) -> list[ad.Tensor]:
        return list(self.params.values())

    def count(self) -> int:
        return sum(int(t.data.size) for t in self.params.values())

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {k: v.data for k, v in self.params.items()}

    def load_arrays(self, arrays: dict[str, np.ndarray]):
        missing = set(self.params) - set(arrays)
        if missing:
            raise KeyError(f"checkpoint missing parameters: {sorted(missing)[:4]}")
        for k, t in self.params.items():
            a = np.ascontiguousarray(arrays[k], dtype=self.dtype)
            if a.shape != t.data.shape:
                raise ValueError(f"shape mismatch for {k}: {a.shape} vs {t.data.shape}")
            t.data = a


def conv_init(rng, cin, cout, k, gain=2.0):
    """Fan-in-scaled normal init (gain 2 for relu layers, 1 for linear/gates)."""
    fan_in = cin * k * k
    return rng.normal(0.0, np.sqrt(gain / fan_in), size=(cout, cin, k, k))


class Conv:
    def __init__(self, store: ParamStore, name: str, rng, cin, cout,
                 k=3, stride=1, gain=2.0):
        self.stride = stride
        self.pad = k // 2
        self.w = store.add(f"{name}.w", conv_init(rng, cin, cout, k, gain))
        self.b = store.add(f"{name}.b", np.zeros(cout))

    def __call__(self, x):
        return ad.conv2d(x, self.w, self.b, stride=self.stride, pad=self.pad)


class ConvLSTMCell:
    """Convolutional LSTM; gates from a single conv over [x, h]."""

    def __init__(self, store: ParamStore, name: str, rng, cin, ch):
        self.ch = ch
        self.w = store.add(f"{name}.w", conv_init(rng, cin + ch, 4 * ch, 3, gain=1.0))
        bias = np.zeros(4 * ch)
        bias[ch:2 * ch] = 1.0  # forget-gate bias keeps early memory stable
        self.b = store.add(f"{name}.b", bias)

    def step(self, x, h, c):
        gates = ad.conv2d(ad.concat([x, h]), self.w, self.b, pad=1)
        ch = self.ch
        i = ad.sigmoid(ad.narrow(gates, 0, ch))
        f = ad.sigmoid(ad.narrow(gates, ch, ch))
        o = ad.sigmoid(ad.narrow(gates, 2 * ch, ch))
        g = ad.tanh(ad.narrow(gates, 3 * ch, ch))
        c_next = ad.add(ad.mul(f, c), ad.mul(i, g))
        h_next = ad.mul(o, ad.tanh(c_next))
        return h_next, c_next


class Encoder:
    """VGG-style stack: stride-2 stages down to 1/8, final stage resolution-preserving."""

    def __init__(self, store: ParamStore, rng, in_ch, channels):
        e0, e1, e2 = channels
        self.c0 = Conv(store, "enc.c0", rng, in_ch, e0, stride=1)
        self.c1 = Conv(store, "enc.c1", rng, e0, e0, stride=2)
        self.c2 = Conv(store, "enc.c2", rng, e0, e1, stride=2)
        self.c3 = Conv(store, "enc.c3", rng, e1, e2, stride=2)
        self.c4 = Conv(store, "enc.c4", rng, e2, e2, stride=1)

    def __call__(self, x):
        h0 = ad.relu(self.c0(x))
        s1 = ad.relu(self.c1(h0))     # 1/2 resolution
        s2 = ad.relu(self.c2(s1))     # 1/4
        h3 = ad.relu(self.c3(s2))     # 1/8
        latent = ad.relu(self.c4(h3))
        return latent, (s1, s2)


class Decoder:
    """Mirror of the encoder: upsample, merge skip features, sigmoid output."""

    def __init__(self, store: ParamStore, rng, in_ch, enc_channels, out_ch=3):
        e0, e1, e2 = enc_channels
        self.d0 = Conv(store, "dec.d0", rng, in_ch, e2, stride=1)
        self.d1 = Conv(store, "dec.d1", rng, e2 + e1, e1, stride=1)
        self.d2 = Conv(store, "dec.d2", rng, e1 + e0, e0, stride=1)
        self.d3 = Conv(store, "dec.d3", rng, e0, e0 // 2, stride=1)
        self.out = Conv(store, "dec.out", rng, e0 // 2, out_ch, stride=1, gain=1.0)

    def __call__(self, fused, skips):
        s1, s2 = skips
        h = ad.relu(self.d0(fused))
        h = ad.relu(self.d1(ad.concat([ad.upsample2(h), s2])))
        h = ad.relu(self.d2(ad.concat([ad.upsample2(h), s1])))
        h = ad.relu(self.d3(ad.upsample2(h)))
        return ad.sigmoid(self.out(h))


class Predictor:
    """Input projection plus a residual ConvLSTM stack, shared across slots."""

    def __init__(self, store: ParamStore, rng, in_ch, ch, layers):
        self.ch = ch
        self.layers = layers
        self.pre = Conv(store, "pred.pre", rng, in_ch, ch, k=1, gain=1.0)
        self.cells = [ConvLSTMCell(store, f"pred.lstm{i}", rng, ch, ch)
                      for i in range(layers)]

    def init_state(self, batch, hw, dtype):
        h, w = hw
        zeros = lambda: ad.Tensor(np.zeros((batch, self.ch, h, w), dtype=dtype))
        return [(zeros(), zeros()) for _ in range(self.layers)]

    def step(self, x, state):
        """state: list of (h, c) per layer; returns (output, new state)."""
        out = self.pre(x)
        new_state = []
        for cell, (h, c) in zip(self.cells, state):
            h_next, c_next = cell.step(out, h, c)
            out = ad.add(out, h_next)  # residual: each layer adds its input
            new_state.append((h_next, c_next))
        return out, new_state

"""Minimal reverse-mode autodiff over numpy arrays.

Every op builds a node with a backward closure; `backward()` runs a
topological sweep and accumulates into `.grad`. Conv lowering and
upsampling dispatch through the selected kernel backend. Convolution
backward recomputes its im2col rows instead of retaining them, which
keeps BPTT over frame windows inside a few hundred MB.
"""

from __future__ import annotations

import contextlib

import numpy as np

from . import kernels as K

_grad_enabled = True


@contextlib.contextmanager
def no_grad():
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad=False):
        self.data = np.asarray(data)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = ()
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def item(self):
        return float(self.data)

    def detach(self):
        return Tensor(self.data)

    def zero_grad(self):
        self.grad = None

    def backward(self, free_graph=True):
        if self.data.size != 1:
            raise ValueError("backward() requires a scalar tensor")
        topo = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen or not node.requires_grad:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                stack.append((p, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward()
            if free_graph:
                node._parents = ()
                node._backward = None

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}, grad={self.requires_grad})"


def _result(data, parents, backward):
    out = Tensor(data)
    if _grad_enabled and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(p for p in parents if p.requires_grad)
        out._backward = backward
    return out


def _accum(t, g, fresh=False):
    """Accumulate g into t.grad.

    fresh=True promises g is a newly allocated array the caller will not
    reuse, so it can be adopted without copying. Pass-through gradients
    (e.g. add handing out.grad to its parents) must copy, otherwise two
    tensors could share one grad buffer and corrupt each other.
    """
    if not t.requires_grad:
        return
    if t.grad is None:
        t.grad = np.asarray(g) if fresh else np.array(g, copy=True)
    else:
        t.grad += g


def _unbroadcast(g, shape):
    """Sum g down to `shape` (inverse of numpy broadcasting)."""
    extra = g.ndim - len(shape)
    if extra:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


def add(a, b):
    out_data = a.data + b.data

    def backward():
        _accum(a, _unbroadcast(out.grad, a.data.shape))
        _accum(b, _unbroadcast(out.grad, b.data.shape))

    out = _result(out_data, (a, b), backward)
    return out


def sub(a, b):
    out_data = a.data - b.data

    def backward():
        _accum(a, _unbroadcast(out.grad, a.data.shape))
        _accum(b, _unbroadcast(-out.grad, b.data.shape), fresh=True)

    out = _result(out_data, (a, b), backward)
    return out


def mul(a, b):
    out_data = a.data * b.data

    def backward():
        _accum(a, _unbroadcast(out.grad * b.data, a.data.shape), fresh=True)
        _accum(b, _unbroadcast(out.grad * a.data, b.data.shape), fresh=True)

    out = _result(out_data, (a, b), backward)
    return out


def div(a, b):
    out_data = a.data / b.data

    def backward():
        _accum(a, _unbroadcast(out.grad / b.data, a.data.shape), fresh=True)
        _accum(b, _unbroadcast(-out.grad * out_data / b.data, b.data.shape), fresh=True)

    out = _result(out_data, (a, b), backward)
    return out


def smul(x, s):
    out_data = x.data * x.data.dtype.type(s)

    def backward():
        _accum(x, out.grad * x.data.dtype.type(s), fresh=True)

    out = _result(out_data, (x,), backward)
    return out


def sadd(x, s):
    out_data = x.data + x.data.dtype.type(s)

    def backward():
        _accum(x, out.grad)

    out = _result(out_data, (x,), backward)
    return out


def square(x):
    out_data = x.data * x.data

    def backward():
        _accum(x, out.grad * (2.0 * x.data), fresh=True)

    out = _result(out_data, (x,), backward)
    return out


def sqrt(x):
    out_data = np.sqrt(x.data)

    def backward():
        _accum(x, out.grad * (0.5 / out_data), fresh=True)

    out = _result(out_data, (x,), backward)
    return out


def sigmoid(x):
    out_data = 1.0 / (1.0 + np.exp(-x.data))

    def backward():
        _accum(x, out.grad * out_data * (1.0 - out_data), fresh=True)

    out = _result(out_data, (x,), backward)
    return out


def tanh(x):
    out_data = np.tanh(x.data)

    def backward():
        _accum(x, out.grad * (1.0 - out_data * out_data), fresh=True)

    out = _result(out_data, (x,), backward)
    return out


def relu(x):
    out_data = np.maximum(x.data, 0)

    def backward():
        _accum(x, out.grad * (x.data > 0), fresh=True)

    out = _result(out_data, (x,), backward)
    return out


def mean(x):
    out_data = np.asarray(x.data.mean())

    def backward():
        _accum(x, np.full_like(x.data, out.grad / x.data.size), fresh=True)

    out = _result(out_data, (x,), backward)
    return out


def sum_channels(x):
    """Sum over axis 1, keepdims."""
    out_data = x.data.sum(axis=1, keepdims=True)

    def backward():
        _accum(x, np.broadcast_to(out.grad, x.data.shape).copy(), fresh=True)

    out = _result(out_data, (x,), backward)
    return out


def concat(tensors, axis=1):
    out_data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]

    def backward():
        offset = 0
        for t, size in zip(tensors, sizes):
            idx = [slice(None)] * out_data.ndim
            idx[axis] = slice(offset, offset + size)
            _accum(t, out.grad[tuple(idx)])
            offset += size

    out = _result(out_data, tuple(tensors), backward)
    return out


def narrow(x, start, length, axis=1):
    idx = [slice(None)] * x.data.ndim
    idx[axis] = slice(start, start + length)
    idx = tuple(idx)
    out_data = np.ascontiguousarray(x.data[idx])

    def backward():
        g = np.zeros_like(x.data)
        g[idx] = out.grad
        _accum(x, g, fresh=True)

    out = _result(out_data, (x,), backward)
    return out


def _conv1x1(x, w, b):
    xd, wd = x.data, w.data
    bsz, cin, h, wdt = xd.shape
    cout = wd.shape[0]
    wmat = wd.reshape(cout, cin)
    x3 = xd.reshape(bsz, cin, h * wdt)
    y3 = np.matmul(wmat, x3)
    y3 += b.data[:, None]
    out_data = y3.reshape(bsz, cout, h, wdt)

    def backward():
        g3 = out.grad.reshape(bsz, cout, h * wdt)
        if b.requires_grad:
            _accum(b, g3.sum(axis=(0, 2)), fresh=True)
        if w.requires_grad:
            dw = np.matmul(g3, x3.transpose(0, 2, 1)).sum(axis=0)
            _accum(w, dw.reshape(wd.shape), fresh=True)
        if x.requires_grad:
            dx = np.matmul(wmat.T, g3)
            _accum(x, dx.reshape(xd.shape), fresh=True)

    out = _result(out_data, (x, w, b), backward)
    return out


def conv2d(x, w, b, stride=1, pad=1):
    """2-D convolution, NCHW; weights (Cout, Cin, kh, kw).

    Backward recomputes the im2col patches rather than retaining them,
    trading ~15% conv time for a several-fold smaller BPTT footprint.
    """
    xd, wd = x.data, w.data
    cout, cin, kh, kw = wd.shape
    if kh == 1 and kw == 1 and stride == 1 and pad == 0:
        return _conv1x1(x, w, b)
    bsz, _, h, wdt = xd.shape
    oh = (h + 2 * pad - kh) // stride + 1
    ow = (wdt + 2 * pad - kw) // stride + 1
    wmat = wd.reshape(cout, -1)
    cols = K.im2col(xd, kh, kw, stride, pad)
    y2 = wmat @ cols
    y2 += b.data[:, None]
    out_data = np.ascontiguousarray(y2.reshape(cout, bsz, oh, ow).transpose(1, 0, 2, 3))

    def backward():
        g2 = np.ascontiguousarray(out.grad.transpose(1, 0, 2, 3)).reshape(cout, -1)
        if b.requires_grad:
            _accum(b, g2.sum(axis=1), fresh=True)
        if w.requires_grad:
            cols_again = K.im2col(xd, kh, kw, stride, pad)
            _accum(w, (g2 @ cols_again.T).reshape(wd.shape), fresh=True)
        if x.requires_grad:
            dcols = wmat.T @ g2
            _accum(x, K.col2im(dcols, xd.shape, kh, kw, stride, pad), fresh=True)

    out = _result(out_data, (x, w, b), backward)
    return out


def upsample2(x):
    out_data = K.upsample2(x.data)

    def backward():
        _accum(x, K.upsample2_grad(out.grad), fresh=True)

    out = _result(out_data, (x,), backward)
    return out


def select_words(x, word_idx, k):
    """Per-item channel-block gather: out[i] = x[i, idx[i]*k:(idx[i]+1)*k]."""
    idx = np.asarray(word_idx, dtype=np.int64)
    bsz = x.data.shape[0]
    if idx.shape != (bsz,):
        raise ValueError(f"word_idx must have shape ({bsz},), got {idx.shape}")
    rows = np.arange(bsz)[:, None]
    chans = idx[:, None] * k + np.arange(k)[None, :]
    out_data = np.ascontiguousarray(x.data[rows, chans])

    def backward():
        g = np.zeros_like(x.data)
        for i in range(bsz):
            g[i, idx[i] * k:(idx[i] + 1) * k] += out.grad[i]
        _accum(x, g, fresh=True)

    out = _result(out_data, (x,), backward)
    return out


def tile_spatial(v, h, w):
    """Broadcast (B, C) to (B, C, h, w)."""
    out_data = np.ascontiguousarray(
        np.broadcast_to(v.data[:, :, None, None], v.data.shape + (h, w))
    )

    def backward():
        _accum(v, out.grad.sum(axis=(2, 3)), fresh=True)

    out = _result(out_data, (v,), backward)
    return out


def squash(s, eps=1e-12):
    """Capsule nonlinearity per spatial position over channel axis.

    v = s * ||s|| / (1 + ||s||^2): keeps direction, bounds the norm
    below 1, and extends continuously to v = 0 at s = 0.
    """
    n2 = sum_channels(square(s))
    n = sqrt(sadd(n2, eps))
    return mul(s, div(n, sadd(n2, 1.0)))


def mse(a, b):
    """Mean over all elements of the squared difference."""
    return mean(square(sub(a, b)))


def parameter(data):
    return Tensor(np.asarray(data), requires_grad=True)


def global_grad_norm(params):
    total = 0.0
    for p in params:
        if p.grad is not None:
            total += float((p.grad.astype(np.float64) ** 2).sum())
    return float(np.sqrt(total))


def clip_grad_norm(params, max_norm):
    norm = global_grad_norm(params)
    if norm > max_norm and norm > 0:
        scale = max_norm / norm
        for p in params:
            if p.grad is not None:
                p.grad *= p.grad.dtype.type(scale)
    return norm

"""Pure-numpy reference implementations of the hot array kernels.

These are the fallback twins of the numba kernels; each pair accumulates
in the same order per output element, so both backends produce identical
bits on one platform.

Patch matrices use the transposed layout (C*kh*kw, B*OH*OW): written
row-contiguously, fed to GEMM without further copies.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def im2col(x, kh, kw, stride, pad):
    """Lower (B, C, H, W) into patch columns of shape (C*kh*kw, B*OH*OW)."""
    b, c, h, w = x.shape
    oh = (h + 2 * pad - kh) // stride + 1
    ow = (w + 2 * pad - kw) // stride + 1
    if pad:
        xp = np.zeros((b, c, h + 2 * pad, w + 2 * pad), dtype=x.dtype)
        xp[:, :, pad:pad + h, pad:pad + w] = x
    else:
        xp = x
    win = sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
    # (B, C, OH, OW, kh, kw) -> (C, kh, kw, B, OH, OW)
    cols = np.ascontiguousarray(win.transpose(1, 4, 5, 0, 2, 3))
    return cols.reshape(c * kh * kw, b * oh * ow)


def col2im(cols, x_shape, kh, kw, stride, pad):
    """Scatter-add patch columns back onto the input grid (adjoint of im2col)."""
    b, c, h, w = x_shape
    oh = (h + 2 * pad - kh) // stride + 1
    ow = (w + 2 * pad - kw) // stride + 1
    dxp = np.zeros((b, c, h + 2 * pad, w + 2 * pad), dtype=cols.dtype)
    cols6 = cols.reshape(c, kh, kw, b, oh, ow)
    for i in range(kh):
        for j in range(kw):
            dxp[:, :, i:i + stride * oh:stride, j:j + stride * ow:stride] += \
                cols6[:, i, j].transpose(1, 0, 2, 3)
    if pad:
        return dxp[:, :, pad:pad + h, pad:pad + w].copy()
    return dxp


def upsample2(x):
    """Nearest-neighbor 2x upsampling of (B, C, H, W)."""
    return np.repeat(np.repeat(x, 2, axis=2), 2, axis=3)


def upsample2_grad(dy):
    """Adjoint of upsample2: sum each 2x2 block."""
    b, c, h2, w2 = dy.shape
    d = dy.reshape(b, c, h2 // 2, 2, w2 // 2, 2)
    return d[:, :, :, 0, :, 0] + d[:, :, :, 0, :, 1] + d[:, :, :, 1, :, 0] + d[:, :, :, 1, :, 1]

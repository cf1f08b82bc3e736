"""Numba-compiled twins of the numpy kernels.

im2col writes each (c, i, j) patch row as contiguous runs over the output
columns, which is what makes it faster than generic strided copies.
Accumulation order matches numpy_ops element-for-element.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def im2col(x, kh, kw, stride, pad):
    b, c, h, w = x.shape
    oh = (h + 2 * pad - kh) // stride + 1
    ow = (w + 2 * pad - kw) // stride + 1
    cols = np.zeros((c * kh * kw, b * oh * ow), dtype=x.dtype)
    for ci in range(c):
        for i in range(kh):
            for j in range(kw):
                row = (ci * kh + i) * kw + j
                # valid output columns: 0 <= oy*stride + i - pad < h (same for x)
                for bi in range(b):
                    base = bi * oh * ow
                    for oy in range(oh):
                        y = oy * stride + i - pad
                        if y < 0 or y >= h:
                            continue
                        ox0 = 0
                        while ox0 * stride + j - pad < 0:
                            ox0 += 1
                        ox1 = ow
                        while ox1 > ox0 and (ox1 - 1) * stride + j - pad >= w:
                            ox1 -= 1
                        dst = base + oy * ow
                        src = x[bi, ci, y]
                        lo = ox0 * stride + j - pad
                        hi = (ox1 - 1) * stride + j - pad + 1
                        if stride == 1:
                            cols[row, dst + ox0:dst + ox1] = src[lo:hi]
                        else:
                            cols[row, dst + ox0:dst + ox1] = src[lo:hi:stride]
    return cols


@njit(cache=True)
def col2im(cols, x_shape, kh, kw, stride, pad):
    b, c, h, w = x_shape
    oh = (h + 2 * pad - kh) // stride + 1
    ow = (w + 2 * pad - kw) // stride + 1
    dx = np.zeros((b, c, h, w), dtype=cols.dtype)
    for i in range(kh):
        for j in range(kw):
            for ci in range(c):
                row = (ci * kh + i) * kw + j
                for bi in range(b):
                    base = bi * oh * ow
                    for oy in range(oh):
                        y = oy * stride + i - pad
                        if y < 0 or y >= h:
                            continue
                        ox0 = 0
                        while ox0 * stride + j - pad < 0:
                            ox0 += 1
                        ox1 = ow
                        while ox1 > ox0 and (ox1 - 1) * stride + j - pad >= w:
                            ox1 -= 1
                        src = base + oy * ow
                        dst = dx[bi, ci, y]
                        lo = ox0 * stride + j - pad
                        hi = (ox1 - 1) * stride + j - pad + 1
                        if stride == 1:
                            dst[lo:hi] += cols[row, src + ox0:src + ox1]
                        else:
                            dst[lo:hi:stride] += cols[row, src + ox0:src + ox1]
    return dx


@njit(cache=True)
def upsample2(x):
    b, c, h, w = x.shape
    out = np.empty((b, c, 2 * h, 2 * w), dtype=x.dtype)
    for bi in range(b):
        for ci in range(c):
            for y in range(h):
                for xcol in range(w):
                    v = x[bi, ci, y, xcol]
                    out[bi, ci, 2 * y, 2 * xcol] = v
                    out[bi, ci, 2 * y, 2 * xcol + 1] = v
                    out[bi, ci, 2 * y + 1, 2 * xcol] = v
                    out[bi, ci, 2 * y + 1, 2 * xcol + 1] = v
    return out


@njit(cache=True)
def upsample2_grad(dy):
    b, c, h2, w2 = dy.shape
    h, w = h2 // 2, w2 // 2
    out = np.empty((b, c, h, w), dtype=dy.dtype)
    for bi in range(b):
        for ci in range(c):
            for y in range(h):
                for xcol in range(w):
                    out[bi, ci, y, xcol] = (
                        dy[bi, ci, 2 * y, 2 * xcol]
                        + dy[bi, ci, 2 * y, 2 * xcol + 1]
                        + dy[bi, ci, 2 * y + 1, 2 * xcol]
                        + dy[bi, ci, 2 * y + 1, 2 * xcol + 1]
                    )
    return out

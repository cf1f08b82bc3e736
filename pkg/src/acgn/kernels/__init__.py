"""Kernel backend selection.

The hot array kernels (conv lowering, upsampling) exist twice: a numba
@njit build and a pure-numpy build. `ACGN_BACKEND=numpy` forces the
fallback; the default is numba when it imports cleanly. `benchmarks/`
compares the two.
"""

import os

from . import numpy_ops

_requested = os.environ.get("ACGN_BACKEND", "numba").strip().lower()

if _requested not in ("numba", "numpy"):
    raise ValueError(f"ACGN_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

if _requested == "numba":
    try:
        from . import numba_ops as _impl
        BACKEND = "numba"
    except ImportError:
        _impl = numpy_ops
        BACKEND = "numpy"
else:
    _impl = numpy_ops
    BACKEND = "numpy"

im2col = _impl.im2col
col2im = _impl.col2im
upsample2 = _impl.upsample2
upsample2_grad = _impl.upsample2_grad

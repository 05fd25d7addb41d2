"""Backend selection for the conv/pool hot kernels.

SPINALNET_KERNELS=cython forces the compiled extension (ImportError if it
was not built), =numpy forces the im2col fallback, anything else (default
"auto") prefers the extension and falls back silently.
"""

import os

from . import _numpy

_requested = os.environ.get("SPINALNET_KERNELS", "auto")

if _requested == "numpy":
    _impl = _numpy
    BACKEND = "numpy"
else:
    try:
        from . import _fast as _impl

        BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        _impl = _numpy
        BACKEND = "numpy"

conv2d_forward = _impl.conv2d_forward
conv2d_backward_input = _impl.conv2d_backward_input
conv2d_backward_weight = _impl.conv2d_backward_weight
maxpool2d_forward = _impl.maxpool2d_forward
maxpool2d_backward = _impl.maxpool2d_backward

numpy_backend = _numpy
try:
    from . import _fast as cython_backend
except ImportError:
    cython_backend = None

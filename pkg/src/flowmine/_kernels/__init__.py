"""Backend selection for the encoder hot kernels.

The compiled Cython backend is used when it was built; otherwise the
NumPy reference backend. Set FLOWMINE_KERNELS=python or =cython to force
one (forcing cython raises if the extension is missing). Both backends
implement identical signatures and agree to float round-off, so the
choice affects speed only.
"""

from __future__ import annotations

import os

from . import pyref


def _select():
    choice = os.environ.get("FLOWMINE_KERNELS", "auto").lower()
    if choice == "python":
        return pyref
    try:
        from . import _core
    except ImportError:
        if choice == "cython":
            raise ImportError(
                "FLOWMINE_KERNELS=cython but the compiled kernel module is not built"
            )
        return pyref
    return _core if choice in ("auto", "cython") else pyref


_impl = _select()

BACKEND = _impl.BACKEND
masked_softmax = _impl.masked_softmax
softmax_backward = _impl.softmax_backward
layernorm_forward = _impl.layernorm_forward
layernorm_backward = _impl.layernorm_backward
gelu_forward = _impl.gelu_forward
gelu_backward = _impl.gelu_backward
softmax_xent = _impl.softmax_xent


def backend_name() -> str:
    return BACKEND

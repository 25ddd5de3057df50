"""Select the kernel implementation at import time.

The compiled ``_kernels`` extension is used when it imports; otherwise, or when
``PERMTWIN_PURE=1`` is set, the pure-Python ``_pykernels`` module is used.
"""
import os

from . import _pykernels

pure = _pykernels

if os.environ.get("PERMTWIN_PURE") == "1":
    compiled = None
else:
    try:
        from . import _kernels as compiled
    except ImportError:  # extension not built
        compiled = None

kernels = compiled if compiled is not None else pure
NAME = "compiled" if compiled is not None else "pure"


def twins_at_length(perm, k, budget=None, tau=None, impl=None):
    impl = impl or kernels
    out = impl.twins_at_length(perm, k, budget, tau)
    if out is NotImplemented:
        out = pure.twins_at_length(perm, k, budget, tau)
    return out

"""Kernel selection: compiled extension when available, numpy otherwise.

Set XBXREG_FORCE_PYTHON_KERNEL=1 to skip the compiled path (used by the
benchmark and by tests that compare the two implementations).
"""

import os

from . import _ref

if os.environ.get("XBXREG_FORCE_PYTHON_KERNEL"):
    _impl = _ref
else:
    try:
        from . import _xbkernel as _impl
    except ImportError:
        _impl = _ref

BACKEND = _impl.BACKEND
xb_loglik_grid = _impl.xb_loglik_grid

__all__ = ["BACKEND", "xb_loglik_grid"]

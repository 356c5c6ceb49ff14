"""Backend dispatch for the search kernels.

The compiled extension is used when it imports; set
``BLOCKYCOVER_PURE_PYTHON=1`` to force the pure-Python fallback.  Inputs
wider than a machine word always go to the fallback.
"""
from __future__ import annotations

import os

from . import _pykernels

_compiled = None
if not os.environ.get("BLOCKYCOVER_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = _compiled.BACKEND if _compiled is not None else _pykernels.BACKEND
_WORD = 64


def td_search(rows, cols, m, n, node_limit=0, backend=None):
    impl = _pick(backend, m <= _WORD and n <= _WORD)
    return impl.td_search(list(rows), list(cols), m, n, node_limit)


def max_rect_search(rows, width, backend=None):
    impl = _pick(backend, width <= _WORD)
    return impl.max_rect_search(list(rows), width)


def _pick(backend, fits):
    if backend == "python":
        return _pykernels
    if backend == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        return _compiled
    if _compiled is not None and fits:
        return _compiled
    return _pykernels

"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy
implementation is used.  Setting ``REVPREF_PURE_PYTHON=1`` forces the
fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("REVPREF_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND

floyd_warshall = _impl.floyd_warshall
transitive_closure = _impl.transitive_closure
hungarian = _impl.hungarian
brute_force_assignment = _impl.brute_force_assignment


def available_backends() -> dict:
    """Map backend name to module for every backend that imports."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels  # type: ignore[attr-defined]

        out["cython"] = _kernels
    except ImportError:
        pass
    return out

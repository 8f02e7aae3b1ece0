"""Selects the compiled generation kernel, falling back to pure Python.

The compiled extension and the fallback implement the same flat ABI and
produce bit-identical arrays; the only difference is speed. Set
HOSTFORGE_PURE_PYTHON=1 to force the fallback (used by the benchmark and
the parity tests).
"""

from __future__ import annotations

import os

if os.environ.get("HOSTFORGE_PURE_PYTHON"):
    from . import _kernel_py as _impl
else:
    try:
        from . import _kernel as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernel_py as _impl

BACKEND: str = _impl.BACKEND

fill_correlated = _impl.fill_correlated
fill_uncorrelated = _impl.fill_uncorrelated
fill_grid = _impl.fill_grid


def backend() -> str:
    """Name of the active kernel backend ("compiled" or "python")."""
    return BACKEND

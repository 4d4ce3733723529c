"""Backend selection for the hot kernels.

The compiled extension is used when importable; otherwise the numpy/scipy
fallback takes over. Set ``GWSAMP_PURE_PYTHON=1`` before import to force the
fallback (used by tests and the backend benchmark).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("GWSAMP_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build environment
        _impl = _kernels_py
        BACKEND = "python"

energy_grad = _impl.energy_grad
bg_sweep = _impl.bg_sweep
glasso_core = _impl.glasso_core


def get_backend(name: str):
    """Return a specific backend module ("cython" or "python")."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}")

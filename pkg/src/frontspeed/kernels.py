"""Kernel backend selection.

The compiled extension is used when it imports; otherwise, or when
``FRONTSPEED_PURE_PYTHON`` is set to a non-empty value other than ``0``,
the pure-Python implementations are used.
"""

from __future__ import annotations

import os

from . import _kernels_py


def _load():
    if os.environ.get("FRONTSPEED_PURE_PYTHON", "") not in ("", "0"):
        return _kernels_py
    try:
        from . import _kernels
    except ImportError:
        return _kernels_py
    return _kernels


backend = _load()
BACKEND = backend.BACKEND

block_tridiag_factor = backend.block_tridiag_factor
block_tridiag_solve = backend.block_tridiag_solve
level_crossing = backend.level_crossing
imex_advance = backend.imex_advance


def get_backend(name=None):
    """Module implementing the kernels: ``"compiled"``, ``"python"`` or the
    active one when ``name`` is None."""
    if name is None:
        return backend
    if name == "python":
        return _kernels_py
    if name == "compiled":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}")

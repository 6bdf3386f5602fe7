"""Kernel backend selection.

The compiled Cython kernel is preferred; the numpy fallback implements
identical semantics and is selected automatically when the extension is
unavailable. ``TRACKDUEL_DP_BACKEND`` forces a backend: ``cython`` /
``python`` / ``auto`` (default).
"""

from __future__ import annotations

import os

from . import dp_fallback

try:
    from . import _dp_core

    HAVE_EXTENSION = True
except ImportError:  # pragma: no cover - depends on build environment
    _dp_core = None
    HAVE_EXTENSION = False


def _pick(name: str | None):
    name = (name or os.environ.get("TRACKDUEL_DP_BACKEND", "auto")).lower()
    if name == "python":
        return dp_fallback.dp_value_table, "python"
    if name == "cython":
        if not HAVE_EXTENSION:
            raise RuntimeError("cython backend requested but extension not built")
        return _dp_core.dp_value_table, "cython"
    if name != "auto":
        raise ValueError(f"unknown DP backend {name!r}")
    if HAVE_EXTENSION:
        return _dp_core.dp_value_table, "cython"
    return dp_fallback.dp_value_table, "python"


def backend_name(override: str | None = None) -> str:
    return _pick(override)[1]


def value_table(*args, backend: str | None = None) -> None:
    """Fill the preallocated value table using the selected backend."""
    fn, _ = _pick(backend)
    fn(*args)

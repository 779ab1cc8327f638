"""Selection between the compiled Gauss-Newton kernel and the NumPy fallback.

The compiled extension is preferred when it imports cleanly.  Override with
the ``GESPAR_BACKEND`` environment variable (read at import) or
:func:`select` at runtime: ``auto`` | ``compiled`` | ``python``.
"""

from __future__ import annotations

import os

__all__ = ["active_backend", "compiled_available", "compiled_module", "select", "use_compiled"]

try:
    from . import _core
except ImportError:
    _core = None

_VALID = ("auto", "compiled", "python")
_mode = "auto"


def select(mode: str) -> None:
    """Pin the kernel backend for this process."""
    global _mode
    if mode not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}, got {mode!r}")
    if mode == "compiled" and _core is None:
        raise RuntimeError("compiled kernel requested but gespar._core is not built")
    _mode = mode


def compiled_available() -> bool:
    return _core is not None


def use_compiled() -> bool:
    if _mode == "python":
        return False
    if _mode == "compiled":
        return True
    return _core is not None


def compiled_module():
    if _core is None:
        raise RuntimeError("compiled kernel gespar._core is not built")
    return _core


def active_backend() -> str:
    """Name of the kernel that rank-2 solves will actually use."""
    return "compiled" if use_compiled() else "python"


_env = os.environ.get("GESPAR_BACKEND", "").strip().lower()
if _env:
    select(_env)

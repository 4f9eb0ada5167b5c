"""Selects the path kernel implementation at import time.

The compiled ``_kernel`` extension is preferred.  Set PTAU_BACKEND=python
to force the numpy fallback.
"""

import os

from . import _fallback

try:
    from . import _kernel
except ImportError:  # extension not built
    _kernel = None

_forced = os.environ.get("PTAU_BACKEND", "").strip().lower()

if _kernel is not None and _forced not in ("python", "numpy", "fallback"):
    impl = _kernel
    NAME = "compiled"
else:
    impl = _fallback
    NAME = "python"


def get(name=None):
    """Return the kernel module for ``name`` ('compiled' or 'python')."""
    if name is None:
        return impl
    if name == "python":
        return _fallback
    if name == "compiled":
        if _kernel is None:
            raise RuntimeError("compiled kernel is not built")
        return _kernel
    raise ValueError(f"unknown backend {name!r}")


def available():
    return ["compiled", "python"] if _kernel is not None else ["python"]


def threads():
    """Worker count: PTAU_THREADS if set, else the CPU count."""
    env = os.environ.get("PTAU_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1

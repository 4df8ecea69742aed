"""Kernel backend selection.

Hot loops exist twice: a numba ``@njit`` version and a vectorised numpy
version. ``HOLOSERIES_NUMBA=0`` at import time selects numpy; ``use_backend``
switches at runtime (tests and the benchmark use it to compare both paths).
"""
from __future__ import annotations

import contextlib
import os

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False

_FLAG = os.environ.get("HOLOSERIES_NUMBA", "1").strip().lower()
_active = "numba" if (HAS_NUMBA and _FLAG not in ("0", "false", "no", "off")) else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` with caching on, or identity when numba is absent."""
    kwargs.setdefault("cache", True)
    if not HAS_NUMBA:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    return numba.njit(*args, **kwargs)


def active() -> str:
    return _active


def set_backend(name: str) -> None:
    global _active
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba is not installed")
    _active = name


@contextlib.contextmanager
def use_backend(name: str):
    prev = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(prev)


def thread_cap() -> int:
    """Parallelism cap from ``HOLOSERIES_THREADS`` (default: cpu count)."""
    raw = os.environ.get("HOLOSERIES_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return max(1, os.cpu_count() or 1)

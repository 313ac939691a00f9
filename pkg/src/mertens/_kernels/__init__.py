"""Kernel backend selection.

The hot loops (block sieving, harmonic-array updates, divisor-constant
generation) exist twice: a compiled Cython extension (``_native``) and a
NumPy implementation (``pure``) with identical semantics.  The compiled
backend is preferred when the extension built; ``MERTENS_BACKEND=pure``
(or ``native``) overrides, and callers may request one explicitly.
"""

import os

_cache: dict = {}


def get_backend(name: str | None = None):
    """Return the kernel module for `name` (auto, native, or pure)."""
    if name is None:
        name = os.environ.get("MERTENS_BACKEND", "auto")
    if name not in ("auto", "native", "pure"):
        raise ValueError(f"unknown backend {name!r}")
    if name in _cache:
        return _cache[name]
    if name in ("auto", "native"):
        try:
            from . import _native as backend
        except ImportError:
            if name == "native":
                raise
            from . import pure as backend
    else:
        from . import pure as backend
    _cache[name] = backend
    return backend


def available_backends() -> list[str]:
    names = []
    try:
        get_backend("native")
        names.append("native")
    except ImportError:
        pass
    names.append("pure")
    return names

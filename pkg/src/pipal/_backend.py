"""Kernel backend selection.

The compiled extension (pipal._core, Cython + OpenMP) is preferred; the
pure-Python twin (pipal._purecore) is the fallback.  PIPAL_BACKEND=python
or =compiled forces a choice, and get_backend(name) lets benchmarks compare
both in one process.
"""

import os

from . import _purecore

try:
    from . import _core
except ImportError:  # extension not built
    _core = None

_FORCED = os.environ.get("PIPAL_BACKEND", "").strip().lower()


def available_backends():
    names = ["python"]
    if _core is not None:
        names.insert(0, "compiled")
    return names


def get_backend(name=None):
    name = name or _FORCED or ("compiled" if _core is not None else "python")
    if name == "python":
        return _purecore
    if name == "compiled":
        if _core is None:
            raise RuntimeError("compiled core requested but pipal._core is not built")
        return _core
    raise ValueError(f"unknown backend {name!r}")


BACKEND = get_backend()
BACKEND_NAME = BACKEND.NAME

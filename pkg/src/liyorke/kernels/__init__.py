"""Orbit kernels with a compiled core and a numpy fallback.

The Cython extension ``_core`` is used when it imports; otherwise the
numpy module ``_fallback`` takes over.  Set ``LIYORKE_BACKEND=python`` to
force the fallback.  Both backends return bit-identical results.
"""
import importlib
import os

from . import _fallback


def load_backend(name=None):
    """Return the kernel module named ``"cython"`` or ``"python"``."""
    if name in (None, "auto"):
        name = os.environ.get("LIYORKE_BACKEND", "auto")
    if name == "python":
        return _fallback
    try:
        return importlib.import_module("._core", __name__)
    except ImportError:
        if name == "cython":
            raise
        return _fallback


_backend = load_backend()
BACKEND = _backend.NAME


def available_backends():
    names = ["python"]
    try:
        load_backend("cython")
        names.insert(0, "cython")
    except ImportError:
        pass
    return names


def use_backend(name):
    """Switch the active backend for this process; returns the previous name."""
    global _backend, BACKEND
    prev = BACKEND
    _backend = load_backend(name)
    BACKEND = _backend.NAME
    return prev


def pair_extrema(P, Q, sp, prog, n0, n1):
    return _backend.pair_extrema(P, Q, sp, prog, n0, n1)


def pair_distances(P, Q, sp, prog, n0, n1):
    return _backend.pair_distances(P, Q, sp, prog, n0, n1)


def pair_coverage(P, Q, sp, prog, n0, n1, grid, tol):
    return _backend.pair_coverage(P, Q, sp, prog, n0, n1, grid, tol)


def coords(batch, sp, n0, n1):
    return _backend.coords(batch, sp, n0, n1)


def spillover_cells(x, first_block, max_block):
    return _backend.spillover_cells(x, first_block, max_block)


def flat_distance(prog, x, lx, y, ly):
    return _backend.flat_distance(prog, x, lx, y, ly)

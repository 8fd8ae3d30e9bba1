"""Hot loops with a compiled (Cython) implementation and a NumPy fallback.

The compiled module is used when it imports; otherwise the fallback is
selected.  ``BACKEND`` names the active one and :func:`use_backend` switches
explicitly (tests and the benchmark run both).
"""
from __future__ import annotations

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

__all__ = ["BACKEND", "available_backends", "use_backend", "scatter_convolve", "dense_convolve", "count_hits"]

_IMPLS = {"python": _pykernels}
if _ckernels is not None:
    _IMPLS["cython"] = _ckernels

BACKEND = "cython" if _ckernels is not None else "python"


def available_backends():
    return tuple(_IMPLS)


def use_backend(name: str) -> str:
    """Select the kernel backend; returns the previous one."""
    global BACKEND
    if name not in _IMPLS:
        raise ValueError(f"backend {name!r} unavailable; have {available_backends()}")
    prev, BACKEND = BACKEND, name
    return prev


def _impl(backend):
    return _IMPLS[backend or BACKEND]


def _as3(a: np.ndarray, dtype=float) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=dtype)
    if a.ndim > 3:
        raise ValueError("kernels support dimension <= 3")
    return a.reshape(a.shape + (1,) * (3 - a.ndim))


def scatter_convolve(prev: np.ndarray, offsets, weights, backend=None) -> np.ndarray:
    """sum_j w_j prev[x - o_j] on the box of ``prev`` (mass leaving the box is dropped)."""
    d = prev.ndim
    p3 = _as3(prev)
    offs = np.zeros((len(weights), 3), dtype=np.int64)
    offs[:, :d] = np.asarray(offsets, dtype=np.int64).reshape(len(weights), d)
    out = np.zeros_like(p3)
    _impl(backend).scatter_convolve(p3, offs, np.ascontiguousarray(weights, dtype=float), out)
    return out.reshape(prev.shape)


def dense_convolve(a: np.ndarray, b: np.ndarray, backend=None) -> np.ndarray:
    """Direct convolution of ``a`` with the centred odd-sized ``b``, truncated to a's box."""
    if any(m % 2 == 0 for m in b.shape):
        raise ValueError("b must have odd sizes (centred)")
    a3, b3 = _as3(a), _as3(b)
    out = np.zeros_like(a3)
    _impl(backend).dense_convolve(a3, b3, out)
    return out.reshape(a.shape)


def count_hits(paths: np.ndarray, lo, hi, n0: int, n1: int, backend=None) -> np.ndarray:
    """Hit counts of S_n in the half-open boxes [lo_c, hi_c) for n0 <= n < n1.

    ``paths`` has shape (n_paths, n_steps + 1, d) with row 0 equal to S_0.
    """
    paths = np.ascontiguousarray(paths, dtype=float)
    lo = np.ascontiguousarray(np.atleast_2d(lo), dtype=float)
    hi = np.ascontiguousarray(np.atleast_2d(hi), dtype=float)
    n1 = min(n1, paths.shape[1])
    counts = np.zeros((lo.shape[0], max(n1 - n0, 0)), dtype=np.int64)
    if n1 > n0:
        _impl(backend).count_hits(paths, lo, hi, n0, counts)
    return counts

"""NumPy implementations of the compiled kernels, with identical semantics and order."""
from __future__ import annotations

import numpy as np


def _ranges(n, off):
    return slice(max(off, 0), n + min(off, 0))


def scatter_convolve(prev, offsets, weights, out):
    n = out.shape
    for j in range(offsets.shape[0]):
        o = offsets[j]
        dst = tuple(_ranges(n[a], int(o[a])) for a in range(3))
        src = tuple(slice(s.start - int(o[a]), s.stop - int(o[a])) for a, s in enumerate(dst))
        if all(s.stop > s.start for s in dst):
            out[dst] += weights[j] * prev[src]


def dense_convolve(a, b, out):
    half = [m // 2 for m in b.shape]
    n = out.shape
    for j in zip(*np.nonzero(b)):
        o = [j[k] - half[k] for k in range(3)]
        dst = tuple(_ranges(n[k], o[k]) for k in range(3))
        if all(s.stop > s.start for s in dst):
            src = tuple(slice(s.start - o[k], s.stop - o[k]) for k, s in enumerate(dst))
            out[dst] += b[j] * a[src]


def count_hits(paths, lo, hi, n0, counts):
    n_end = n0 + counts.shape[1]
    seg = paths[:, n0:n_end, :]
    for c in range(lo.shape[0]):
        inside = np.all((seg >= lo[c]) & (seg < hi[c]), axis=2)
        counts[c] += inside.sum(axis=0)

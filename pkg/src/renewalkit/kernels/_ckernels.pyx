# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: sparse lattice convolution, dense truncated convolution, hit counting.

All arrays are three dimensional; lower dimensions are padded with unit axes
by the Python wrapper.  Summation order is fixed (atom-major, then C order)
so results match the NumPy fallback.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t

cnp.import_array()


cdef inline Py_ssize_t _lo(Py_ssize_t off) nogil:
    return off if off > 0 else 0


cdef inline Py_ssize_t _hi(Py_ssize_t n, Py_ssize_t off) nogil:
    return n + off if off < 0 else n


def scatter_convolve(const double[:, :, ::1] prev, const int64_t[:, ::1] offsets,
                     const double[::1] weights, double[:, :, ::1] out):
    """out[x] += w_j prev[x - o_j] over atoms j, x and x - o_j inside the box."""
    cdef Py_ssize_t n0 = out.shape[0], n1 = out.shape[1], n2 = out.shape[2]
    cdef Py_ssize_t j, i, k, l, o0, o1, o2
    cdef double w
    with nogil:
        for j in range(offsets.shape[0]):
            o0 = offsets[j, 0]
            o1 = offsets[j, 1]
            o2 = offsets[j, 2]
            w = weights[j]
            for i in range(_lo(o0), _hi(n0, o0)):
                for k in range(_lo(o1), _hi(n1, o1)):
                    for l in range(_lo(o2), _hi(n2, o2)):
                        out[i, k, l] += w * prev[i - o0, k - o1, l - o2]


def dense_convolve(const double[:, :, ::1] a, const double[:, :, ::1] b, double[:, :, ::1] out):
    """out[x] += b[j] a[x - (j - centre(b))]: direct convolution truncated to the box of ``a``.

    ``a`` and ``out`` have the same shape and index frame; ``b`` is centred at
    its midpoint (odd sizes).
    """
    cdef Py_ssize_t m0 = b.shape[0], m1 = b.shape[1], m2 = b.shape[2]
    cdef Py_ssize_t h0 = m0 // 2, h1 = m1 // 2, h2 = m2 // 2
    cdef Py_ssize_t j0, j1, j2, o0, o1, o2
    cdef double w
    cdef Py_ssize_t n0 = out.shape[0], n1 = out.shape[1], n2 = out.shape[2]
    cdef Py_ssize_t i, k, l
    with nogil:
        for j0 in range(m0):
            for j1 in range(m1):
                for j2 in range(m2):
                    w = b[j0, j1, j2]
                    if w == 0.0:
                        continue
                    o0 = j0 - h0
                    o1 = j1 - h1
                    o2 = j2 - h2
                    for i in range(_lo(o0), _hi(n0, o0)):
                        for k in range(_lo(o1), _hi(n1, o1)):
                            for l in range(_lo(o2), _hi(n2, o2)):
                                out[i, k, l] += w * a[i - o0, k - o1, l - o2]


def count_hits(const double[:, :, ::1] paths, const double[:, ::1] lo, const double[:, ::1] hi,
               Py_ssize_t n0, int64_t[:, ::1] counts):
    """counts[c, n - n0] += #{paths p : lo_c <= S_n(p) < hi_c} for n0 <= n < n0 + counts.shape[1].

    ``paths[p, n]`` holds S_n of path p (row 0 is S_0).
    """
    cdef Py_ssize_t p, n, c, k
    cdef Py_ssize_t d = paths.shape[2]
    cdef Py_ssize_t n_end = n0 + counts.shape[1]
    cdef bint inside
    cdef double v
    with nogil:
        for p in range(paths.shape[0]):
            for n in range(n0, n_end):
                for c in range(lo.shape[0]):
                    inside = True
                    for k in range(d):
                        v = paths[p, n, k]
                        if v < lo[c, k] or v >= hi[c, k]:
                            inside = False
                            break
                    if inside:
                        counts[c, n - n0] += 1

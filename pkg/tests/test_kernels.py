import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from renewalkit import kernels


def backends():
    return kernels.available_backends()


def test_python_backend_always_available():
    assert "python" in backends()
    assert kernels.BACKEND in backends()


def test_use_backend_roundtrip():
    prev = kernels.use_backend("python")
    try:
        assert kernels.BACKEND == "python"
    finally:
        kernels.use_backend(prev)
    with pytest.raises(ValueError):
        kernels.use_backend("fortran")


@given(st.integers(1, 3), st.integers(0, 2**31 - 1))
def test_scatter_convolve_backends_agree(d, seed):
    rng = np.random.default_rng(seed)
    prev = rng.random((7,) * d)
    offsets = rng.integers(-2, 3, (5, d))
    w = rng.random(5)
    ref = kernels.scatter_convolve(prev, offsets, w, backend="python")
    # direct definition: sum_j w_j prev[x - o_j], zero outside the box
    direct = np.zeros_like(prev)
    for o, wj in zip(offsets, w):
        src = [slice(max(0, -k), 7 - max(0, k)) for k in o]
        dst = [slice(max(0, k), 7 - max(0, -k)) for k in o]
        direct[tuple(dst)] += wj * prev[tuple(src)]
    assert np.allclose(ref, direct, atol=1e-14)
    for b in backends():
        assert np.array_equal(kernels.scatter_convolve(prev, offsets, w, backend=b), ref)


@given(st.integers(1, 2), st.integers(0, 2**31 - 1))
def test_dense_convolve_backends_agree(d, seed):
    rng = np.random.default_rng(seed)
    prev = rng.random((9,) * d)
    step = rng.random((9,) * d)
    ref = kernels.dense_convolve(prev, step, backend="python")
    for b in backends():
        assert np.allclose(kernels.dense_convolve(prev, step, backend=b), ref, rtol=1e-13, atol=1e-15)


def test_count_hits_backends_agree():
    rng = np.random.default_rng(0)
    paths = np.cumsum(rng.integers(-1, 2, (200, 12, 2)), axis=1).astype(float)
    lo = np.array([[0.0, 0.0], [-3.0, 2.0], [1.0, -2.0]])
    hi = lo + 2.0
    direct = np.array([[np.all((paths[:, n] >= l) & (paths[:, n] < u), axis=1).sum() for n in range(2, 10)] for l, u in zip(lo, hi)])
    for b in backends():
        assert np.array_equal(kernels.count_hits(paths, lo, hi, 2, 10, backend=b), direct)

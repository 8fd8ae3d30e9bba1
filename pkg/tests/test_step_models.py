import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from renewalkit.errors import SpecInvalid
from renewalkit.step_models import (
    FiniteLattice,
    NormingFunction,
    ParetoLattice,
    PointMass,
    ProductStable,
    RadialModel,
    WilliamsonModified,
    build_model,
    sample_path,
    substream,
    truncated_moment_diagnostics,
)


def test_williamson_coordinate_pmf_normalized():
    m = WilliamsonModified(2)
    k = np.arange(0, 200001)
    assert m.p_abs(k).sum() + m.tail_abs(200000) == pytest.approx(1.0, abs=1e-12)
    # the tail beyond k equals the remaining partial sum
    assert m.p_abs(np.arange(11, 2_000_000)).sum() + m.tail_abs(1_999_999) == pytest.approx(m.tail_abs(10), rel=1e-12)


def test_williamson_spikes_at_powers_of_two():
    m = WilliamsonModified(2, "ln")
    k = np.array([7, 8, 9])
    p = m.p_abs(k)
    # spike at 8 = c 8^-1 / ln 8 dominates smooth neighbours ~ c k^-2 ln k
    assert p[1] > p[0] and p[1] > p[2]
    assert p[1] == pytest.approx(2 * m.describe()["c"] / 8 / math.log(8), rel=1e-12)


def test_williamson_empirical_tail():
    m = WilliamsonModified(2)
    x = m.sample(10**6, substream(11, 0))
    r = np.linalg.norm(x, axis=1)
    for s in (10, 50, 100):
        q = m.tail(s)
        sigma = math.sqrt(q * (1 - q) / len(r))
        assert abs((r > s).mean() - q) < 3 * sigma


def test_product_stable_cauchy_coordinates():
    m = ProductStable(2, 1.0)
    x = m.sample(10**6, substream(5, 0))
    for j in range(2):
        assert stats.kstest(x[:, j], stats.cauchy.cdf).statistic < 0.01


def test_product_stable_tail_matches_samples():
    m = ProductStable(2, 1.5)
    x = m.sample(400000, substream(6, 0))
    r = np.linalg.norm(x, axis=1)
    for s in (1.0, 5.0, 20.0):
        q = m.tail(s)
        assert abs((r > s).mean() - q) < 4 * math.sqrt(q * (1 - q) / len(r))


@pytest.mark.parametrize(
    "model,A",
    [
        (WilliamsonModified(2), lambda s: s / np.log(s)),
        (WilliamsonModified(4), lambda s: s**2 / np.log(s) ** 2),
        (ProductStable(2, 1.5), lambda s: s**1.5),
        (ParetoLattice(2, 1.2), lambda s: s**1.2),
    ],
)
def test_norming_functions(model, A):
    N = model.norming()
    s = np.array([10.0, 1e3, 1e5])
    assert np.allclose(N(s), A(s), rtol=1e-12)
    n = np.array([5.0, 100.0, 1e4])
    assert np.allclose(N(N.a(n)), n, rtol=1e-10)


@given(st.floats(0.2, 2.0), st.floats(1.0, 1e6))
def test_norming_inverse_roundtrip(alpha, n):
    N = NormingFunction.power(alpha)
    assert N(N.a(n)) == pytest.approx(n, rel=1e-9)


@pytest.mark.parametrize("model", [WilliamsonModified(2), ProductStable(2, 1.3), ParetoLattice(2, 1.5), FiniteLattice.simple_walk(2)])
def test_symmetric_models_have_zero_truncated_mean(model):
    for s in (3.0, 30.0, 300.0):
        assert np.all(np.asarray(model.truncated_mean(s)) == 0.0)


def test_truncated_moment_bands():
    assert truncated_moment_diagnostics(WilliamsonModified(3), [1e3, 1e4, 1e5]).within_band
    assert truncated_moment_diagnostics(ProductStable(2, 1.5), [1e1, 1e2, 1e3]).within_band


def test_pareto_tail_matches_pmf_sum():
    m = ParetoLattice(2, 1.5)
    R = 400
    box = m.pmf_box(R)
    g = np.arange(-R, R + 1)
    r = np.hypot(g[:, None], g[None, :])
    assert np.allclose(box, box[::-1, :]) and np.allclose(box, box.T)
    for s in (5.0, 20.0):
        assert 1.0 - box[r <= s].sum() == pytest.approx(m.tail(s), abs=1e-9)


def test_finite_lattice_pmf_box_and_cf():
    m = FiniteLattice.hold_walk(2)
    box = m.pmf_box(1)
    assert box.sum() == pytest.approx(1.0) and box[1, 1] == pytest.approx(0.2)
    t = np.array([[0.3, -1.1]])
    ref = 0.2 * (1 + 2 * np.cos(0.3) + 2 * np.cos(-1.1))
    assert m.cf(t)[0] == pytest.approx(ref)


def test_point_mass():
    m = PointMass(2)
    assert m.pmf_box(2)[2, 2] == 1.0 and m.pmf_box(2).sum() == 1.0
    assert np.all(m.cf(np.array([[1.0, 2.0]])) == 1.0)
    assert m.cell_probability(np.array([[-0.5, -0.5]]), 1.0)[0] == 1.0
    assert np.all(m.sample(5, substream(0)) == 0)


def test_radial_model_has_no_cf():
    m = RadialModel(2)
    with pytest.raises(NotImplementedError):
        m.cf(np.zeros((1, 2)))
    assert 0 < m.tail(10.0) < m.tail(2.0) <= 1


def test_cell_probability_matches_samples():
    m = ProductStable(2, 1.2)
    lo = np.array([[0.0, 0.0], [2.0, -1.0]])
    p = m.cell_probability(lo, 1.0)
    x = m.sample(400000, substream(9, 1))
    for i in range(2):
        hit = np.all((x >= lo[i]) & (x < lo[i] + 1.0), axis=1).mean()
        assert abs(hit - p[i]) < 4 * math.sqrt(p[i] * (1 - p[i]) / len(x))


def test_sample_path_determinism():
    m = ParetoLattice(2, 1.5)
    a = sample_path(m, 50, seed=7, substream_id=3)
    b = sample_path(m, 50, seed=7, substream_id=3)
    c = sample_path(m, 50, seed=7, substream_id=4)
    assert np.array_equal(a.partial_sums, b.partial_sums)
    assert not np.array_equal(a.partial_sums, c.partial_sums)
    assert np.array_equal(a.partial_sums[1:], np.cumsum(a.steps, axis=0))
    empty = sample_path(m, 0, seed=7)
    assert empty.n == 0 and np.all(empty.partial_sums == 0)


def test_build_model_families():
    assert isinstance(build_model({"family": "williamson", "d": 2, "b": "ln"}), WilliamsonModified)
    assert isinstance(build_model({"family": "pareto_lattice", "d": 2, "alpha": 1.5}), ParetoLattice)
    assert isinstance(build_model({"family": "product_stable", "d": 3, "alpha": 0.8}), ProductStable)
    assert isinstance(build_model({"family": "finite_lattice", "walk": "hold", "d": 2}), FiniteLattice)
    assert isinstance(build_model({"family": "point_mass", "d": 2}), PointMass)
    with pytest.raises(SpecInvalid):
        build_model({"family": "nope"})
    with pytest.raises(SpecInvalid):
        build_model({"family": "product_stable", "d": 2, "alpha": 3.0})

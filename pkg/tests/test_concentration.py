import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from renewalkit.concentration import (
    c_d,
    cf_abs_integral,
    check_concentration,
    check_local_ldp,
    concentration_function,
    kernel_cross_check,
    kernel_density,
    kernel_ft,
    lattice_concentration,
    ldp_shape_summary,
    sums_concentration,
    truncated_cell_probabilities,
)
from renewalkit.errors import NotApplicable
from renewalkit.exact_lattice import LatticeLaw
from renewalkit.step_models import FiniteLattice, ParetoLattice, PointMass, ProductStable, RadialModel

C1_CLOSED = 4.0 / 3.0 * (0.125 / math.sin(0.125)) ** 4


def random_lattice(rng, d):
    n = int(rng.integers(d + 1, d + 5))
    pts = {tuple([0] * d)} | {tuple(int(i == j) for j in range(d)) for i in range(d)}
    while len(pts) < n:
        pts.add(tuple(int(v) for v in rng.integers(-4, 5, d)))
    w = rng.integers(1, 9, len(pts))
    return FiniteLattice(LatticeLaw([(p, Fraction(int(x), int(w.sum()))) for p, x in zip(sorted(pts), w)]))


def brute_force_Q(model, h):
    """max over cells whose lower corner sits on support coordinates."""
    pts = np.array([[float(c.evaluate()) for c in p] for p in model.law.points])
    mass = np.array([float(m) for m in model.law.masses])
    best = 0.0
    for corner in product(*[sorted(set(pts[:, j])) for j in range(pts.shape[1])]):
        inside = np.all((pts >= corner) & (pts < np.array(corner) + h), axis=1)
        best = max(best, mass[inside].sum())
    return best


def test_c1_closed_form():
    assert c_d(1) == pytest.approx(C1_CLOSED, rel=1e-12)
    for d in (2, 3):
        assert c_d(d) == pytest.approx(C1_CLOSED**d, rel=1e-12)


def test_kernel_density_and_transform():
    chk = kernel_cross_check()
    assert abs(chk.normalization - 1.0) < 1e-8
    assert chk.max_ft_error < 1e-6
    assert kernel_ft(np.array([0.0, 1.0, 1.5])).tolist() == [1.0, 0.0, 0.0]
    assert kernel_density(0.0) == pytest.approx(3 / (8 * math.pi))


def test_kernel_constant_is_inverse_density_at_corner():
    # 1/f_0 is largest at |y| = 1/2 on [-1/2, 1/2]
    assert c_d(1) == pytest.approx(1.0 / (2 * math.pi * kernel_density(0.5)), rel=1e-12)


def test_cf_abs_integral_closed_forms():
    walk = FiniteLattice.simple_walk(1)
    assert cf_abs_integral(walk, 1.0) == pytest.approx(2 * math.sin(1.0), rel=1e-10)
    ref = integrate.quad(lambda t: abs(math.cos(t)), -3.0, 3.0, points=[-math.pi / 2, math.pi / 2], epsabs=1e-13)[0]
    assert cf_abs_integral(walk, 3.0) == pytest.approx(ref, rel=1e-10)
    ps = ProductStable(2, 1.0)
    for a in (0.1, 1.0, 10.0):
        assert cf_abs_integral(ps, a) == pytest.approx((2 * (1 - math.exp(-a))) ** 2, rel=1e-10)
    assert cf_abs_integral(PointMass(3), 0.7) == pytest.approx(1.4**3, rel=1e-12)


def test_cf_abs_integral_needs_cf():
    with pytest.raises(NotApplicable):
        cf_abs_integral(RadialModel(2), 1.0)


@pytest.mark.parametrize("seed", range(6))
def test_lattice_concentration_brute_force(seed):
    rng = np.random.default_rng(seed)
    m = random_lattice(rng, 1 + seed % 2)
    hs = [0.5, 1.0, 1.5, 2.0, 3.0]
    for q, h in zip(lattice_concentration(m, hs), hs):
        assert q.value == pytest.approx(brute_force_Q(m, h), abs=1e-14)
        assert q.error == pytest.approx(0.0, abs=1e-14)


def test_concentration_function_monotone_in_h():
    for m in (ParetoLattice(2, 1.5), ProductStable(2, 1.2)):
        Q = concentration_function(m, [0.5, 1.0, 2.0, 4.0], n_samples=50000)
        vals = [q.value for q in Q]
        assert all(a <= b + 1e-9 for a, b in zip(vals, vals[1:]))


def test_continuous_concentration_near_origin_cell():
    # unimodal symmetric product law: the best cell is centred at 0
    m = ProductStable(2, 1.0)
    q = concentration_function(m, [1.0], n_samples=50000)[0]
    centred = float(m.cell_probability(np.array([[-0.5, -0.5]]), 1.0)[0])
    assert q.value == pytest.approx(centred, rel=1e-6)


def test_point_mass_saturates():
    for c in check_concentration(PointMass(2), [0.5, 1.0, 2.5], [0.1, 1.0, 10.0]):
        assert c.lhs == 1.0 and c.rhs >= 1.0 and c.holds


def test_pm1_walk_margin():
    c = check_concentration(FiniteLattice.simple_walk(1), [1.0], [1.0])[0]
    assert c.lhs == pytest.approx(0.5)
    assert c.rhs == pytest.approx(C1_CLOSED * 2 * math.sin(1.0), rel=1e-9)
    assert c.holds and c.margin > 1.7


@given(st.integers(0, 10_000), st.floats(0.2, 3.0), st.floats(0.05, 20.0))
def test_inequality_random_lattices(seed, h, a):
    rng = np.random.default_rng(seed)
    m = random_lattice(rng, 1 + seed % 2)
    c = check_concentration(m, [h], [a])[0]
    assert c.holds, c


def test_truncated_n0_is_indicator():
    m = ParetoLattice(2, 1.5)
    lo = np.array([[-0.5, -0.5], [0.2, 0.0], [-1.5, -1.5], [-2.0, 0.0]])
    p, _, _ = truncated_cell_probabilities(m, 0, 4.0, lo, 1.0)
    assert p.tolist() == [1.0, 0.0, 0.0, 0.0]


def test_truncated_exact_vs_mc():
    m = ParetoLattice(2, 1.5)
    lo = np.array([[3.0, 0.0], [6.0, 0.0], [4.0, 4.0], [-8.0, 2.0], [0.0, 0.0]])
    ex, _, _ = truncated_cell_probabilities(m, 6, 4.0, lo, 2.0, method="exact")
    mc, _, counts = truncated_cell_probabilities(m, 6, 4.0, lo, 2.0, method="mc", n_paths=100000, seed=2)
    sigma = np.sqrt(np.maximum(ex * (1 - ex), 1e-12) / 100000)
    assert np.all(np.abs(mc - ex) < 4 * sigma + 1e-12)


def test_truncated_mc_independent_of_workers():
    m = ParetoLattice(2, 1.5)
    lo = np.array([[3.0, 0.0], [6.0, 1.0]])
    a = truncated_cell_probabilities(m, 5, 4.0, lo, 2.0, method="mc", n_paths=20000, seed=4, workers=1)[2]
    b = truncated_cell_probabilities(m, 5, 4.0, lo, 2.0, method="mc", n_paths=20000, seed=4, workers=3)[2]
    assert np.array_equal(a, b)


def test_truncation_removes_far_cells():
    m = ParetoLattice(2, 1.5)
    lo = np.array([[100.0, 0.0]])
    # n steps of length <= s cannot reach beyond n s
    assert truncated_cell_probabilities(m, 4, 5.0, lo, 1.0)[0][0] == 0.0


def test_local_ldp_shape_exact():
    checks = check_local_ldp(ParetoLattice(2, 1.5), [8], [4, 8], [[1, 0], [1, 1]], method="exact")
    shape = ldp_shape_summary(checks)
    assert shape.all_negative and shape.steepening
    assert shape.min_r2 > 0.9


def test_sums_concentration_pm1_bounded():
    res = sums_concentration(FiniteLattice.simple_walk(1), [100, 1000])
    for r in res:
        # parity cell of width 1 holds one atom: Q = binom(n, n/2) 2^-n ~ sqrt(2/(pi n))
        assert r.Q == pytest.approx(math.comb(r.n, r.n // 2) / 2.0**r.n, rel=1e-9)
        assert 0.5 < r.scaled < 1.0
    assert abs(res[0].scaled - res[1].scaled) < 0.01

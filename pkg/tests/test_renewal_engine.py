import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from renewalkit.exact_lattice import LatticeLaw
from renewalkit.renewal_engine import (
    TargetCell,
    big_n_prediction,
    convolve_exact,
    llt_check,
    mc_vs_exact,
    mc_window,
    n_window,
    renewal_sum,
    residue_class_check,
    small_n_sum,
    step_table,
    target_points,
)
from renewalkit.step_models import FiniteLattice, NormingFunction, ParetoLattice


def random_finite_lattice(seed, radius=3, n_atoms=7):
    rng = np.random.default_rng(seed)
    pts = {(0, 0), (1, 0), (0, 1)}
    while len(pts) < n_atoms:
        pts.add(tuple(int(v) for v in rng.integers(-radius, radius + 1, 2)))
    w = rng.integers(1, 6, len(pts))
    masses = [Fraction(int(x), int(w.sum())) for x in w]
    return FiniteLattice(LatticeLaw(list(zip(sorted(pts), masses))))


def test_first_table_is_step_pmf():
    m = ParetoLattice(2, 1.5)
    T = convolve_exact(m, 1, 20)
    assert np.array_equal(T[0].values, step_table(m, 20))


def test_simple_walk_binomial():
    T = convolve_exact(FiniteLattice.simple_walk(1), 4, 8)
    assert T[-1].at([[0]])[0] == pytest.approx(6 / 16, abs=1e-15)
    for n in (1, 2, 3, 4):
        k = np.arange(-8, 9)
        ref = np.where((k + n) % 2 == 0, stats.binom.pmf((k + n) // 2, n, 0.5), 0.0)
        assert np.allclose(T[n - 1].values, ref, atol=1e-15)


def direct_square(p, x):
    """sum over y of p(y) p(x - y) with both points inside the box."""
    R = (p.shape[0] - 1) // 2
    tot = 0.0
    for i in range(-R, R + 1):
        for j in range(-R, R + 1):
            u, v = x[0] - i, x[1] - j
            if abs(u) <= R and abs(v) <= R:
                tot += p[i + R, j + R] * p[u + R, v + R]
    return tot


@pytest.mark.parametrize("model", [ParetoLattice(2, 1.5), random_finite_lattice(4)])
def test_square_matches_direct_double_sum(model):
    R = 12
    T = convolve_exact(model, 2, R)
    p = step_table(model, R)
    rng = np.random.default_rng(0)
    for x in rng.integers(-R, R + 1, (10, 2)):
        assert T[1].at([x])[0] == pytest.approx(direct_square(p, x), abs=1e-14)


def test_lost_mass_tracks_box_deficit():
    m = ParetoLattice(2, 1.5)
    T = convolve_exact(m, 3, 16)
    for t in T:
        assert t.lost_mass == pytest.approx(1.0 - t.values.sum(), abs=1e-15)
        assert t.lost_mass <= t.union_bound + 1e-12


def test_kernel_backends_agree_on_tables():
    from renewalkit import kernels

    m = random_finite_lattice(2)
    tabs = {b: convolve_exact(m, 5, 15, backend=b, keep="last")[0].values for b in kernels.available_backends()}
    ref = tabs["python"]
    for v in tabs.values():
        assert np.array_equal(v, ref)


def test_llt_hold_walk_decreasing():
    rep = llt_check(FiniteLattice.hold_walk(2), [16, 32, 64])
    assert all(a > b for a, b in zip(rep.sup_gaps, rep.sup_gaps[1:]))
    assert rep.q == 1


def test_residue_classes_pm1():
    rep = residue_class_check(FiniteLattice.simple_walk(1), 30, 40)
    assert rep.ok and (rep.q, rep.p) == (2, 1)


def test_mc_vs_exact_within_four_sigma():
    pts = [[0, 0], [1, 0], [2, 1], [3, 3], [-4, 2], [0, 5], [1, 1], [-2, -2], [6, 0], [2, -3]]
    rep = mc_vs_exact(FiniteLattice.hold_walk(2), [1, 2, 5, 10, 20], pts, 20000, 7, 40)
    assert rep.z.size >= 50
    assert rep.max_abs_z < 4 and rep.ok


def test_mc_window_independent_of_workers():
    m = ParetoLattice(2, 1.5)
    a = mc_window(m, [5.0, 0.0], [6.0, 1.0], 1, 30, 4000, seed=3, workers=1)
    b = mc_window(m, [5.0, 0.0], [6.0, 1.0], 1, 30, 4000, seed=3, workers=3)
    assert np.array_equal(a.counts, b.counts)


def test_n_window():
    assert n_window(NormingFunction.power(1.5), 2.0, 5.0) == (3, 12)


def test_partition_of_renewal_sum():
    h = FiniteLattice.hold_walk(3)
    c = TargetCell.for_model(h)
    w = np.array([1.0, 1.0, 0.0]) / math.sqrt(2)
    for method in ("spectral", "direct"):
        big = renewal_sum(h, c, 6, w, 0.5, M=3, method=method, tail="none")
        small = small_n_sum(h, c, 6, 0.5, method=method, directions=[w])
        full = renewal_sum(h, c, 6, w, 1e-9, M=3, method=method, tail="none")
        assert big.value + small.value == pytest.approx(full.value, rel=1e-12)


def test_spectral_matches_direct_and_mc():
    h = FiniteLattice.hold_walk(3)
    c = TargetCell.for_model(h)
    spec = renewal_sum(h, c, 6, [1, 0, 0], 0.5, M=3, method="spectral", tail="none")
    direct = renewal_sum(h, c, 6, [1, 0, 0], 0.5, M=3, method="direct", tail="none")
    mc = renewal_sum(h, c, 6, [1, 0, 0], 0.5, M=3, method="mc", tail="none", seed=1, n_paths=20000)
    assert spec.value == pytest.approx(direct.value, rel=1e-3)
    assert abs(mc.value - spec.value) < 4 * mc.stderr


def test_delta_ladder_monotone():
    m = ParetoLattice(2, 1.5)
    c = TargetCell.for_model(m)
    vals = [renewal_sum(m, c, 30, [1, 0], d, tail="none").value for d in (0.8, 0.4, 0.2)]
    assert vals[0] <= vals[1] <= vals[2]


def test_small_n_empty_range():
    m = ParetoLattice(2, 1.5)
    r = small_n_sum(m, TargetCell.for_model(m), 1.0, 1e-6)
    assert r.value == 0.0 and r.n_range == (0, 0)


def test_full_lattice_cell_does_not_depend_on_h():
    m = ParetoLattice(2, 1.5)
    x = np.array([10.3, -4.6])
    preds = []
    for h in (1.0, 2.0, 3.0):
        c = TargetCell.for_model(m, h)
        assert c.nu == 2
        assert np.array_equal(target_points(c, x), [[11, -4]])
        preds.append(big_n_prediction(m, c, [1, 0], 0.5))
    assert preds[0] == preds[1] == preds[2]


def test_parity_cell_picks_one_point():
    c = TargetCell.for_model(FiniteLattice.simple_walk(1))
    assert (c.nu, c.q) == (1, 2)
    assert np.array_equal(target_points(c, np.array([7.2])), [[15]])

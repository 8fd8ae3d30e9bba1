import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from renewalkit.errors import NotApplicable
from renewalkit.srt_criteria import (
    A_tilde,
    CriterionConfig,
    K_integral,
    Status,
    Verdict,
    check_sufficient_conditions,
    criterion_sum,
    kappa,
    ols_slope,
    theil_sen_slope,
)
from renewalkit.stable_law import sym_stable_cdf
from renewalkit.step_models import (
    FiniteLattice,
    NormingFunction,
    ParetoLattice,
    PointMass,
    ProductStable,
    RadialModel,
    WilliamsonModified,
)


@pytest.mark.parametrize("d,alpha,k", [(3, 1.5, 2), (2, 0.4, 5), (4, 2, 2), (3, Fraction(3, 2), 2), (2, Fraction(1, 3), 6)])
def test_kappa_examples(d, alpha, k):
    assert kappa(d, alpha) == k


@given(st.integers(1, 6), st.fractions(min_value=Fraction(1, 50), max_value=2, max_denominator=50))
def test_kappa_is_floor_of_d_over_alpha(d, alpha):
    if d <= alpha:
        with pytest.raises(NotApplicable):
            kappa(d, alpha)
        return
    assert kappa(d, alpha) == math.floor(Fraction(d) / alpha)


def test_theta_kappa_precondition():
    with pytest.raises(ValueError):
        CriterionConfig(theta=0.5).check_for(2, 0.4)
    assert CriterionConfig(theta=0.1).check_for(2, 0.4) == 5


def test_K_product_matches_direct_quadrature():
    m = ProductStable(2, 1.5)
    t, a, eta, h = np.array([40.0, 10.0]), 3.0, 0.05, 1.0
    L = eta * 2 * 40.0
    f = lambda z: (sym_stable_cdf(40.0 - z + h, 1.5) - sym_stable_cdf(40.0 - z, 1.5)) * math.exp(-abs(z) / a)
    ref = h * integrate.quad(f, -L, L, points=[0.0], limit=400, epsabs=1e-15)[0]
    assert K_integral(m, t, a, eta, h, method="product") == pytest.approx(ref, rel=1e-7)


def test_K_quadrature_below_product_bound():
    m = ProductStable(2, 1.5)
    t = np.array([40.0, 10.0])
    q = K_integral(m, t, 3.0, 0.05, method="quadrature", n_directions=128)
    p = K_integral(m, t, 3.0, 0.05, method="product")
    assert 0 < q <= p * (1 + 1e-6)


def test_K_monotone_in_a_eta_h():
    m = ProductStable(2, 1.2)
    t = np.array([50.0, -20.0])
    a = np.array([0.1, 1.0, 10.0, 100.0])
    v = K_integral(m, t, a, 0.02)
    assert np.all(np.diff(v) >= 0)
    assert K_integral(m, t, 5.0, 0.01) <= K_integral(m, t, 5.0, 0.05)
    assert K_integral(m, t, 5.0, 0.02, h=1.0) <= K_integral(m, t, 5.0, 0.02, h=2.0)
    assert K_integral(m, t, 1e-8, 0.02) < 1e-9


def test_K_cauchy_decay_bound():
    # 1-d bound: K <= 2 a h g(t_1) with g(u) <= 1/(pi u^2)
    m = ProductStable(2, 1.0)
    for tn in (1e2, 1e3, 1e4):
        for a in (1.0, 10.0):
            assert K_integral(m, np.array([tn, 0.0]), a, 0.02) <= (2 / math.pi) * a * tn**-2 * 1.001


def test_K_point_mass_far_away_is_zero():
    assert K_integral(PointMass(2), np.array([100.0, 0.0]), 1.0, 0.02) == 0.0


def test_K_tail_bound():
    m = ParetoLattice(3, 1.8)
    t = np.array([30.0, 0.0, 0.0])
    assert K_integral(m, t, 2.0, 0.1, h=1.0, method="tail_bound") == pytest.approx(m.tail(10.0))
    with pytest.raises(NotApplicable):
        K_integral(m, t, 2.0, 0.5, method="tail_bound")


def test_A_tilde_arithmetic_series():
    N = NormingFunction.power(1.5)
    for s in (10.0, 100.0):
        at = A_tilde(N, 0.0, s)
        n = math.floor(s**1.5)
        assert at.value == pytest.approx(n * (n + 1) / 2, rel=1e-12)
        assert 0.4 <= at.value / N(s) ** 2 <= 0.6


def test_A_tilde_empty_range():
    assert A_tilde(NormingFunction.power(1.5), 0.0, 0.5).value == 0.0


def test_A_tilde_log_boundary_bounded():
    m = WilliamsonModified(2)
    vals = [A_tilde(m, 2.0, s).value for s in (1e3, 1e4, 1e5, 1e6)]
    assert all(0 < v < 3 for v in vals)
    assert max(vals) - min(vals) < 0.2


def test_slope_fits_recover_exact_lines():
    x = np.log([1.0, 2.0, 4.0, 8.0, 16.0])
    y = 1.7 * x - 0.3
    for fit in (ols_slope(x, y), theil_sen_slope(x, y)):
        assert fit.slope == pytest.approx(1.7, abs=1e-12)
        assert fit.low <= 1.7 + 1e-9 and fit.high >= 1.7 - 1e-9


def test_theil_sen_resists_outlier():
    x = np.arange(10.0)
    y = -0.5 * x
    y[3] = 40.0
    assert theil_sen_slope(x, y).slope == pytest.approx(-0.5, abs=1e-12)


def test_criterion_product_exponent_and_h_scaling():
    cfg = CriterionConfig(theta=0.5, eta=0.02, deltas=(1e-3, 2e-3, 4e-3), s_values=(1e4, 1e5), n_directions=4, n_radii=3)
    rep = criterion_sum(ProductStable(2, 1.5), cfg)
    assert abs(rep.exponent.slope - 2.0) < 0.15
    assert rep.verdict is Verdict.CONSISTENT
    assert np.all(rep.values >= 0)
    # values shrink with delta at every s
    assert np.all(np.diff(rep.values, axis=0) > 0)
    rows = rep.csv_rows()
    assert len(rows) == rep.values.size


def test_conditions_finite_variance_d3():
    rep = check_sufficient_conditions(FiniteLattice.hold_walk(3))
    assert rep.get("normal_d3").status is Status.HOLDS
    assert rep.any_holds


def test_conditions_d4_log_tail_ratio_decreasing():
    rep = check_sufficient_conditions(RadialModel(4, "log_tail"), s_values=np.geomspace(1e2, 1e6, 7))
    c = rep.get("normal_d4")
    assert c.status is Status.HOLDS
    assert c.trend.high < 0


def test_conditions_bounded_ratio_d5_power_density():
    rep = check_sufficient_conditions(RadialModel(5, "power_density"), s_values=[1e2, 1e3, 1e4])
    assert rep.get("bounded_ratio").status is Status.HOLDS


def test_conditions_lattice_alpha_above_half_d():
    rep = check_sufficient_conditions(ParetoLattice(3, 1.8))
    assert rep.get("alpha_above_half_d").status is Status.HOLDS

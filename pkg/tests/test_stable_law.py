import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from renewalkit.errors import NotApplicable
from renewalkit.stable_law import (
    SpectralMeasure,
    StableLaw,
    cf,
    density,
    fibonacci_sphere,
    radial_uniform_convergence_check,
    rho,
    sym_stable_cdf,
    sym_stable_pdf,
)


def gaussian_pdf(r, d):
    # cf exp(-|t|^2) is N(0, 2 I)
    return np.exp(-r**2 / 4) / (4 * math.pi) ** (d / 2)


def cauchy_pdf(r, d):
    return math.gamma((d + 1) / 2) / math.pi ** ((d + 1) / 2) / (1 + r**2) ** ((d + 1) / 2)


def test_cf_at_zero_is_one():
    for law in (StableLaw.isotropic(1.3, 2), StableLaw.product(0.7, 3), StableLaw.gaussian(np.eye(2))):
        assert cf(law, np.zeros((1, law.d)))[0] == 1.0


def test_cf_closed_forms():
    t = np.array([[1.0, 2.0], [-0.3, 0.4], [3.0, 0.0]])
    r = np.linalg.norm(t, axis=1)
    assert np.allclose(cf(StableLaw.isotropic(2.0, 2), t), np.exp(-(r**2)), atol=1e-14)
    v = cf(StableLaw.isotropic(1.0, 2), t)
    assert np.allclose(v.imag, 0.0, atol=1e-14)
    assert np.allclose(v.real, np.exp(-r), atol=1e-14)
    a = 1.5
    assert np.allclose(cf(StableLaw.product(a, 2), t), np.exp(-np.sum(np.abs(t) ** a, axis=1)), atol=1e-14)


@given(st.floats(0.3, 2.0), st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_cf_bounded_and_hermitian(alpha, t):
    spec = SpectralMeasure.atoms([[1, 0, 0], [0.6, 0.8, 0], [0, 0, 1]], [0.5, 0.3, 0.2])
    law = StableLaw(alpha, 1.0, spec)
    t = np.array([t])
    v = cf(law, t)[0]
    assert abs(v) <= 1 + 1e-12
    assert np.isclose(cf(law, -t)[0], np.conj(v), atol=1e-12)


def test_one_dimensional_stable_oracles():
    x = np.linspace(-6, 6, 25)
    assert np.allclose(sym_stable_pdf(x, 1.0), stats.cauchy.pdf(x), atol=1e-10)
    assert np.allclose(sym_stable_pdf(x, 2.0), stats.norm.pdf(x, scale=math.sqrt(2)), atol=1e-10)
    assert np.allclose(sym_stable_cdf(x, 1.0), stats.cauchy.cdf(x), atol=1e-10)
    assert np.allclose(sym_stable_pdf(x, 1.3), stats.levy_stable.pdf(x, 1.3, 0.0), atol=1e-6)


@pytest.mark.parametrize("alpha,oracle", [(2.0, gaussian_pdf), (1.0, cauchy_pdf)])
def test_isotropic_density_d2(alpha, oracle):
    g = density(StableLaw.isotropic(alpha, 2), extent=3.0)
    r = np.linalg.norm(g.points(), axis=-1)
    assert np.max(np.abs(g.values - oracle(r, 2))) < 1e-6
    assert g.values.min() > -1e-9
    assert abs(g.meta["period_mass"] - 1.0) < 1e-4


def test_product_density_matches_coordinate_product():
    g = density(StableLaw.product(1.5, 2), extent=2.0)
    pts = g.points()
    ref = sym_stable_pdf(pts[..., 0], 1.5) * sym_stable_pdf(pts[..., 1], 1.5)
    assert np.max(np.abs(g.values - ref)) < 1e-6


def test_density_grid_roundtrip():
    g = density(StableLaw.isotropic(2.0, 2), extent=2.0)
    h = type(g).from_bytes(g.to_bytes())
    assert np.array_equal(g.values, h.values) and h.spacing == g.spacing


def test_rho_closed_forms():
    # d=3 Gaussian: 2 int_0^inf psi(u e) du = 1/(4 pi); d=2 Cauchy: int_0^inf psi(u e) du = 1/(2 pi)
    assert rho(StableLaw.isotropic(2.0, 3), 1, [0, 0, 1], 0.0).value == pytest.approx(1 / (4 * math.pi), rel=1e-10)
    assert rho(StableLaw.isotropic(1.0, 2), 1, [0, 1], 0.0).value == pytest.approx(1 / (2 * math.pi), rel=1e-10)


def test_rho_matches_direct_quadrature():
    law = StableLaw.isotropic(1.0, 2)
    f = lambda u: cauchy_pdf(u, 2)
    for delta in (0.5, 0.2):
        ref = integrate.quad(f, 0, 1 / delta, epsabs=1e-13)[0]
        assert rho(law, 1, [0.6, 0.8], delta).value == pytest.approx(ref, rel=1e-9)


def test_rho_isotropic_spread_and_q_scaling():
    law = StableLaw.isotropic(1.5, 2)
    rng = np.random.default_rng(3)
    om = rng.normal(size=(16, 2))
    om /= np.linalg.norm(om, axis=1)[:, None]
    v = [rho(law, 1, w, 0.5).value for w in om]
    assert max(v) - min(v) < 1e-6
    r1 = rho(law, 1, om[0], 0.5).value
    for q in (2, 3, 7):
        assert rho(law, q, om[0], 0.5).value == pytest.approx(r1 / q, rel=1e-15)


def test_rho_monotone_in_delta():
    law = StableLaw.isotropic(1.5, 2)
    vals = [rho(law, 1, [1, 0], d).value for d in (1.0, 0.5, 0.25, 0.1, 0.0)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_rho_product_divergence_flag():
    assert rho(StableLaw.product(0.4, 2), 1, [1, 0], 0.0).infinite
    r = rho(StableLaw.product(1.5, 2), 1, [1, 0], 0.0)
    assert not r.infinite and math.isfinite(r.value)


def test_rho_needs_d_above_alpha():
    with pytest.raises(NotApplicable):
        rho(StableLaw.isotropic(2.0, 2), 1, [1, 0], 0.5)


def test_uniform_convergence_check():
    rep = radial_uniform_convergence_check(StableLaw.gaussian(np.eye(3)), 1, [0.5, 0.25, 0.1], fibonacci_sphere(8, 3))
    assert rep.verdict == "decreasing"
    assert all(a >= b for a, b in zip(rep.sup_gaps, rep.sup_gaps[1:]))
    with pytest.raises(NotApplicable):
        StableLaw(1.5, 1.0, SpectralMeasure.atoms([[1, 0], [-1, 0]], [0.5, 0.5]))


def test_fibonacci_sphere_unit_vectors():
    for d in (2, 3, 4):
        p = fibonacci_sphere(20, d)
        assert p.shape == (20, d)
        assert np.allclose(np.linalg.norm(p, axis=1), 1.0)

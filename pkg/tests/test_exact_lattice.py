import random
from fractions import Fraction
from itertools import product
from math import gcd, lcm

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from renewalkit.errors import DegenerateSupport, NotApplicable
from renewalkit.exact_lattice import (
    LatticeLaw,
    SymbolicReal,
    UnimodularMatrix,
    decompose,
    determinant,
    is_aperiodic,
    normalize_vector,
    rational_pair_matrix,
    smith_normal_form,
)

fractions = st.fractions(min_value=-50, max_value=50, max_denominator=200)


def matmul(A, B):
    return [[sum(a * b for a, b in zip(row, col)) for col in zip(*B)] for row in A]


def rational_gcd(values):
    vals = [Fraction(v) for v in values if v != 0]
    if not vals:
        return Fraction(0)
    g, m = 0, 1
    for v in vals:
        g, m = gcd(g, abs(v.numerator)), lcm(m, v.denominator)
    return Fraction(g, m)


def test_normalize_half_third():
    K, z = normalize_vector([Fraction(1, 2), Fraction(1, 3)])
    assert z == [SymbolicReal(0), SymbolicReal(Fraction(1, 6))]
    assert abs(K.det) == 1


def test_normalize_zero_vector_is_identity():
    K, z = normalize_vector([0, 0, 0])
    assert [list(r) for r in K.entries] == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    assert all(v.is_zero() for v in z)


def test_normalize_eliminates_rational_relation():
    s = SymbolicReal.symbol("s")
    K, z = normalize_vector([s, 2 * s])
    assert z[0].is_zero()
    assert z[1] == s or z[1] == -s
    assert z[1].sign() > 0
    # z = K y coordinate by coordinate
    y = [s, 2 * s]
    for row, zi in zip(K.entries, z):
        assert sum((c * v for c, v in zip(row, y)), SymbolicReal(0)) == zi


@given(st.lists(fractions, min_size=1, max_size=5))
def test_normalize_rational_vectors(y):
    K, z = normalize_vector(y)
    assert K.det in (1, -1)
    assert all(v.is_zero() for v in z[:-1])
    assert z[-1].is_rational() and z[-1].rational_part == rational_gcd(y)
    assert K.apply(y) == z


@given(st.lists(st.tuples(fractions, st.integers(-3, 3), st.integers(-3, 3)), min_size=2, max_size=5))
def test_normalize_mixed_vectors(raw):
    y = [SymbolicReal(a, {"u": b, "v": c}) for a, b, c in raw]
    K, z = normalize_vector(y)
    assert K.det in (1, -1)
    assert K.apply(y) == z
    coef = np.array([[float(v.coefficient(n)) for n in ("u", "v")] for v in y])
    rank = np.linalg.matrix_rank(coef) if coef.any() else 0
    nu = len(y) - rank
    assert all(v.is_zero() for v in z[: max(nu - 1, 0)])
    if nu:
        assert z[nu - 1].is_rational() and z[nu - 1].rational_part >= 0
    tail = z[nu:]
    assert all(not v.is_rational() for v in tail)
    # irrational block is rationally independent: coefficient matrix has full rank
    if tail:
        tc = np.array([[float(v.coefficient(n)) for n in ("u", "v")] for v in tail])
        assert np.linalg.matrix_rank(tc) == len(tail)


@given(fractions.filter(lambda f: f != 0), fractions.filter(lambda f: f != 0))
def test_rational_pair_matrix(y1, y2):
    G = rational_pair_matrix(y1, y2)
    assert determinant(G) == 1
    out = [G[0][0] * y1 + G[0][1] * y2, G[1][0] * y1 + G[1][1] * y2]
    assert out[1] == 0
    assert abs(out[0]) == Fraction(gcd(y1.numerator, y2.numerator), lcm(y1.denominator, y2.denominator))


@pytest.mark.parametrize(
    "M,diag",
    [([[1, 0], [0, 1]], [1, 1]), ([[2, 0], [0, 3]], [1, 6]), ([[2, 4], [6, 8]], [2, 4])],
)
def test_smith_normal_form_examples(M, diag):
    U, S, V = smith_normal_form(M)
    assert matmul(matmul(U, M), V) == S
    assert [S[i][i] for i in range(2)] == diag
    assert abs(determinant(U)) == 1 and abs(determinant(V)) == 1


@given(st.lists(st.lists(st.integers(-20, 20), min_size=3, max_size=3), min_size=2, max_size=4))
def test_smith_normal_form_properties(M):
    U, S, V = smith_normal_form(M)
    assert matmul(matmul(U, M), V) == S
    assert abs(determinant(U)) == 1 and abs(determinant(V)) == 1
    diag = [S[i][i] for i in range(min(len(S), len(S[0])))]
    for i, row in enumerate(S):
        for j, v in enumerate(row):
            if i != j:
                assert v == 0
    nz = [x for x in diag if x != 0]
    assert all(x > 0 for x in nz)
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    assert diag[: len(nz)] == nz


def test_unimodular_inverse_roundtrip():
    K = UnimodularMatrix([[2, 1], [1, 1]])
    Ki = K.inverse()
    assert matmul([list(r) for r in K.entries], [list(r) for r in Ki.entries]) == [[1, 0], [0, 1]]
    with pytest.raises(ValueError):
        UnimodularMatrix([[2, 0], [0, 1]])


def brute_force_periods(points, den=6, differences=False):
    """Nonzero t in [0,1)^d with denominators dividing ``den`` making <t, x> (or <t, x - x0>) integral."""
    d = len(points[0])
    x0 = points[0] if differences else [0] * d
    found = []
    for t in product(range(den), repeat=d):
        if not any(t):
            continue
        if all(sum(ti * (xi - yi) for ti, xi, yi in zip(t, x, x0)) % den == 0 for x in points):
            found.append(tuple(Fraction(ti, den) for ti in t))
    return found


@pytest.mark.parametrize(
    "points,aperiodic,q",
    [
        ([[-1], [1]], True, 2),
        ([[0], [1]], True, 1),
        ([[-2], [2]], False, None),
        ([[0, 0], [1, 0], [0, 1]], True, 1),
        ([[1, 0], [0, 1], [-1, 0], [0, -1]], True, 2),
    ],
)
def test_aperiodicity_examples(points, aperiodic, q):
    law = LatticeLaw.uniform(points)
    res = is_aperiodic(law)
    assert res.aperiodic is aperiodic
    if aperiodic:
        assert res.q == q
        assert res.strongly_aperiodic is (q == 1)
    else:
        assert res.failing_t is not None
        t = res.failing_t
        assert all(sum(Fraction(ti) * xi for ti, xi in zip(t, x)).denominator == 1 for x in points)


def test_pm1_cf_unit_modulus_on_half_lattice():
    law = LatticeLaw.uniform([[-1], [1]])
    t = np.array([[0.5], [1.5], [2.5]])
    assert np.allclose(np.abs(law.cf(2 * np.pi * t)), 1.0)


def test_decompose_pm1_and_unit_simplex():
    dec = decompose(LatticeLaw.uniform([[-1], [1]]))
    assert (dec.r, dec.nu, dec.q, dec.p) == (1, 1, 2, 1)
    dec = decompose(LatticeLaw.uniform([[0, 0], [1, 0], [0, 1]]))
    assert (dec.r, dec.nu, dec.q) == (2, 2, 1)
    assert all(b.is_zero() for b in dec.beta)


def test_decompose_irrational_offset():
    s = {"irr": {"s": 1}}
    s1 = {"rat": 1, "irr": {"s": 1}}
    law = LatticeLaw.uniform([[s, 0], [s1, 0], [s, 1]], symbol_values={"s": 2**0.5})
    dec = decompose(law)
    assert (dec.r, dec.nu, dec.q) == (2, 1, 1)
    irr = [b for b in dec.beta if not b.is_rational()]
    assert len(irr) == 1 and abs(irr[0].coefficient("s")) == 1


def test_decompose_irrational_differences_not_applicable():
    s = {"irr": {"s": 1}}
    law = LatticeLaw.uniform([[0, 0], [1, s], [0, 1]], symbol_values={"s": 2**0.5})
    with pytest.raises(NotApplicable):
        decompose(law)


def test_degenerate_support_rejected():
    with pytest.raises(DegenerateSupport):
        LatticeLaw.uniform([[0, 0], [1, 1]])


@given(st.integers(1, 3), st.integers(1, 5), st.randoms(use_true_random=False))
def test_aperiodic_q_matches_brute_force(nu, q, r):
    # support {p + q k} in the last coordinate, unit steps elsewhere
    p = next(x for x in range(q) if gcd(x, q) == 1) if q > 1 else 0
    pts = [[0] * (nu - 1) + [p]] + [[int(i == j) for j in range(nu - 1)] + [p] for i in range(nu - 1)] + [[0] * (nu - 1) + [p + q]]
    pts.append([r.randint(-2, 2) for _ in range(nu - 1)] + [p + q * r.randint(-2, 2)])
    pts = [list(x) for x in {tuple(x) for x in pts}]
    res = is_aperiodic(LatticeLaw.uniform(pts))
    assert res.aperiodic and res.q == q
    # no nonzero period with small denominators; strong aperiodicity iff q == 1
    den = 6 if nu < 3 else 3
    assert brute_force_periods(pts, den) == []
    if den % q == 0:
        assert (brute_force_periods(pts, den, differences=True) == []) == (q == 1)

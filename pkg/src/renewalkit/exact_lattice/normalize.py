"""Unimodular reduction of an exact real vector.

Given ``y`` with SymbolicReal coordinates, find an integer matrix ``K`` with
``det K = +-1`` such that ``K y = (0, ..., 0, z_nu, z_{nu+1}, ..., z_r)`` where
``z_nu`` is a nonnegative rational and the remaining coordinates are
irrational, positive and rationally independent.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import List, Mapping, Optional, Sequence, Tuple

from .intmat import UnimodularMatrix, bezout_min, identity, matmul, smith_normal_form
from .symbolic import SymbolicReal, as_symbolic

__all__ = ["normalize_vector", "rational_pair_matrix", "split_rank"]


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def rational_pair_matrix(y1: Fraction, y2: Fraction) -> List[List[int]]:
    """2x2 integer matrix G with det 1 and ``G (y1, y2) = (gcd(p)/lcm(q), 0)``.

    Both inputs must be nonzero rationals ``p_i/q_i`` in lowest terms.  With
    ``p_i* = p_i/gcd(p1,p2)`` and ``q_i* = q_i/gcd(q1,q2)`` the first row is a
    Bezout pair for ``a p1* q2* + b p2* q1* = 1`` and the second row is
    ``(-p2* q1*, p1* q2*)``.
    """
    p1, q1 = y1.numerator, y1.denominator
    p2, q2 = y2.numerator, y2.denominator
    if p1 == 0 or p2 == 0:
        raise ValueError("rational_pair_matrix needs nonzero entries")
    gp, gq = gcd(p1, p2), gcd(q1, q2)
    p1s, p2s = p1 // gp, p2 // gp
    q1s, q2s = q1 // gq, q2 // gq
    A, B = p1s * q2s, p2s * q1s
    a, b = bezout_min(A, B)
    if a * A + b * B != 1:
        raise ArithmeticError("coprimality of the reduced pair failed")  # pragma: no cover
    return [[a, b], [-B, A]]


def _symbol_matrix(y: Sequence[SymbolicReal]) -> Tuple[List[str], List[List[int]]]:
    names = sorted({n for v in y for n in v.symbols})
    den = 1
    for v in y:
        for n in names:
            den = _lcm(den, v.coefficient(n).denominator)
    rows = [[int(v.coefficient(n) * den) for n in names] for v in y]
    return names, rows


def split_rank(y: Sequence[SymbolicReal]) -> int:
    """Rank over Q of the irrational parts of ``y``."""
    names, rows = _symbol_matrix(y)
    if not names:
        return 0
    _, S, _ = smith_normal_form(rows)
    return sum(1 for i in range(min(len(S), len(names))) if S[i][i] != 0)


def normalize_vector(
    y: Sequence, r: Optional[int] = None, values: Optional[Mapping[str, float]] = None
) -> Tuple[UnimodularMatrix, List[SymbolicReal]]:
    """Return ``(K, z)`` with ``z = K y`` in the reduced form described above.

    ``values`` optionally assigns numbers to symbols for the sign convention;
    without them the formal ordering of :class:`SymbolicReal` is used.
    """
    y = [as_symbolic(v) for v in y]
    if r is not None and r != len(y):
        raise ValueError(f"expected {r} coordinates, got {len(y)}")
    r = len(y)
    if r == 0:
        return UnimodularMatrix([]), []

    # 1. separate the rational block: rows of U from the SNF of the symbol
    #    coefficient matrix whose image vanishes span the integer relations.
    names, coef = _symbol_matrix(y)
    if names:
        U, S, _ = smith_normal_form(coef)
        rank = sum(1 for i in range(min(r, len(names))) if S[i][i] != 0)
        K = U[rank:] + U[:rank]
    else:
        rank = 0
        K = identity(r)
    nu = r - rank
    w = [sum((c * v for c, v in zip(row, y) if c), SymbolicReal(0)) for row in K]

    # 2. collapse the rational block onto one coordinate, pairwise in index order
    lead = None
    for j in range(nu):
        if w[j].is_zero():
            continue
        if lead is None:
            lead = j
            continue
        G = rational_pair_matrix(w[lead].rational_part, w[j].rational_part)
        step = identity(r)
        step[lead][lead], step[lead][j] = G[0]
        step[j][lead], step[j][j] = G[1]
        K = matmul(step, K)
        w_lead = G[0][0] * w[lead] + G[0][1] * w[j]
        w_j = G[1][0] * w[lead] + G[1][1] * w[j]
        w[lead], w[j] = w_lead, w_j
    if lead is not None and lead != nu - 1:
        K[lead], K[nu - 1] = K[nu - 1], K[lead]
        w[lead], w[nu - 1] = w[nu - 1], w[lead]

    # 3. sign convention
    for i in range(r):
        if i < nu - 1:
            continue
        if not w[i].is_zero() and w[i].sign(values) < 0:
            K[i] = [-x for x in K[i]]
            w[i] = -w[i]

    Kmat = UnimodularMatrix(K)
    z = [sum((c * v for c, v in zip(row, y) if c), SymbolicReal(0)) for row in K]
    if z != w:
        raise ArithmeticError("normalize_vector bookkeeping mismatch")  # pragma: no cover
    return Kmat, z

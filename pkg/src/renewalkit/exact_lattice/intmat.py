"""Exact integer matrices: products, determinants, unimodular inverses, Smith normal form.

Matrices are plain lists of lists of Python ints, so arithmetic never
overflows.  Nothing here touches floating point.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import List, Sequence, Tuple

__all__ = [
    "IntMatrix",
    "UnimodularMatrix",
    "identity",
    "matmul",
    "matvec",
    "transpose",
    "determinant",
    "smith_normal_form",
    "extended_gcd",
    "bezout_min",
]

IntMatrix = List[List[int]]


def identity(n: int) -> IntMatrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _check_int(M) -> IntMatrix:
    out = []
    for row in M:
        r = []
        for x in row:
            if isinstance(x, bool) or not isinstance(x, int):
                if isinstance(x, Fraction) and x.denominator == 1:
                    x = int(x)
                elif hasattr(x, "__index__"):
                    x = int(x.__index__())
                else:
                    raise TypeError(f"non-integer matrix entry {x!r}")
            r.append(int(x))
        out.append(r)
    return out


def transpose(M: Sequence[Sequence]) -> list:
    if not M:
        return []
    return [list(col) for col in zip(*M)]


def matmul(A: Sequence[Sequence], B: Sequence[Sequence]) -> list:
    Bt = transpose(B)
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def matvec(A: Sequence[Sequence], x: Sequence) -> list:
    out = []
    for row in A:
        acc = 0
        for a, v in zip(row, x):
            if a:
                acc = v * a + acc
        out.append(acc)
    return out


def determinant(M: Sequence[Sequence[int]]) -> int:
    """Fraction-free Bareiss elimination; exact for integer input."""
    A = [list(r) for r in _check_int(M)]
    n = len(A)
    if n == 0:
        return 1
    if any(len(r) != n for r in A):
        raise ValueError("determinant of a non-square matrix")
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k] != 0:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def _adjugate(M: IntMatrix) -> IntMatrix:
    n = len(M)
    if n == 1:
        return [[1]]
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1:] for k, row in enumerate(M) if k != i]
            adj[j][i] = (-1) ** (i + j) * determinant(minor)
    return adj


class UnimodularMatrix:
    """Square integer matrix with determinant +1 or -1, checked exactly."""

    __slots__ = ("_rows", "_det")

    def __init__(self, entries: Sequence[Sequence[int]]):
        rows = _check_int(entries)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("unimodular matrix must be square")
        det = determinant(rows)
        if det not in (1, -1):
            raise ValueError(f"determinant {det} is not +-1")
        self._rows = tuple(tuple(r) for r in rows)
        self._det = det

    @classmethod
    def identity(cls, n: int) -> "UnimodularMatrix":
        return cls(identity(n))

    @property
    def dimension(self) -> int:
        return len(self._rows)

    @property
    def det(self) -> int:
        return self._det

    @property
    def entries(self) -> IntMatrix:
        return [list(r) for r in self._rows]

    def inverse(self) -> "UnimodularMatrix":
        # inverse = adj / det and det is +-1
        adj = _adjugate(self.entries)
        return UnimodularMatrix([[self._det * x for x in row] for row in adj])

    def __matmul__(self, other):
        if isinstance(other, UnimodularMatrix):
            return UnimodularMatrix(matmul(self._rows, other._rows))
        return matvec(self._rows, other)

    def apply(self, vector: Sequence) -> list:
        return matvec(self._rows, vector)

    def __eq__(self, other):
        return isinstance(other, UnimodularMatrix) and self._rows == other._rows

    def __hash__(self):
        return hash(self._rows)

    def __repr__(self):
        return f"UnimodularMatrix({[list(r) for r in self._rows]})"

    def to_json(self):
        return self.entries


def extended_gcd(a: int, b: int) -> Tuple[int, int, int]:
    """Return ``(g, x, y)`` with ``a*x + b*y = g = gcd(a, b) >= 0``."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def bezout_min(A: int, B: int) -> Tuple[int, int]:
    """Coefficients ``(a, b)`` with ``a*A + b*B = gcd(A, B)``.

    Among all solutions ``(a + k*B/g, b - k*A/g)`` pick the one minimising
    ``|a|``, then ``|b|``, then preferring ``a >= 0``.
    """
    g, a, b = extended_gcd(A, B)
    if g == 0:
        return 0, 0
    sa, sb = B // g, A // g
    if sa == 0:
        return a, b
    k0 = -(a // sa) if sa > 0 else (a // -sa)
    best = None
    for k in range(k0 - 2, k0 + 3):
        cand = (a + k * sa, b - k * sb)
        key = (abs(cand[0]), abs(cand[1]), cand[0] < 0)
        if best is None or key < best[0]:
            best = (key, cand)
    return best[1]


def _swap_rows(M, i, j):
    M[i], M[j] = M[j], M[i]


def _swap_cols(M, i, j):
    for row in M:
        row[i], row[j] = row[j], row[i]


def _add_row(M, dst, src, k):
    if k:
        rs = M[src]
        M[dst] = [a + k * b for a, b in zip(M[dst], rs)]


def _add_col(M, dst, src, k):
    if k:
        for row in M:
            row[dst] += k * row[src]


def smith_normal_form(M: Sequence[Sequence[int]]) -> Tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return ``(U, S, V)`` with ``U @ M @ V == S``.

    ``U`` and ``V`` are unimodular, ``S`` is diagonal with nonnegative entries
    ``n_1 | n_2 | ...``; trailing zeros mark the rank deficiency.
    """
    A = [list(r) for r in _check_int(M)]
    m = len(A)
    n = len(A[0]) if m else 0
    U = identity(m)
    V = identity(n)
    for t in range(min(m, n)):
        while True:
            # pivot: smallest nonzero entry of the trailing block
            best = None
            for i in range(t, m):
                for j in range(t, n):
                    if A[i][j] and (best is None or abs(A[i][j]) < best[0]):
                        best = (abs(A[i][j]), i, j)
            if best is None:
                return U, A, V
            _, pi, pj = best
            if pi != t:
                _swap_rows(A, t, pi)
                _swap_rows(U, t, pi)
            if pj != t:
                _swap_cols(A, t, pj)
                _swap_cols(V, t, pj)
            p = A[t][t]
            dirty = False
            for i in range(t + 1, m):
                if A[i][t]:
                    k = -(A[i][t] // p)
                    _add_row(A, i, t, k)
                    _add_row(U, i, t, k)
                    dirty = dirty or A[i][t] != 0
            for j in range(t + 1, n):
                if A[t][j]:
                    k = -(A[t][j] // p)
                    _add_col(A, j, t, k)
                    _add_col(V, j, t, k)
                    dirty = dirty or A[t][j] != 0
            if dirty:
                continue
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if A[i][j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            _add_row(A, t, bad, 1)
            _add_row(U, t, bad, 1)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
    return U, A, V


def invariant_factors(M: Sequence[Sequence[int]]) -> List[int]:
    _, S, _ = smith_normal_form(M)
    return [S[i][i] for i in range(min(len(S), len(S[0]) if S else 0))]


def gcd_list(values) -> int:
    g = 0
    for v in values:
        g = gcd(g, int(v))
    return g

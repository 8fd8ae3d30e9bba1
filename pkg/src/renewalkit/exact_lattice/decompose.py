"""Finite lattice laws: lattice decomposition and aperiodicity classification."""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ..errors import DegenerateSupport, NotApplicable
from .intmat import UnimodularMatrix, identity, matmul, smith_normal_form, transpose
from .normalize import normalize_vector, split_rank
from .symbolic import SymbolicReal, as_symbolic, parse_symbolic

__all__ = [
    "LatticeLaw",
    "LatticeDecomposition",
    "AperiodicityResult",
    "decompose",
    "is_aperiodic",
    "difference_lattice_snf",
    "in_difference_coset",
]


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def _rational_rank(rows: Sequence[Sequence[Fraction]]) -> int:
    A = [list(r) for r in rows]
    rank = 0
    ncol = len(A[0]) if A else 0
    for c in range(ncol):
        piv = next((i for i in range(rank, len(A)) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        for i in range(len(A)):
            if i != rank and A[i][c] != 0:
                f = A[i][c] / A[rank][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[rank])]
        rank += 1
    return rank


class LatticeLaw:
    """Finitely supported law with exact coordinates and exact masses.

    ``symbol_values`` optionally gives numeric values to the irrational
    symbols; they are used only for sign and floor decisions.
    """

    def __init__(
        self,
        atoms: Sequence[Tuple[Sequence, object]],
        symbol_values: Optional[Mapping[str, float]] = None,
        check_nondegenerate: bool = True,
    ):
        if not atoms:
            raise ValueError("empty support")
        pts, masses = [], []
        for point, mass in atoms:
            p = tuple(parse_symbolic(c) if not isinstance(c, SymbolicReal) else c for c in point)
            if isinstance(mass, float):
                raise TypeError("masses must be exact rationals, not floats")
            m = Fraction(mass)
            if m <= 0:
                raise ValueError("masses must be positive")
            pts.append(p)
            masses.append(m)
        d = len(pts[0])
        if any(len(p) != d for p in pts):
            raise ValueError("support points have inconsistent dimension")
        if len(set(pts)) != len(pts):
            raise ValueError("support points must be distinct")
        if sum(masses) != 1:
            raise ValueError(f"masses sum to {sum(masses)}, not 1")
        self.d = d
        self.points: Tuple[Tuple[SymbolicReal, ...], ...] = tuple(pts)
        self.masses: Tuple[Fraction, ...] = tuple(masses)
        self.symbol_values = dict(symbol_values or {})
        if check_nondegenerate and self.affine_dimension() < d:
            raise DegenerateSupport(
                f"affine hull of the support has dimension {self.affine_dimension()} < {d}"
            )

    # construction helpers ---------------------------------------------------
    @classmethod
    def uniform(cls, points, **kw) -> "LatticeLaw":
        m = Fraction(1, len(points))
        return cls([(p, m) for p in points], **kw)

    @classmethod
    def from_json(cls, obj) -> "LatticeLaw":
        if isinstance(obj, str):
            obj = json.loads(obj)
        atoms = [(a["point"], Fraction(str(a["mass"]))) for a in obj["atoms"]]
        law = cls(atoms, symbol_values=obj.get("symbols"))
        if "dim" in obj and int(obj["dim"]) != law.d:
            raise ValueError("declared dim does not match support points")
        return law

    def to_json(self) -> dict:
        out = {
            "dim": self.d,
            "atoms": [
                {"point": [c.to_json() for c in p], "mass": str(m)}
                for p, m in zip(self.points, self.masses)
            ],
        }
        if self.symbol_values:
            out["symbols"] = dict(self.symbol_values)
        return out

    # queries -----------------------------------------------------------------
    def differences(self) -> List[Tuple[SymbolicReal, ...]]:
        x0 = self.points[0]
        return [tuple(a - b for a, b in zip(p, x0)) for p in self.points[1:]]

    def has_rational_differences(self) -> bool:
        return all(c.is_rational() for v in self.differences() for c in v)

    def is_integer(self) -> bool:
        return all(c.is_rational() and c.rational_part.denominator == 1 for p in self.points for c in p)

    def integer_points(self) -> List[List[int]]:
        if not self.is_integer():
            raise NotApplicable("support is not contained in Z^d")
        return [[int(c.rational_part) for c in p] for p in self.points]

    def affine_dimension(self) -> int:
        diffs = self.differences()
        if not diffs:
            return 0
        if self.has_rational_differences():
            return _rational_rank([[c.rational_part for c in v] for v in diffs])
        # irrational differences: numeric rank at the declared (or generic) symbol values
        names = sorted({n for v in diffs for c in v for n in c.symbols})
        rng = random.Random(12345)
        vals = {n: self.symbol_values.get(n, 1.0 + rng.random()) for n in names}
        M = np.array([[c.evaluate(vals) for c in v] for v in diffs], dtype=float)
        return int(np.linalg.matrix_rank(M, tol=1e-9 * max(1.0, np.abs(M).max())))

    def pmf_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        """Integer support points (m, d) and float masses (m,)."""
        return np.array(self.integer_points(), dtype=np.int64), np.array(
            [float(m) for m in self.masses]
        )

    def cf(self, t) -> np.ndarray:
        """Characteristic function at points ``t`` of shape (..., d)."""
        vals = self.symbol_values
        pts = np.array([[c.evaluate(vals) if not c.is_rational() else float(c.rational_part)
                         for c in p] for p in self.points])
        w = np.array([float(m) for m in self.masses])
        t = np.asarray(t, dtype=float)
        phase = np.tensordot(t, pts.T, axes=([-1], [0]))
        return (np.exp(1j * phase) * w).sum(axis=-1)

    def transformed(self, K: Sequence[Sequence[int]]) -> "LatticeLaw":
        """Law of ``K X`` for an integer matrix ``K``."""
        atoms = []
        for p, m in zip(self.points, self.masses):
            atoms.append(([sum((k * c for k, c in zip(row, p) if k), SymbolicReal(0)) for row in K], m))
        return LatticeLaw(atoms, symbol_values=self.symbol_values)

    def __repr__(self):
        return f"LatticeLaw(d={self.d}, atoms={len(self.points)})"


@dataclass(frozen=True)
class LatticeDecomposition:
    """Canonical lattice frame of a finitely supported law.

    ``Y = T X`` lies in ``beta + Z^r`` almost surely, with
    ``beta = (0, ..., 0, p/q, beta_{nu+1}, ..., beta_r)``.  ``K`` is the r x r
    unimodular matrix produced by :func:`normalize_vector` on the offset,
    ``basis`` holds the columns of a basis of the group of ``v`` with
    ``<v, X - X'>`` integral, and ``D = diag(1, ..., 1, q)`` is nu x nu.
    """

    r: int
    nu: int
    q: int
    p: int
    beta: Tuple[SymbolicReal, ...]
    K: UnimodularMatrix
    D: Tuple[Tuple[int, ...], ...]
    transform: Tuple[Tuple[Fraction, ...], ...]
    basis: Tuple[Tuple[Fraction, ...], ...]

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "nu": self.nu,
            "q": self.q,
            "p": self.p,
            "beta": [b.to_json() for b in self.beta],
            "K": self.K.to_json(),
            "D": [list(r) for r in self.D],
            "transform": [[str(x) for x in row] for row in self.transform],
        }


def _frac_matrix_vec(M, v):
    return [sum((Fraction(a) * x for a, x in zip(row, v) if a), SymbolicReal(0)) for row in M]


def decompose(law: LatticeLaw) -> LatticeDecomposition:
    """Lattice decomposition of a finite law whose support differences are rational.

    The group of ``v`` with ``<v, X - X'>`` integral is computed from the Smith
    normal form of the (scaled) difference matrix ``x_j - x_0``; these
    differences generate the same group as all pairwise differences.  The
    offset ``M^T x_0`` is then reduced with :func:`normalize_vector`.
    """
    d = law.d
    if law.affine_dimension() < d:
        raise DegenerateSupport("affine hull dimension < d")
    if not law.has_rational_differences():
        raise NotApplicable(
            "decomposition is implemented for laws whose support differences are rational "
            "(an arbitrary offset, rational or symbolic, is allowed)"
        )
    diffs = [[c.rational_part for c in v] for v in law.differences()]
    L = 1
    for row in diffs:
        for x in row:
            L = _lcm(L, x.denominator)
    Dint = [[int(x * L) for x in row] for row in diffs]
    U, S, W = smith_normal_form(Dint)
    sdiag = [S[i][i] for i in range(d)]
    if any(s == 0 for s in sdiag):
        raise DegenerateSupport("difference matrix is rank deficient")  # pragma: no cover
    # basis of the dual group: columns W diag(L / s_i)
    M = [[Fraction(W[i][j] * L, sdiag[j]) for j in range(d)] for i in range(d)]
    Mt = transpose(M)
    offset = _frac_matrix_vec(Mt, law.points[0])
    K, z = normalize_vector(offset, values=law.symbol_values or None)
    r = d
    nu = r - split_rank(offset)
    beta: List[SymbolicReal] = []
    for i, zi in enumerate(z):
        beta.append(zi.frac(law.symbol_values or None) if not zi.is_zero() else zi)
    if nu > 0:
        bnu = beta[nu - 1].rational_part
        p, q = bnu.numerator, bnu.denominator
    else:
        p, q = 0, 1
    Dm = tuple(tuple(q if (i == j == nu - 1) else int(i == j) for j in range(nu)) for i in range(nu))
    T = matmul(K.entries, Mt)
    return LatticeDecomposition(
        r=r,
        nu=nu,
        q=q,
        p=p,
        beta=tuple(beta),
        K=K,
        D=Dm,
        transform=tuple(tuple(Fraction(x) for x in row) for row in T),
        basis=tuple(tuple(row) for row in M),
    )


# --------------------------------------------------------------------------
# aperiodicity on Z^nu


@dataclass(frozen=True)
class AperiodicityResult:
    aperiodic: bool
    K: Optional[UnimodularMatrix] = None
    p: int = 0
    q: int = 1
    core: Optional[LatticeLaw] = None
    failing_t: Optional[Tuple[Fraction, ...]] = None

    @property
    def strongly_aperiodic(self) -> bool:
        return self.aperiodic and self.q == 1

    def to_json(self) -> dict:
        out: Dict[str, object] = {"aperiodic": self.aperiodic}
        if self.aperiodic:
            out.update(K=self.K.to_json(), p=self.p, q=self.q, core=self.core.to_json())
        else:
            out["failing_t"] = [str(x) for x in self.failing_t]
        return out


def difference_lattice_snf(points: Sequence[Sequence[int]]):
    """SNF ``(U, S, V)`` of the matrix of differences ``x_j - x_0``."""
    x0 = points[0]
    rows = [[a - b for a, b in zip(p, x0)] for p in points[1:]]
    if not rows:
        rows = [[0] * len(x0)]
    return smith_normal_form(rows)


def in_difference_coset(y: Sequence[int], base: Sequence[int], snf) -> bool:
    """Is ``y - base`` in the integer span of the support differences?"""
    _, S, V = snf
    dvec = [a - b for a, b in zip(y, base)]
    w = [sum(dvec[i] * V[i][j] for i in range(len(dvec))) for j in range(len(V[0]))]
    for j, wj in enumerate(w):
        s = S[j][j] if j < len(S) else 0
        if s == 0:
            if wj != 0:
                return False
        elif wj % s:
            return False
    return True


def is_aperiodic(law: LatticeLaw) -> AperiodicityResult:
    """Decide aperiodicity of an integer law exactly and build the witness.

    ``{t : <t, xi> in Z a.s.}`` is read off the SNF of the point matrix; the
    law is aperiodic iff all its invariant factors equal 1.  In that case the
    SNF ``U Dm V = diag(n_i)`` of the difference matrix gives ``K = V^T``,
    ``q = n_nu`` and ``p = (K x_0)_nu mod q``, and the core
    ``zeta = D^{-1}(K xi - p e_nu)`` is strongly aperiodic.
    """
    pts = law.integer_points()
    nu = law.d
    if law.affine_dimension() < nu:
        raise DegenerateSupport("affine hull dimension < nu")
    _, Sp, Vp = smith_normal_form(pts)
    for j in range(nu):
        s = Sp[j][j]
        if s != 1:
            # t = V e_j / s_j has <t, x> integral on the support but t is not integral
            den = s if s else 2
            t = tuple(Fraction(Vp[i][j], den) for i in range(nu))
            return AperiodicityResult(False, failing_t=t)
    _, Sd, Vd = difference_lattice_snf(pts)
    ns = [Sd[j][j] for j in range(nu)]
    if any(n != 1 for n in ns[:-1]):
        raise ArithmeticError("aperiodic law with non-cyclic difference quotient")  # pragma: no cover
    q = ns[-1]
    K = UnimodularMatrix(transpose(Vd))
    b = K.apply(pts[0])
    p = b[-1] % q
    core_atoms = []
    for x, m in zip(pts, law.masses):
        z = K.apply(x)
        z[-1] -= p
        if z[-1] % q:
            raise ArithmeticError("witness construction failed")  # pragma: no cover
        z[-1] //= q
        core_atoms.append((z, m))
    core = LatticeLaw(core_atoms)
    return AperiodicityResult(True, K=K, p=p, q=q, core=core)

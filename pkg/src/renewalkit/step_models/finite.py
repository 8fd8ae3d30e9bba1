"""Finitely supported integer step laws (exact pmf, Gaussian limit)."""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

from ..errors import NotApplicable
from ..exact_lattice import LatticeLaw, is_aperiodic
from ..stable_law import StableLaw
from .base import LatticeInfo, StepDistribution
from .norming import NormingFunction

__all__ = ["FiniteLattice"]


class FiniteLattice(StepDistribution):
    """Step law with finitely many atoms on Z^d; lattice data from the exact classifier."""

    name = "finite_lattice"

    def __init__(self, law: LatticeLaw, label: str = ""):
        pts, w = law.pmf_arrays()
        self.law = law
        self.points = pts
        self.weights = w
        self.d = law.d
        self.alpha = 2.0
        self.label = label or "finite"
        key = {tuple(p): float(m) for p, m in zip(pts.tolist(), w)}
        self._lookup = key
        self.symmetric = all(key.get(tuple(-c for c in p), 0.0) == m for p, m in key.items())
        self.reflection_symmetric = all(
            key.get(tuple(-c if j == i else c for j, c in enumerate(p)), 0.0) == m
            for i in range(law.d)
            for p, m in key.items()
        )
        ap = is_aperiodic(law)
        self.aperiodicity = ap
        if ap.aperiodic:
            self.lattice = LatticeInfo(nu=self.d, q=ap.q, offset=tuple(int(c) for c in pts[0]))
        else:
            self.lattice = None
        self.mean = (pts * w[:, None]).sum(axis=0)
        self.second = (pts[:, :, None] * pts[:, None, :] * w[:, None, None]).sum(axis=0)
        self.radius = float(np.linalg.norm(pts, axis=1).max())

    @classmethod
    def from_points(cls, points: Sequence[Sequence[int]], masses=None, label: str = "") -> "FiniteLattice":
        if masses is None:
            law = LatticeLaw.uniform([[int(c) for c in p] for p in points])
        else:
            law = LatticeLaw([([int(c) for c in p], Fraction(m)) for p, m in zip(points, masses)])
        return cls(law, label)

    @classmethod
    def simple_walk(cls, d: int = 1) -> "FiniteLattice":
        """Uniform on {+-e_i}; period 2."""
        pts = []
        for i in range(d):
            for sgn in (1, -1):
                e = [0] * d
                e[i] = sgn
                pts.append(e)
        return cls.from_points(pts, label=f"simple_walk_d{d}")

    @classmethod
    def hold_walk(cls, d: int = 2) -> "FiniteLattice":
        """Uniform on {0, +-e_i}; strongly aperiodic."""
        pts = [[0] * d]
        for i in range(d):
            for sgn in (1, -1):
                e = [0] * d
                e[i] = sgn
                pts.append(e)
        return cls.from_points(pts, label=f"hold_walk_d{d}")

    # distribution functions ---------------------------------------------------------------
    def pmf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        flat = x.reshape(-1, self.d)
        out = np.array([self._lookup.get(tuple(r), 0.0) for r in flat.tolist()])
        return out.reshape(x.shape[:-1])

    def pmf_box(self, radius: int) -> np.ndarray:
        out = np.zeros((2 * radius + 1,) * self.d)
        for p, m in zip(self.points, self.weights):
            if np.all(np.abs(p) <= radius):
                out[tuple(p + radius)] += m
        return out

    def cf(self, t) -> np.ndarray:
        t = np.asarray(t, float)
        return np.exp(1j * np.tensordot(t, self.points.T.astype(float), axes=([-1], [0]))) @ self.weights

    def tail(self, s) -> np.ndarray:
        r = np.linalg.norm(self.points, axis=1)
        s = np.asarray(s, float)
        return np.sum(self.weights * (r > s[..., None]), axis=-1)

    def truncated_mean(self, s) -> np.ndarray:
        r = np.linalg.norm(self.points, axis=1)
        s = np.asarray(s, float)
        keep = (r <= s[..., None]) * self.weights
        return keep @ self.points.astype(float)

    def truncated_second_moment(self, s, u) -> float:
        u = np.asarray(u, float)
        r = np.linalg.norm(self.points, axis=1)
        proj = self.points @ u
        return float(np.sum(self.weights * proj ** 2 * (r <= s)))

    def truncated_variance(self, s) -> np.ndarray:
        r = np.linalg.norm(self.points, axis=1)
        s = np.asarray(s, float)
        return np.sum(self.weights * r ** 2 * (r <= s[..., None]), axis=-1)

    def cell_probability(self, lo, h: float) -> np.ndarray:
        lo = np.atleast_2d(np.asarray(lo, float))
        inside = np.all((self.points[None] >= lo[:, None]) & (self.points[None] < lo[:, None] + h), axis=-1)
        return inside.astype(float) @ self.weights

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        idx = rng.choice(len(self.weights), size=n, p=self.weights)
        return self.points[idx]

    # limits -------------------------------------------------------------------------------
    def covariance(self) -> np.ndarray:
        return self.second - np.outer(self.mean, self.mean)

    def norming(self) -> NormingFunction:
        return NormingFunction.power(2.0)

    def limit_law(self) -> StableLaw:
        if np.any(np.abs(self.mean) > 1e-15):
            raise NotApplicable("nonzero mean: no limit without centering")
        return StableLaw.gaussian(self.covariance())

    def describe(self):
        return {
            "family": self.name,
            "label": self.label,
            "d": self.d,
            "alpha": self.alpha,
            "atoms": [[p.tolist(), float(m)] for p, m in zip(self.points, self.weights)],
        }


class PointMass(StepDistribution):
    """The degenerate law at 0 in Z^d (no lattice classification: the support spans nothing)."""

    name = "point_mass"
    alpha = 2.0

    def __init__(self, d: int = 1):
        if d < 1:
            raise ValueError("d must be >= 1")
        self.d = int(d)
        self.points = np.zeros((1, self.d), dtype=np.int64)
        self.weights = np.ones(1)
        self.radius = 0.0

    def pmf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        return np.all(x == 0, axis=-1).astype(float)

    def pmf_box(self, radius: int) -> np.ndarray:
        out = np.zeros((2 * radius + 1,) * self.d)
        out[(radius,) * self.d] = 1.0
        return out

    def cf(self, t) -> np.ndarray:
        return np.ones(np.shape(t)[:-1])

    def cf1(self, t) -> np.ndarray:
        return np.ones(np.shape(t))

    def tail(self, s) -> np.ndarray:
        return np.zeros(np.shape(s))

    def cell_probability(self, lo, h: float) -> np.ndarray:
        lo = np.atleast_2d(np.asarray(lo, float))
        return np.all((lo <= 0) & (lo + h > 0), axis=-1).astype(float)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return np.zeros((n, self.d), dtype=np.int64)

    def describe(self):
        return {"family": self.name, "d": self.d}

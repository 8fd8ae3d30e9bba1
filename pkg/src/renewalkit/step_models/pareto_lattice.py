"""Integer-valued step law with radially Pareto tails.

X is a continuous-time simple random walk on Z^d read at an independent
positive (alpha/2)-stable time T with E exp(-lam T) = exp(-C lam^(alpha/2)).
Hence

    phi_X(t) = exp(-C Lambda(t)^(alpha/2)),   Lambda(t) = sum_i 2 (1 - cos t_i),

the pmf is positive on all of Z^d (strongly aperiodic), symmetric under
coordinate reflections and permutations, and

    P(X = x) ~ c_p |x|^(-d-alpha),  c_p = C b 4^b Gamma(b + d/2) / (Gamma(1-b) pi^(d/2)),  b = alpha/2.

S_n / n^(1/alpha) converges to the isotropic law with CF exp(-C |t|^alpha).
"""
from __future__ import annotations

import math

import numpy as np
import scipy.fft as sfft

from ..stable_law import StableLaw
from .base import LatticeInfo, StepDistribution
from .norming import NormingFunction

__all__ = ["ParetoLattice", "positive_stable_rvs"]

_SKELLAM_NORMAL = 1e12  # above this time a coordinate is drawn as a rounded normal


def positive_stable_rvs(beta: float, size, rng: np.random.Generator) -> np.ndarray:
    """Kanter's representation: Laplace transform exp(-lam^beta), 0 < beta < 1."""
    u = rng.uniform(0.0, math.pi, size)
    e = rng.exponential(1.0, size)
    a = np.sin(beta * u) / np.sin(u) ** (1.0 / beta)
    b = (np.sin((1.0 - beta) * u) / e) ** ((1.0 - beta) / beta)
    return a * b


def _sphere_area(d: int) -> float:
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)


class ParetoLattice(StepDistribution):
    """``normalization`` is the CF scale C of the limit exp(-C|t|^alpha)."""

    name = "pareto_lattice"

    def __init__(self, d: int, alpha: float, normalization: float = 1.0, table_torus: int = None):
        if not 0 < alpha < 2:
            raise ValueError("alpha must lie in (0, 2)")
        self.d = int(d)
        self.alpha = float(alpha)
        self.C = float(normalization)
        self.beta = self.alpha / 2.0
        self.lattice = LatticeInfo(nu=self.d, q=1, offset=(0,) * self.d)
        b, d_ = self.beta, self.d
        self.c_p = self.C * b * 4.0 ** b * math.gamma(b + d_ / 2) / (math.gamma(1 - b) * math.pi ** (d_ / 2))
        if table_torus is None:
            table_torus = {1: 1 << 16, 2: 2048, 3: 192}.get(self.d, 32)
        self.table_torus = int(table_torus)
        self.table_radius = self.table_torus // 8
        self._table = None
        self._radial = None

    # characteristic function -------------------------------------------------------------
    def log_cf(self, t) -> np.ndarray:
        t = np.asarray(t, float)
        lam = np.sum(2.0 - 2.0 * np.cos(t), axis=-1)
        return -self.C * lam ** self.beta

    def cf(self, t) -> np.ndarray:
        return np.exp(self.log_cf(t))

    def torus_log_cf_axes(self, N: int):
        """Per-axis 2(1 - cos(2 pi k / N)) for k = 0..N/2 (reflection-symmetric grid)."""
        k = np.arange(N // 2 + 1)
        return 2.0 - 2.0 * np.cos(2.0 * math.pi * k / N)

    reflection_symmetric = True

    # pmf -------------------------------------------------------------------------------
    def _pmf_table(self) -> np.ndarray:
        """P(X = x) for x in [0, N/2]^d from the torus inversion (images at distance N)."""
        if self._table is None:
            N = self.table_torus
            lam1 = self.torus_log_cf_axes(N)
            lam = np.zeros((N // 2 + 1,) * self.d)
            for ax in range(self.d):
                shape = [1] * self.d
                shape[ax] = -1
                lam = lam + lam1.reshape(shape)
            g = np.exp(-self.C * lam ** self.beta)
            p = sfft.dctn(g, type=1) / float(N) ** self.d
            self._table = np.maximum(p, 0.0)
        return self._table

    def pmf(self, x) -> np.ndarray:
        x = np.abs(np.asarray(x, dtype=np.int64))
        tab = self._pmf_table()
        L = self.table_radius
        inside = np.all(x <= L, axis=-1)
        out = np.empty(x.shape[:-1])
        xi = np.where(x <= L, x, 0)
        out[...] = tab[tuple(np.moveaxis(xi, -1, 0))]
        r = np.linalg.norm(x.astype(float), axis=-1)
        far = self.c_p * np.maximum(r, 1.0) ** (-self.d - self.alpha)
        return np.where(inside, out, far)

    def pmf_box(self, radius: int) -> np.ndarray:
        """pmf on [-radius, radius]^d (centred array)."""
        ax = np.arange(-radius, radius + 1)
        grid = np.stack(np.meshgrid(*([ax] * self.d), indexing="ij"), axis=-1)
        return self.pmf(grid)

    def _radial_tables(self):
        """Sorted radii of the table box with cumulative mass and second moment."""
        if self._radial is None:
            L = self.table_radius
            p = self.pmf_box(L)
            ax = np.arange(-L, L + 1, dtype=float)
            grid = np.stack(np.meshgrid(*([ax] * self.d), indexing="ij"), axis=-1).reshape(-1, self.d)
            r = np.linalg.norm(grid, axis=1)
            order = np.argsort(r, kind="stable")
            r = r[order]
            pv = p.reshape(-1)[order]
            x1sq = grid[order, 0] ** 2
            self._radial = (r, np.cumsum(pv), np.cumsum(pv * x1sq))
        return self._radial

    def _ball(self, s: float):
        r, cm, cx = self._radial_tables()
        i = np.searchsorted(r, s, side="right")
        return (cm[i - 1], cx[i - 1]) if i > 0 else (0.0, 0.0)

    # tails and moments --------------------------------------------------------------------
    def tail(self, s) -> np.ndarray:
        s = np.asarray(s, float)
        L = float(self.table_radius)
        qL = max(1.0 - self._ball(L)[0], 0.0)

        def one(x):
            if x < 0:
                return 1.0
            if x <= L:
                return max(1.0 - self._ball(x)[0], 0.0)
            # regularly varying continuation matched at the table radius
            return qL * (x / L) ** -self.alpha

        return np.vectorize(one, otypes=[float])(s)

    def coordinate_second_moment(self, s: float) -> float:
        L = float(self.table_radius)
        if s <= L:
            return float(self._ball(s)[1])
        extra = self.c_p * _sphere_area(self.d) * (s ** (2 - self.alpha) - L ** (2 - self.alpha)) / (self.d * (2 - self.alpha))
        return float(self._ball(L)[1] + extra)

    def truncated_second_moment(self, s, u) -> float:
        u = np.asarray(u, float)
        return float(u @ u) * self.coordinate_second_moment(float(s))

    def truncated_variance(self, s) -> np.ndarray:
        return self.d * np.vectorize(self.coordinate_second_moment, otypes=[float])(np.asarray(s, float))

    def cell_probability(self, lo, h: float) -> np.ndarray:
        """Sum of the pmf over the integer points of lo + [0, h)^d."""
        lo = np.atleast_2d(np.asarray(lo, float))
        out = np.empty(lo.shape[0])
        for i, row in enumerate(lo):
            first = np.ceil(row).astype(np.int64)
            last = np.ceil(row + h).astype(np.int64) - 1
            if np.any(last < first):
                out[i] = 0.0
                continue
            axes = [np.arange(a, b + 1) for a, b in zip(first, last)]
            pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
            out[i] = float(self.pmf(pts).sum())
        return out

    # sampling ---------------------------------------------------------------------------
    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        T = self.C ** (1.0 / self.beta) * positive_stable_rvs(self.beta, n, rng)
        T = np.repeat(T[:, None], self.d, axis=1)
        out = np.empty((n, self.d), dtype=np.int64)
        small = T <= _SKELLAM_NORMAL
        out[small] = rng.poisson(T[small]) - rng.poisson(T[small])
        big = ~small
        if np.any(big):
            out[big] = np.rint(rng.normal(0.0, np.sqrt(2.0 * T[big]))).astype(np.int64)
        return out

    # limits -----------------------------------------------------------------------------
    def norming(self) -> NormingFunction:
        return NormingFunction.power(self.alpha)

    def limit_law(self) -> StableLaw:
        return StableLaw.isotropic(self.alpha, self.d, cf_scale=self.C)

    def describe(self):
        return {"family": self.name, "d": self.d, "alpha": self.alpha, "normalization": self.C}

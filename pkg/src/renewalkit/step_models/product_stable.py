"""i.i.d. symmetric alpha-stable coordinates, each with CF exp(-|scale t|^alpha)."""
from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate, interpolate

from ..stable_law import StableLaw, sym_stable_pdf, sym_stable_sf
from .base import StepDistribution
from .norming import NormingFunction

__all__ = ["ProductStable", "symmetric_stable_rvs"]


def symmetric_stable_rvs(alpha: float, size, rng: np.random.Generator) -> np.ndarray:
    """Chambers-Mallows-Stuck draw with CF exp(-|t|^alpha)."""
    v = rng.uniform(-math.pi / 2.0, math.pi / 2.0, size)
    w = rng.exponential(1.0, size)
    if alpha == 1.0:
        return np.tan(v)
    return (np.sin(alpha * v) / np.cos(v) ** (1.0 / alpha)) * (
        np.cos((1.0 - alpha) * v) / w
    ) ** ((1.0 - alpha) / alpha)


def _quad(f, a, b, points=None) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(f, a, b, epsabs=1e-15, epsrel=1e-10, limit=400, points=points)[0]


class ProductStable(StepDistribution):
    name = "product_stable"

    def __init__(self, d: int, alpha: float, scale: float = 1.0):
        if not 0 < alpha < 2:
            raise ValueError("alpha must lie in (0, 2)")
        self.d = int(d)
        self.alpha = float(alpha)
        self.scale = float(scale)
        self._tables = {}

    # one coordinate ---------------------------------------------------------------------
    def g(self, x) -> np.ndarray:
        return sym_stable_pdf(x, self.alpha, self.scale)

    def sf(self, x) -> np.ndarray:
        return sym_stable_sf(x, self.alpha, self.scale)

    def interval(self, a, b) -> np.ndarray:
        """P(a <= xi < b), computed from the nearer tail for precision."""
        a = np.asarray(a, float)
        b = np.asarray(b, float)
        right = self.sf(a) - self.sf(b)
        left = self.sf(-b) - self.sf(-a)
        mid = 1.0 - self.sf(b) - self.sf(-a)
        return np.where(a >= 0, right, np.where(b <= 0, left, mid))

    # coordinate hooks for product bounds of cell integrals
    coordinate_lattice = False

    def coordinate_interval(self, a, b) -> np.ndarray:
        return self.interval(a, b)

    # ball tails q_m(s) = P(|(xi_1..xi_m)| > s) -------------------------------------------------
    def _q(self, m: int, s: float) -> float:
        if s <= 0:
            return 1.0
        if m == 1:
            return float(2.0 * self.sf(s))
        inner = self._q_fn(m - 1)
        f = lambda x: float(self.g(x)) * inner(math.sqrt(max(s * s - x * x, 0.0)))
        return float(2.0 * self.sf(s)) + 2.0 * _quad(f, 0.0, s, points=[min(1.0, s / 2)])

    def _q_fn(self, m: int):
        if m == 1:
            return lambda r: float(2.0 * self.sf(r)) if r > 0 else 1.0
        if m not in self._tables:
            r = np.concatenate([np.linspace(0.0, 2.0, 21)[1:], np.geomspace(2.1, 1e8, 120)])
            v = np.array([self._q(m, float(x)) for x in r])
            self._tables[m] = interpolate.PchipInterpolator(np.log(r), np.log(v))
        sp = self._tables[m]

        def f(r):
            if r <= 0:
                return 1.0
            lr = math.log(r)
            if lr < sp.x[0]:
                return float(math.exp(sp(sp.x[0])))
            if lr > sp.x[-1]:
                slope = float(sp(sp.x[-1], 1))
                return float(math.exp(sp(sp.x[-1]) + slope * (lr - sp.x[-1])))
            return float(math.exp(sp(lr)))

        return f

    def tail(self, s) -> np.ndarray:
        s = np.asarray(s, float)
        return np.vectorize(lambda x: self._q(self.d, float(x)), otypes=[float])(s)

    def coordinate_second_moment(self, s: float) -> float:
        """E[xi_1^2 1{|X| <= s}]."""
        if self.d == 1:
            return 2.0 * _quad(lambda x: x * x * float(self.g(x)), 0.0, s)
        inner = self._q_fn(self.d - 1)
        f = lambda x: x * x * float(self.g(x)) * (1.0 - inner(math.sqrt(max(s * s - x * x, 0.0))))
        return 2.0 * _quad(f, 0.0, s, points=[min(1.0, s / 2)])

    def truncated_second_moment(self, s, u) -> float:
        u = np.asarray(u, float)
        return float(u @ u) * self.coordinate_second_moment(float(s))

    def truncated_variance(self, s) -> np.ndarray:
        return self.d * np.vectorize(self.coordinate_second_moment, otypes=[float])(np.asarray(s, float))

    def cf1(self, t) -> np.ndarray:
        """Characteristic function of one coordinate."""
        return np.exp(-np.abs(self.scale * np.asarray(t, float)) ** self.alpha)

    def cf(self, t) -> np.ndarray:
        t = np.asarray(t, float)
        return np.exp(-np.sum(np.abs(self.scale * t) ** self.alpha, axis=-1))

    def cell_probability(self, lo, h: float) -> np.ndarray:
        lo = np.atleast_2d(np.asarray(lo, float))
        return np.prod(self.interval(lo, lo + h), axis=-1)

    def density(self, x) -> np.ndarray:
        return np.prod(self.g(np.asarray(x, float)), axis=-1)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.scale * symmetric_stable_rvs(self.alpha, (n, self.d), rng)

    def norming(self) -> NormingFunction:
        return NormingFunction.power(self.alpha)

    def limit_law(self) -> StableLaw:
        return StableLaw.product(self.alpha, self.d, cf_scale=self.scale ** self.alpha)

    def describe(self):
        return {"family": self.name, "d": self.d, "alpha": self.alpha, "scale": self.scale}

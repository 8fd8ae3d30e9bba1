"""Rotation-invariant continuous step laws given by the law of |X|.

Two profiles are built in:

* ``log_tail``: P(|X| > r) = e^2 / (r^2 ln r) for r >= e (infinite variance,
  A(s) = s^2 / ln ln s up to constants);
* ``power_density``: density proportional to (1 + |x|)^(-d-2), so that
  |X| / (1 + |X|) ~ Beta(d, 2) and q_X(s) ~ s^-2.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special

from ..stable_law import StableLaw
from .base import StepDistribution
from .norming import NormingFunction

__all__ = ["RadialModel"]

_PROFILES = ("log_tail", "power_density")
_E2 = math.e ** 2


def _sphere_area(d: int) -> float:
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)


class RadialModel(StepDistribution):
    name = "radial"

    def __init__(self, d: int, profile: str = "log_tail"):
        if profile not in _PROFILES:
            raise ValueError(f"profile must be one of {_PROFILES}")
        self.d = int(d)
        self.profile = profile
        self.alpha = 2.0
        self._gl = np.polynomial.legendre.leggauss(4)

    # radius law -------------------------------------------------------------------------
    def tail(self, s) -> np.ndarray:
        s = np.asarray(s, float)
        if self.profile == "log_tail":
            with np.errstate(divide="ignore", invalid="ignore"):
                v = _E2 / (s ** 2 * np.log(s))
            return np.where(s < math.e, 1.0, v)
        u = s / (1.0 + s)
        return np.where(s <= 0, 1.0, special.betaincc(self.d, 2.0, np.maximum(u, 0.0)))

    def radius_density(self, r) -> np.ndarray:
        r = np.asarray(r, float)
        if self.profile == "log_tail":
            with np.errstate(divide="ignore", invalid="ignore"):
                lr = np.log(r)
                v = _E2 * (2.0 * lr + 1.0) / (r ** 3 * lr ** 2)
            return np.where(r < math.e, 0.0, v)
        u = r / (1.0 + r)
        return special.beta(self.d, 2.0) ** -1 * u ** (self.d - 1) * (1.0 - u) / (1.0 + r) ** 2

    def density(self, x) -> np.ndarray:
        x = np.asarray(x, float)
        r = np.linalg.norm(x, axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.radius_density(r) / (_sphere_area(self.d) * r ** (self.d - 1))
        return np.where(r > 0, out, 0.0 if self.profile == "log_tail" else np.nan_to_num(out))

    def _radius_second_moment(self, s: float) -> float:
        """E[|X|^2 1{|X| <= s}] = 2 int_0^s r (q(r) - q(s)) dr."""
        if s <= 0:
            return 0.0
        qs = float(self.tail(s))
        if self.profile == "log_tail":
            if s <= math.e:
                return 0.0
            # int_e^s 2 r q(r) dr = 2 e^2 (ln ln s) and the e^2 head from q = 1 on [0, e)
            head = _E2 * (1.0 - qs)
            return float(head + 2.0 * _E2 * math.log(math.log(s)) - qs * (s ** 2 - _E2))
        f = lambda r: r * r * float(self.radius_density(r))
        return float(integrate.quad(f, 0.0, s, limit=200, epsrel=1e-11)[0])

    def truncated_second_moment(self, s, u) -> float:
        u = np.asarray(u, float)
        return float(u @ u) * self._radius_second_moment(float(s)) / self.d

    def truncated_variance(self, s) -> np.ndarray:
        return np.vectorize(self._radius_second_moment, otypes=[float])(np.asarray(s, float))

    def cf(self, t) -> np.ndarray:
        raise NotImplementedError("radial profiles have no closed-form CF")

    def cell_probability(self, lo, h: float) -> np.ndarray:
        """Tensor Gauss-Legendre (4 nodes per axis) over lo + [0, h)^d."""
        lo = np.atleast_2d(np.asarray(lo, float))
        x, w = self._gl
        x = 0.5 * h * (x + 1.0)
        w = 0.5 * h * w
        grids = np.meshgrid(*([x] * self.d), indexing="ij")
        nodes = np.stack([g.reshape(-1) for g in grids], axis=-1)
        wts = np.prod(np.stack(np.meshgrid(*([w] * self.d), indexing="ij"), axis=-1).reshape(-1, self.d), axis=1)
        out = np.empty(len(lo))
        step = max(1, (1 << 21) // len(nodes))
        for i in range(0, len(lo), step):
            block = lo[i : i + step, None, :] + nodes[None, :, :]
            out[i : i + step] = self.density(block) @ wts
        return out

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        g = rng.standard_normal((n, self.d))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        if self.profile == "power_density":
            u = rng.beta(self.d, 2.0, n)
            r = u / (1.0 - u)
        else:
            # solve r^2 ln r = e^2 / v, i.e. 2 y + ln y = 2 - ln v with y = ln r
            v = 1.0 - rng.random(n)
            rhs = 2.0 - np.log(v)
            y = np.maximum(rhs / 2.0, 1.0)
            for _ in range(60):
                y = y - (2.0 * y + np.log(y) - rhs) / (2.0 + 1.0 / y)
            r = np.exp(y)
        return g * r[:, None]

    def norming(self) -> NormingFunction:
        if self.profile == "log_tail":
            return NormingFunction.square_loglog()
        return NormingFunction.power_log(2.0)

    def limit_law(self) -> StableLaw:
        return StableLaw.isotropic(2.0, self.d, cf_scale=1.0)

    def describe(self):
        return {"family": self.name, "d": self.d, "profile": self.profile, "alpha": self.alpha}

"""Product law with heavy-tailed integer coordinates and spikes at powers of two.

P(xi = +-k) = c k^(-1-d/2) ln k   for k not a power of two,
            = c k^(-d/2) / b_k      for k = 2^n, n >= 1,
and X = (xi_1..xi_d) with i.i.d. coordinates.  b is constant on each
[k, k+1), so only its values at integers matter.
"""
from __future__ import annotations

import math
from typing import Callable, Union

import mpmath
import numpy as np

from ..stable_law import StableLaw
from .base import LatticeInfo, StepDistribution
from .coordinate_sums import CoordinateSums
from .norming import NormingFunction

__all__ = ["WilliamsonModified", "b_spec"]

K_TABLE = 1 << 22
K_SAMPLE = 1 << 20
_LN2 = math.log(2.0)


def b_spec(spec: Union[str, float, Callable]) -> Callable[[np.ndarray], np.ndarray]:
    """b(k) on integers k >= 2 from ``"const"``, ``"ln"``, ``"ln2"``, a number, or a callable."""
    if callable(spec):
        return lambda k: np.asarray(spec(np.asarray(k, float)), float)
    if isinstance(spec, (int, float)):
        v = float(spec)
        return lambda k: np.full(np.shape(k), v)
    if spec == "const":
        return lambda k: np.ones(np.shape(k))
    if spec == "ln":
        return lambda k: np.log(np.asarray(k, float))
    if spec == "ln2":
        return lambda k: np.log(np.asarray(k, float)) ** 2
    raise ValueError(f"unknown b_k spec {spec!r}")


def _is_pow2(k: np.ndarray) -> np.ndarray:
    k = np.asarray(k, np.int64)
    return (k >= 2) & ((k & (k - 1)) == 0)


class WilliamsonModified(StepDistribution):
    name = "williamson"

    def __init__(self, d: int, b: Union[str, float, Callable] = "const"):
        if d not in (2, 3, 4):
            raise ValueError("WilliamsonModified is defined here for d in {2, 3, 4}")
        self.d = d
        self.alpha = d / 2.0 if d < 4 else 2.0
        self.sigma = 1.0 + d / 2.0
        self.b_label = b if isinstance(b, str) else "custom"
        self.b = b_spec(b)
        self.lattice = LatticeInfo(nu=d, q=1, offset=(0,) * d)
        self.c = self._normalizer()
        self._tail_memo = {}
        k = np.arange(K_TABLE + 1, dtype=np.int64)
        pa = self.p_abs(k)
        # P(|xi| > k) by reverse cumulative sums, anchored on the analytic tail past the table
        rev = np.cumsum(pa[::-1])[::-1]
        self._tail_tab = np.empty(K_TABLE + 1)
        self._tail_tab[:-1] = rev[1:] + self._tail_beyond(K_TABLE)
        self._tail_tab[-1] = self._tail_beyond(K_TABLE)
        self._sums = CoordinateSums(d, self.p_abs, self.tail_abs, r_max=2e6 if d < 4 else 1e5)
        self._sampler = None

    # pmf ---------------------------------------------------------------------------
    def _pow2_terms(self, n_lo: int, n_hi: int):
        n = np.arange(n_lo, n_hi + 1)
        k = 2.0 ** n
        spike = k ** (-self.d / 2.0) / self.b(k)
        smooth = k ** (-self.sigma) * n * _LN2
        return spike, smooth

    def _normalizer(self) -> float:
        # sum_{k>=2} k^-sigma ln k = -zeta'(sigma), then swap the power-of-two terms
        base = -float(mpmath.zeta(self.sigma, 1, derivative=1))
        spike, smooth = self._pow2_terms(1, 400)
        return 1.0 / (2.0 * (base - smooth.sum() + spike.sum()))

    def p_abs(self, k) -> np.ndarray:
        """P(|xi| = k) for integers k >= 0."""
        k = np.asarray(k, np.int64)
        kf = np.maximum(k, 1).astype(float)
        smooth = kf ** (-self.sigma) * np.log(kf)
        spike = kf ** (-self.d / 2.0) / np.where(_is_pow2(k), self.b(np.maximum(kf, 2.0)), 1.0)
        out = 2.0 * self.c * np.where(_is_pow2(k), spike, smooth)
        return np.where(k >= 1, out, 0.0)

    def pmf1(self, k) -> np.ndarray:
        """P(xi = k) for signed integers."""
        return 0.5 * self.p_abs(np.abs(np.asarray(k, np.int64)))

    def pmf(self, x) -> np.ndarray:
        x = np.asarray(x)
        return np.prod(self.pmf1(x), axis=-1)

    def _tail_beyond(self, K: int) -> float:
        """P(|xi| > K) from the Hurwitz zeta derivative, for integer K >= 1."""
        m = K + 1
        smooth = -float(mpmath.zeta(self.sigma, m, derivative=1))
        n0 = max(1, int(math.ceil(math.log2(m))))
        spike, sm = self._pow2_terms(n0, n0 + 400)
        return 2.0 * self.c * (smooth - sm.sum() + spike.sum())

    def tail_abs(self, k) -> np.ndarray:
        """P(|xi| > k) for integers k >= 0."""
        k = np.asarray(k, np.int64)
        scalar = k.ndim == 0
        k = np.atleast_1d(k)
        inside = k <= K_TABLE
        out = np.empty(k.shape, float)
        out[inside] = self._tail_tab[k[inside]]
        for idx in zip(*np.nonzero(~inside)):
            key = int(k[idx])
            if key not in self._tail_memo:
                self._tail_memo[key] = self._tail_beyond(key)
            out[idx] = self._tail_memo[key]
        return out[0] if scalar else out

    def xi_interval(self, a, b) -> np.ndarray:
        """P(a <= xi < b) for real a < b (vectorised)."""
        a = np.asarray(a, float)
        b = np.asarray(b, float)
        lo = np.ceil(a).astype(np.int64)
        hi = np.ceil(b).astype(np.int64) - 1  # integers in [a, b) are lo..hi
        return _interval_sum(self, lo, hi)

    # coordinate hooks for product bounds of cell integrals
    coordinate_lattice = True

    def coordinate_interval(self, a, b) -> np.ndarray:
        return self.xi_interval(a, b)

    def coordinate_pmf(self, k) -> np.ndarray:
        return self.pmf1(k)

    def sup_candidates(self, r_min: float, r_max: float, h: float = 1.0) -> np.ndarray:
        """Points t with r_min < |t| <= r_max whose largest coordinate sits on a spike 2^m.

        The cell t_1 - z_1 + [0, h) covers 2^m for z_1 around 0 when t_1 = 2^m + h/2.
        """
        d = self.d
        out = []
        m = max(1, int(math.floor(math.log2(r_min / math.sqrt(d)))))
        while 2.0 ** m <= r_max:
            t1 = 2.0 ** m + 0.5 * h
            rest = r_min ** 2 - t1 ** 2
            y = math.sqrt(rest / (d - 1)) * (1 + 1e-9) if rest > 0 else 0.0
            if y <= t1:
                out.append([t1] + [y] * (d - 1))
            m += 1
        return np.array(out).reshape(-1, d)

    # distribution functions --------------------------------------------------------------
    def tail(self, s) -> np.ndarray:
        s = np.asarray(s, float)
        return np.vectorize(self._sums.ball_tail, otypes=[float])(s)

    def coordinate_tail(self, s) -> np.ndarray:
        return self.tail_abs(np.floor(np.asarray(s, float)).astype(np.int64))

    def truncated_variance(self, s) -> np.ndarray:
        f = np.vectorize(self._sums.coordinate_second_moment, otypes=[float])
        return self.d * f(np.asarray(s, float))

    def truncated_second_moment(self, s, u) -> float:
        u = np.asarray(u, float)
        return float(u @ u) * float(self._sums.coordinate_second_moment(float(s)))

    def cf1(self, t) -> np.ndarray:
        """E cos(t xi) from the first 2^20 atoms; the error is at most P(|xi| > 2^20)."""
        t = np.asarray(t, float)
        k = np.arange(1, K_SAMPLE + 1, dtype=np.int64)
        w = self.p_abs(k)
        kf = k.astype(float)
        out = np.array([np.dot(w, np.cos(tt * kf)) for tt in t.reshape(-1)])
        return out.reshape(t.shape)

    def cf(self, t) -> np.ndarray:
        return np.prod(self.cf1(np.asarray(t, float)), axis=-1)

    def cell_probability(self, lo, h: float) -> np.ndarray:
        lo = np.atleast_2d(np.asarray(lo, float))
        return np.prod(self.xi_interval(lo, lo + h), axis=-1)

    # limits -----------------------------------------------------------------------------------
    def norming(self) -> NormingFunction:
        if self.d == 4:
            return NormingFunction.square_log2(s_min=2.0)
        return NormingFunction.power_log(self.alpha, s_min=2.0)

    def limit_law(self) -> StableLaw:
        """Limit of S_n / a_n: product of symmetric alpha-stable coordinates (d < 4), N(0, cI) (d = 4)."""
        if self.d == 4:
            return StableLaw.gaussian(self.c * np.eye(4))
        a = self.alpha
        # n P(|xi| > a_n) -> K0 with A(s) = s^a / ln s and P(|xi| > x) ~ (2c/a) x^-a ln x
        K0 = 2.0 * self.c / a
        if a == 1.0:
            scale = K0 * math.pi / 2.0
        else:
            scale = K0 * math.gamma(1.0 - a) * math.cos(math.pi * a / 2.0)
        return StableLaw.product(a, self.d, cf_scale=scale)

    # sampling -------------------------------------------------------------------------------------
    def _build_sampler(self):
        k = np.arange(1, K_SAMPLE + 1, dtype=np.int64)
        cdf = np.cumsum(self.p_abs(k))
        tail = float(self.tail_abs(np.array([K_SAMPLE]))[0])
        n0 = int(math.floor(math.log2(K_SAMPLE))) + 1
        spike, _ = self._pow2_terms(n0, n0 + 200)
        spike_mass = 2.0 * self.c * spike
        self._sampler = (cdf, tail, n0, spike_mass, spike_mass.sum())

    def _continuous_tail(self, u: np.ndarray) -> np.ndarray:
        """Solve G(x) / G(K) = u for G(x) = x^(1-sigma)(ln x/(sigma-1) + 1/(sigma-1)^2)."""
        g = self.sigma - 1.0
        G = lambda lx: np.exp((1 - self.sigma) * lx) * (lx / g + 1.0 / g ** 2)
        lK = math.log(K_SAMPLE + 1.0)
        target = u * G(np.array(lK))
        lo = np.full(u.shape, lK)
        hi = lo + 200.0
        for _ in range(90):
            mid = 0.5 * (lo + hi)
            above = G(mid) > target
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
        return np.exp(0.5 * (lo + hi))

    def sample_abs(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """|xi| by inverse cdf up to 2^20 and a continuous continuation beyond."""
        if self._sampler is None:
            self._build_sampler()
        cdf, tail, n0, spike_mass, spike_total = self._sampler
        u = rng.random(n)
        out = np.searchsorted(cdf, u * (cdf[-1] + tail), side="right").astype(np.int64) + 1
        beyond = np.flatnonzero(out > K_SAMPLE)
        if beyond.size:
            v = rng.random(beyond.size)
            is_spike = v < spike_total / tail
            vals = np.empty(beyond.size, np.int64)
            if np.any(is_spike):
                j = np.searchsorted(np.cumsum(spike_mass), v[is_spike] * tail, side="right")
                vals[is_spike] = (2 ** (n0 + np.minimum(j, len(spike_mass) - 1))).astype(np.int64)
            todo = np.flatnonzero(~is_spike)
            while todo.size:
                x = np.floor(self._continuous_tail(rng.random(todo.size))).astype(np.int64)
                ok = ~_is_pow2(x)
                vals[todo[ok]] = x[ok]
                todo = todo[~ok]
            out[beyond] = vals
        return out

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        mag = self.sample_abs(n * self.d, rng)
        sign = rng.integers(0, 2, size=n * self.d) * 2 - 1
        return (mag * sign).reshape(n, self.d)

    def describe(self):
        return {"family": self.name, "d": self.d, "alpha": self.alpha, "b": self.b_label, "c": self.c}


def _interval_sum(model: WilliamsonModified, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """sum_{k=lo}^{hi} P(xi = k), elementwise; empty ranges give 0."""
    lo, hi = np.broadcast_arrays(lo, hi)
    out = np.zeros(lo.shape)
    short = (hi - lo) <= 64
    for idx in zip(*np.nonzero(short & (hi >= lo))):
        ks = np.arange(lo[idx], hi[idx] + 1)
        out[idx] = model.pmf1(ks).sum()
    long_ = ~short & (hi >= lo)
    if np.any(long_):
        a, b = lo[long_], hi[long_]
        # P(xi <= m) through one-sided tails keeps precision far from 0
        def upper(m):  # P(xi > m)
            pos = m >= 0
            res = np.empty(m.shape)
            res[pos] = 0.5 * model.tail_abs(m[pos])
            res[~pos] = 1.0 - 0.5 * model.tail_abs(-m[~pos] - 1)
            return res

        out[long_] = upper(a - 1) - upper(b)
    return out

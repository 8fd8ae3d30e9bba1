"""Ball probabilities for vectors with i.i.d. integer coordinates.

With P1(k) = P(|xi| = k) and Q_1(R) = P(xi^2 > R), the tail of the sum of m
squares obeys

    Q_m(R) = Q_1(R) + sum_{k <= sqrt R} P1(k) Q_{m-1}(R - k^2),

a sum of nonnegative terms, so relative precision survives far into the tail.
Level 2 is evaluated exactly.  Level m >= 3 evaluates the terms with small k
(argument close to R, where the lattice structure of Q_{m-1} matters) by the
same recursion and the rest from a log-log table of Q_{m-1} built on exact or
hybrid node values.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable

import numpy as np

__all__ = ["CoordinateSums"]

_NEAR = {3: 64, 4: 8}
_TABLE_NODES = 160


class CoordinateSums:
    """Q_m and truncated second moments for X = (xi_1..xi_d), xi_i i.i.d. on Z.

    ``p_abs(k)`` is P(|xi| = k) (vectorised, k >= 0) and ``tail_abs(k)`` is
    P(|xi| > k) for integer k >= 0.
    """

    def __init__(self, d: int, p_abs: Callable, tail_abs: Callable, r_max: float = 2e6):
        self.d = d
        self.p_abs = p_abs
        self.tail_abs = tail_abs
        self.r_max = float(r_max)
        self._tables = {}

    # level 1 / exact level-m recursion ------------------------------------------------
    def _q1(self, R: np.ndarray) -> np.ndarray:
        R = np.asarray(R, float)
        k = np.floor(np.sqrt(np.maximum(R, 0.0)) + 1e-9).astype(np.int64)
        k = np.where(k * k > R, k - 1, k)
        out = self.tail_abs(np.maximum(k, 0))
        return np.where(R < 0, 1.0, out)

    def q(self, m: int, R: float) -> float:
        """Q_m(R) = P(xi_1^2 + ... + xi_m^2 > R)."""
        if R < 0:
            return 1.0
        if m == 1:
            return float(self._q1(np.array([R]))[0])
        r = math.isqrt(int(math.floor(R)))
        k = np.arange(0, r + 1, dtype=np.int64)
        rest = R - k.astype(float) ** 2
        inner = self._level_values(m - 1, k, rest)
        return float(self._q1(np.array([R]))[0] + np.sum(self.p_abs(k) * inner))

    def _level_values(self, m: int, k: np.ndarray, rest: np.ndarray) -> np.ndarray:
        """Q_m(rest) with exact evaluation for small k and tables for the others."""
        if m == 1:
            return self._q1(rest)
        near = _NEAR.get(m + 1, 0)
        out = np.empty_like(rest)
        small = k <= near
        for i in np.flatnonzero(small):
            out[i] = self.q(m, float(rest[i]))
        if np.any(~small):
            out[~small] = self.table(m)(rest[~small])
        return out

    # tables ---------------------------------------------------------------------------------
    def table(self, m: int) -> Callable[[np.ndarray], np.ndarray]:
        """Q_m(R) by log-log interpolation in r = sqrt(R); exact for r <= 32."""
        if m not in self._tables:
            r_nodes = np.unique(
                np.concatenate([np.arange(0, 33), np.geomspace(33, self.r_max, _TABLE_NODES)])
            )
            vals = np.array([self.q(m, float(r) ** 2) for r in r_nodes])
            self._tables[m] = (r_nodes, vals)
        r_nodes, vals = self._tables[m]
        lr = np.log(r_nodes[33:])
        lv = np.log(np.maximum(vals[33:], 1e-300))

        def f(R):
            R = np.asarray(R, float)
            out = np.empty_like(R)
            small = R < 33.0 ** 2
            if np.any(small):
                out[small] = [self.q(m, float(x)) if x >= 0 else 1.0 for x in R[small]]
            if np.any(~small):
                x = np.log(np.sqrt(R[~small]))
                y = np.interp(x, lr, lv)
                hi = x > lr[-1]
                if np.any(hi):
                    slope = (lv[-1] - lv[-2]) / (lr[-1] - lr[-2])
                    y[hi] = lv[-1] + slope * (x[hi] - lr[-1])
                out[~small] = np.exp(y)
            return out

        return f

    # public quantities --------------------------------------------------------------------
    def ball_tail(self, s: float) -> float:
        """q_X(s) = P(|X| > s)."""
        return self.q(self.d, float(s) ** 2)

    def coordinate_second_moment(self, s: float) -> float:
        """E[xi_1^2 1{|X| <= s}]."""
        R = float(s) ** 2
        r = math.isqrt(int(math.floor(R)))
        k = np.arange(1, r + 1, dtype=np.int64)
        if self.d == 1:
            return float(np.sum(self.p_abs(k) * k.astype(float) ** 2))
        rest = R - k.astype(float) ** 2
        inner = self._level_values(self.d - 1, k, rest)
        return float(np.sum(self.p_abs(k) * k.astype(float) ** 2 * (1.0 - inner)))

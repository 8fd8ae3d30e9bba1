"""Norming functions A(s) and their inverses a_n = A^{-1}(n)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

__all__ = ["NormingFunction"]

_FAMILIES = ("power", "power_log", "square_log2", "square_loglog", "table")
_S_MAX = 1e12


def _raw(kind: str, alpha: float, s: np.ndarray, scale: float) -> np.ndarray:
    if kind == "power":
        return scale * s ** alpha
    if kind == "power_log":
        return scale * s ** alpha / np.log(s)
    if kind == "square_log2":
        return scale * s ** 2 / np.log(s) ** 2
    if kind == "square_loglog":
        return scale * s ** 2 / np.log(np.log(s))
    raise ValueError(kind)


def _natural_s_min(kind: str, alpha: float) -> float:
    """Smallest s from which the closed form is increasing (and positive)."""
    if kind == "power":
        return 0.0
    if kind == "power_log":
        return math.exp(1.0 / alpha)
    if kind == "square_log2":
        return math.e
    if kind == "square_loglog":
        # positive for s > e^e; increasing once 2 ln s ln ln s > 1
        return math.exp(math.e)
    return 0.0


@dataclass(frozen=True)
class NormingFunction:
    """Strictly increasing A with A(s) regularly varying of index ``alpha``.

    Below ``s_min`` the closed form is replaced by the power continuation
    A(s_min) (s/s_min)^alpha so A is increasing on (0, inf) and a_n exists
    for every n >= 1.  ``a(0) = 1`` by convention.
    """

    kind: str
    alpha: float
    s_min: float = 0.0
    scale: float = 1.0
    table_s: Optional[tuple] = None
    table_A: Optional[tuple] = None
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in _FAMILIES:
            raise ValueError(f"unknown norming family {self.kind!r}")
        if not 0 < self.alpha <= 2:
            raise ValueError("alpha must lie in (0, 2]")
        if self.kind in ("square_log2", "square_loglog") and self.alpha != 2:
            raise ValueError(f"{self.kind} has index 2")
        if self.kind == "table":
            s = np.asarray(self.table_s, float)
            A = np.asarray(self.table_A, float)
            if s.ndim != 1 or s.shape != A.shape or len(s) < 2:
                raise ValueError("table needs matching 1-d s and A arrays")
            if np.any(np.diff(s) <= 0) or np.any(np.diff(A) <= 0) or np.any(A <= 0):
                raise ValueError("table must be strictly increasing and positive")
            object.__setattr__(self, "table_s", tuple(s))
            object.__setattr__(self, "table_A", tuple(A))
            object.__setattr__(self, "s_min", float(s[0]))
        else:
            object.__setattr__(self, "s_min", max(float(self.s_min), _natural_s_min(self.kind, self.alpha)))

    # constructors ------------------------------------------------------------
    @classmethod
    def power(cls, alpha: float, scale: float = 1.0) -> "NormingFunction":
        return cls("power", alpha, scale=scale, label=f"s^{alpha:g}")

    @classmethod
    def power_log(cls, alpha: float, s_min: float = 0.0) -> "NormingFunction":
        return cls("power_log", alpha, s_min=s_min, label=f"s^{alpha:g}/ln s")

    @classmethod
    def square_log2(cls, s_min: float = 0.0) -> "NormingFunction":
        return cls("square_log2", 2.0, s_min=s_min, label="s^2/(ln s)^2")

    @classmethod
    def square_loglog(cls, s_min: float = 0.0) -> "NormingFunction":
        return cls("square_loglog", 2.0, s_min=s_min, label="s^2/ln ln s")

    @classmethod
    def from_table(cls, s: Sequence[float], A: Sequence[float], alpha: float) -> "NormingFunction":
        """Log-log interpolation of (s, A); power continuation outside the table."""
        return cls("table", alpha, table_s=tuple(s), table_A=tuple(A), label="table")

    # evaluation ----------------------------------------------------------------
    def _closed(self, s: np.ndarray) -> np.ndarray:
        if self.kind == "table":
            ls, lA = np.log(self.table_s), np.log(self.table_A)
            x = np.log(s)
            out = np.interp(x, ls, lA)
            hi = x > ls[-1]
            out[hi] = lA[-1] + self.alpha * (x[hi] - ls[-1])
            return np.exp(out)
        return _raw(self.kind, self.alpha, s, self.scale)

    def __call__(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        scalar = s.ndim == 0
        s = np.atleast_1d(s)
        out = np.zeros_like(s)
        pos = s > 0
        if self.s_min > 0:
            A_min = float(self._closed(np.array([self.s_min]))[0])
            low = pos & (s < self.s_min)
            out[low] = A_min * (s[low] / self.s_min) ** self.alpha
            high = s >= self.s_min
        else:
            high = pos
        out[high] = self._closed(s[high])
        return float(out[0]) if scalar else out

    def inverse(self, n) -> np.ndarray:
        """A^{-1}(n) by bisection in log s to relative 1e-12 (vectorised)."""
        n = np.asarray(n, dtype=float)
        scalar = n.ndim == 0
        n = np.atleast_1d(n)
        if np.any(n < 0):
            raise ValueError("A^{-1} needs n >= 0")
        lo = np.full(n.shape, -60.0)
        hi = np.full(n.shape, math.log(_S_MAX))
        while True:
            top = self(np.exp(hi))
            grow = top < n
            if not np.any(grow):
                break
            hi[grow] += 10.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            below = self(np.exp(mid)) < n
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo < 1e-13):
                break
        out = np.exp(0.5 * (lo + hi))
        out[n == 0] = 0.0
        return float(out[0]) if scalar else out

    def a(self, n) -> np.ndarray:
        """Norming sequence a_n = A^{-1}(n), with a_0 = 1."""
        n = np.asarray(n, dtype=float)
        out = np.atleast_1d(self.inverse(np.maximum(n, 0.0)))
        out = np.where(np.atleast_1d(n) == 0, 1.0, out)
        return float(out[0]) if n.ndim == 0 else out

    def log_derivative_ratio(self, s, rel_step: float = 1e-6) -> np.ndarray:
        """s A'(s) / A(s) by central differences; bounded in [0.1 alpha, 10 alpha] for valid families."""
        s = np.asarray(s, dtype=float)
        up, dn = s * (1 + rel_step), s * (1 - rel_step)
        return (np.log(self(up)) - np.log(self(dn))) / (np.log(up) - np.log(dn))

    def check_derivative_band(self, s_grid) -> bool:
        r = self.log_derivative_ratio(np.asarray(s_grid, float))
        return bool(np.all((r >= 0.1 * self.alpha) & (r <= 10 * self.alpha)))

    def to_json(self):
        out = {"kind": self.kind, "alpha": self.alpha, "s_min": self.s_min, "scale": self.scale, "label": self.label}
        if self.kind == "table":
            out["table_s"] = list(self.table_s)
            out["table_A"] = list(self.table_A)
        return out

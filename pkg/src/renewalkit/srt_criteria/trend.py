"""Slope fits with confidence intervals, shared by the criterion and concentration checks."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

__all__ = ["SlopeFit", "ols_slope", "theil_sen_slope"]


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    low: float
    high: float
    intercept: float
    method: str
    r2: float = float("nan")

    @property
    def significantly_negative(self) -> bool:
        return self.high < 0

    @property
    def significantly_positive(self) -> bool:
        return self.low > 0

    def to_json(self):
        return {
            "slope": self.slope,
            "low": self.low,
            "high": self.high,
            "intercept": self.intercept,
            "method": self.method,
            "r2": self.r2,
        }


def ols_slope(x, y, level: float = 0.95) -> SlopeFit:
    """Least-squares slope with a Student-t interval (exact line: zero-width interval)."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if len(x) < 2:
        raise ValueError("need at least two points")
    res = stats.linregress(x, y)
    if len(x) == 2 or not math.isfinite(res.stderr):
        half = 0.0 if len(x) > 2 else float("inf")
    else:
        half = float(stats.t.ppf(0.5 + level / 2, len(x) - 2) * res.stderr)
    return SlopeFit(float(res.slope), float(res.slope - half), float(res.slope + half), float(res.intercept), "ols", float(res.rvalue ** 2))


def theil_sen_slope(x, y, level: float = 0.95) -> SlopeFit:
    """Theil-Sen median slope with its rank-based interval."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if len(x) < 2:
        raise ValueError("need at least two points")
    slope, intercept, low, high = stats.theilslopes(y, x, alpha=level)
    return SlopeFit(float(slope), float(low), float(high), float(intercept), "theil_sen")

"""Norming sequences on integer ranges and the sums A~_beta(s) = sum_{n <= A(s)} n a_n^-beta."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from ..errors import BudgetExceeded, NotApplicable

__all__ = ["kappa", "norming_values", "ATilde", "A_tilde", "MAX_TERMS"]

MAX_TERMS = 1 << 22
_EXACT_INVERSE = 4096


def _exact(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def kappa(d, alpha) -> int:
    """floor(d / alpha), exact for rational inputs (floats are read as their shortest decimal)."""
    d, alpha = _exact(d), _exact(alpha)
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if not d > alpha:
        raise NotApplicable(f"kappa needs d > alpha (d={d}, alpha={alpha})")
    return int(math.floor(d / alpha))


def _norming(obj):
    return obj.norming() if hasattr(obj, "norming") else obj


def norming_values(A, n) -> np.ndarray:
    """a_n = A^{-1}(n) for an increasing integer array n >= 1.

    Power norming is closed form; otherwise exact bisection for short arrays
    and log-log monotone interpolation through 2048 exact nodes for long ones.
    """
    n = np.asarray(n, float)
    if A.kind == "power":
        return (n / A.scale) ** (1.0 / A.alpha)
    if len(n) <= _EXACT_INVERSE:
        return np.asarray(A.a(n), float).reshape(n.shape)
    nodes = np.unique(np.concatenate([np.geomspace(n.min(), n.max(), 2048), [n.min(), n.max()]]))
    vals = np.asarray(A.a(nodes), float)
    f = PchipInterpolator(np.log(nodes), np.log(vals))
    return np.exp(f(np.log(n)))


@dataclass(frozen=True)
class ATilde:
    s: float
    beta: float
    value: float
    n_terms: int
    regime: str  # "growing" (alpha > beta/2), "bounded" (alpha < beta/2), "boundary"
    prediction: Optional[float]  # A(s)^2 s^-beta in the growing regime

    @property
    def ratio(self) -> Optional[float]:
        if self.prediction is None or self.prediction == 0:
            return None
        return self.value / self.prediction

    def to_json(self):
        return {
            "s": self.s,
            "beta": self.beta,
            "value": self.value,
            "n_terms": self.n_terms,
            "regime": self.regime,
            "prediction": self.prediction,
            "ratio": self.ratio,
        }


def A_tilde(model_or_norming, beta: float, s: float) -> ATilde:
    """sum_{1 <= n <= A(s)} n a_n^-beta by exact summation, with the regime prediction."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    A = _norming(model_or_norming)
    N = int(math.floor(float(A(s)) + 1e-9)) if s > 0 else 0
    if N > MAX_TERMS:
        raise BudgetExceeded(f"A(s) = {N} terms exceeds {MAX_TERMS}")
    if N >= 1:
        n = np.arange(1, N + 1, dtype=float)
        value = float(np.sum(n * norming_values(A, n) ** -beta))
    else:
        value = 0.0
    alpha = A.alpha
    if alpha > beta / 2:
        regime, pred = "growing", float(A(s)) ** 2 * s ** -beta
    elif alpha < beta / 2:
        regime, pred = "bounded", None
    else:
        regime, pred = "boundary", None
    return ATilde(float(s), float(beta), value, N, regime, pred)

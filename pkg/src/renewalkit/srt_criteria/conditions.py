"""Trend checks of the sufficient conditions for the strong renewal theorem.

Asymptotic statements (o(.), boundedness) cannot be proved numerically; each
check evaluates the relevant ratio on an s ladder and reports a Theil-Sen
slope of its logarithm against log s.  Statuses read "consistent with".
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from .kintegral import _directions, _radial_nodes
from .trend import SlopeFit, theil_sen_slope

__all__ = ["Status", "ConditionCheck", "ConditionsReport", "LevyMeasure", "check_sufficient_conditions", "omega_shell"]


class Status(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"
    NOT_APPLICABLE = "not_applicable"


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    status: Status
    s_values: Tuple[float, ...] = ()
    ratios: Tuple[float, ...] = ()
    trend: Optional[SlopeFit] = None
    note: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def applicable(self) -> bool:
        return self.status is not Status.NOT_APPLICABLE

    def to_json(self):
        return {
            "name": self.name,
            "status": self.status.value,
            "applicable": self.applicable,
            "s_values": list(self.s_values),
            "ratios": list(self.ratios),
            "trend": None if self.trend is None else self.trend.to_json(),
            "note": self.note,
            **({"extra": self.extra} if self.extra else {}),
        }


@dataclass(frozen=True)
class ConditionsReport:
    model: dict
    checks: Tuple[ConditionCheck, ...]

    @property
    def any_holds(self) -> bool:
        return any(c.status is Status.HOLDS for c in self.checks)

    def get(self, name: str) -> ConditionCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self):
        return {"model": self.model, "checks": [c.to_json() for c in self.checks], "any_holds": self.any_holds}


@dataclass(frozen=True)
class LevyMeasure:
    """A Levy measure through its cell masses nu(x + h I_d) and tails nu(|x| > s)."""

    d: int
    alpha: float
    cell: Callable[[np.ndarray, float], np.ndarray]
    tail: Callable[[float], float]
    label: str = "levy"

    @classmethod
    def isotropic_power(cls, d: int, alpha: float, c: float = 1.0) -> "LevyMeasure":
        """Density c |x|^(-d-alpha); tail c |S^{d-1}| s^-alpha / alpha."""
        area = 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)
        x, w = np.polynomial.legendre.leggauss(4)

        def cell(lo, h):
            lo = np.atleast_2d(np.asarray(lo, float))
            xs = 0.5 * h * (x + 1.0)
            ws = 0.5 * h * w
            nodes = np.stack(np.meshgrid(*([xs] * d), indexing="ij"), axis=-1).reshape(-1, d)
            wts = np.prod(np.stack(np.meshgrid(*([ws] * d), indexing="ij"), axis=-1).reshape(-1, d), axis=1)
            r = np.linalg.norm(lo[:, None, :] + nodes[None], axis=-1)
            return (c * r ** (-d - alpha)) @ wts

        return cls(d, alpha, cell, lambda s: c * area * s ** -alpha / alpha, f"isotropic_power(d={d}, alpha={alpha})")


def _trend_status(ratios: np.ndarray, s: np.ndarray, want: str):
    """want = "to_zero" (significant decrease) or "bounded" (no significant increase)."""
    if np.all(ratios == 0):
        return Status.HOLDS, None
    pos = ratios > 0
    if pos.sum() < 3:
        return Status.INCONCLUSIVE, None
    fit = theil_sen_slope(np.log(s[pos]), np.log(ratios[pos]))
    if want == "to_zero":
        if fit.high < 0:
            return Status.HOLDS, fit
        if fit.low > 0:
            return Status.FAILS, fit
        return Status.INCONCLUSIVE, fit
    if fit.high <= 0:
        return Status.HOLDS, fit
    if fit.low > 0:
        return Status.FAILS, fit
    return Status.INCONCLUSIVE, fit


def omega_shell(cell_mass, A, d: int, s: float, eta: float, h: float, T: Optional[float], n_outer: int = 8, n_inner: int = 32):
    """(sup of omega over the shell, sup over directions of int_{|z|<eta s} [omega(s w - z) - T]_+ dz).

    omega(x) = |x|^d mass(x + h I_d) A(|x|), integrated by polar quadrature in z.
    The sup over directions uses ``n_outer`` spread directions and the
    coordinate axes, so it is a lower bound of the true sup.
    """
    # coordinate axes are always included: product laws peak along them
    axes = np.concatenate([np.eye(d), -np.eye(d)])
    outer = np.concatenate([_directions(d, n_outer)[0], axes])
    r, wr = _radial_nodes(eta * s, eta * s / 32.0, order=8)
    u, wu = _directions(d, n_inner)
    z = (r[:, None, None] * u[None, :, :]).reshape(-1, d)
    jac = (wr[:, None] * r[:, None] ** (d - 1) * wu[None, :]).reshape(-1)
    best_w, best_i = 0.0, 0.0
    for w in outer:
        x = s * w[None, :] - z
        rx = np.linalg.norm(x, axis=1)
        om = rx ** d * np.asarray(cell_mass(x, h), float) * np.asarray(A(rx), float)
        best_w = max(best_w, float(om.max()))
        if T is not None:
            best_i = max(best_i, float(jac @ np.maximum(om - T, 0.0)))
    return best_w, best_i


def _bounded_ratio(name, cell_mass, A, d, s_values, eta, h, T):
    s = np.asarray(s_values, float)
    sups = np.array([omega_shell(cell_mass, A, d, si, eta, h, None)[0] for si in s])
    T_used = float(sups[0]) if T is None else float(T)
    ints = np.array([omega_shell(cell_mass, A, d, si, eta, h, T_used)[1] for si in s])
    ratios = ints / np.array([float(A(si)) ** 2 for si in s])
    status, fit = _trend_status(ratios, s, "to_zero")
    sup_fit = theil_sen_slope(np.log(s), np.log(sups)) if len(s) >= 3 and np.all(sups > 0) else None
    note = f"T = {T_used:.6g}" + (" (sup of omega on the first shell)" if T is None else "")
    return ConditionCheck(
        name, status, tuple(s), tuple(float(v) for v in ratios), fit, note,
        {"omega_shell_sup": sups.tolist(), "omega_sup_trend": None if sup_fit is None else sup_fit.to_json(), "T": T_used},
    )


def _normal_d4_ratio(model, A, s):
    head = integrate.quad(lambda v: math.exp(-4.0 * v) * float(A(math.exp(v))) ** 2, 0.0, math.log(s), limit=400)[0]
    return float(model.tail(s)) * head / (float(A(s)) / s ** 4)


def check_sufficient_conditions(
    model,
    s_values: Optional[Sequence[float]] = None,
    h: float = 1.0,
    eta: float = 0.1,
    T: Optional[float] = None,
    levy: Optional[LevyMeasure] = None,
) -> ConditionsReport:
    """Evaluate every sufficient condition that applies to ``model``.

    Conditions: ``bounded_ratio`` (alpha < d/2, omega-excess integral o(A(s)^2)),
    ``alpha_above_half_d`` (d/2 < alpha < 2, holds outright), ``normal_d3``,
    ``normal_d4`` (q_X(s) int_1^s u^-5 A(u)^2 du = o(A(s)/s^4)),
    ``normal_d5plus`` (q_X(s) = o(s^(2-d))) and, when ``levy`` is given,
    ``levy_bounded_ratio`` with omega and A built from the Levy measure.
    """
    d, alpha = model.d, float(model.alpha)
    A = model.norming()
    s = np.asarray(s_values if s_values is not None else np.geomspace(1e2, 1e4, 5), float)
    checks: List[ConditionCheck] = []

    if alpha < d / 2.0 and hasattr(model, "cell_probability"):
        checks.append(_bounded_ratio("bounded_ratio", model.cell_probability, A, d, s, eta, h, T))
    else:
        checks.append(ConditionCheck("bounded_ratio", Status.NOT_APPLICABLE, note="needs alpha < d/2"))

    if d / 2.0 < alpha < 2.0:
        checks.append(ConditionCheck("alpha_above_half_d", Status.HOLDS, note="no numeric condition: d/2 < alpha < 2"))
    else:
        checks.append(ConditionCheck("alpha_above_half_d", Status.NOT_APPLICABLE, note="needs d/2 < alpha < 2"))

    if alpha == 2.0 and d == 3:
        checks.append(ConditionCheck("normal_d3", Status.HOLDS, note="alpha = 2, d = 3: no numeric condition"))
    else:
        checks.append(ConditionCheck("normal_d3", Status.NOT_APPLICABLE, note="needs alpha = 2 and d = 3"))

    if alpha == 2.0 and d == 4:
        ratios = np.array([_normal_d4_ratio(model, A, si) for si in s])
        st, fit = _trend_status(ratios, s, "to_zero")
        checks.append(ConditionCheck("normal_d4", st, tuple(s), tuple(ratios.tolist()), fit))
    else:
        checks.append(ConditionCheck("normal_d4", Status.NOT_APPLICABLE, note="needs alpha = 2 and d = 4"))

    if alpha == 2.0 and d >= 5:
        ratios = np.array([float(model.tail(si)) * si ** (d - 2) for si in s])
        st, fit = _trend_status(ratios, s, "to_zero")
        checks.append(ConditionCheck("normal_d5plus", st, tuple(s), tuple(ratios.tolist()), fit))
    else:
        checks.append(ConditionCheck("normal_d5plus", Status.NOT_APPLICABLE, note="needs alpha = 2 and d >= 5"))

    if levy is not None:
        if not 0 < levy.alpha < 2:
            checks.append(ConditionCheck("levy_bounded_ratio", Status.NOT_APPLICABLE, note="needs 0 < alpha < 2"))
        else:
            A_nu = lambda x: 1.0 / np.vectorize(levy.tail, otypes=[float])(np.asarray(x, float))
            checks.append(_bounded_ratio("levy_bounded_ratio", levy.cell, A_nu, levy.d, s, eta, h, T))
    return ConditionsReport(model.describe(), tuple(checks))

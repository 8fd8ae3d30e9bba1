"""The small-n criterion sum sum_{n <= A(delta s)} n a_n^-d sup_{|t| > theta s} K(t, a_n/chi, eta, h)."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.interpolate import PchipInterpolator

from ..errors import BudgetExceeded, NotApplicable
from ..stable_law import fibonacci_sphere
from .kintegral import K_METHODS, K_integral, default_method
from .sums import MAX_TERMS, kappa, norming_values
from .trend import SlopeFit, ols_slope, theil_sen_slope

__all__ = ["Verdict", "CriterionConfig", "CriterionReport", "criterion_sum", "sup_grid"]


class Verdict(str, Enum):
    CONSISTENT = "ConsistentWithSRT"
    INCONCLUSIVE = "Inconclusive"
    VIOLATION = "ViolationSuspected"


@dataclass(frozen=True)
class CriterionConfig:
    """Parameters of the criterion sum.

    The sup over |t| > theta s is taken over ``n_directions`` directions times
    the radii theta s 2^j, j < ``n_radii``, plus any points the model
    proposes through ``sup_candidates``; this under-approximates the sup.
    ``chi_sweep`` lists extra chi values whose exponents are reported.
    """

    theta: float = 0.25
    eta: float = 0.02
    chi: float = 1.0
    h: float = 1.0
    deltas: Tuple[float, ...] = (0.05, 0.1, 0.2, 0.4)
    s_values: Tuple[float, ...] = (1e3, 1e4)
    method: str = "auto"
    n_directions: int = 16
    n_radii: int = 7
    chi_sweep: Tuple[float, ...] = ()
    a_grid: int = 48

    def __post_init__(self):
        object.__setattr__(self, "deltas", tuple(sorted(float(x) for x in self.deltas)))
        object.__setattr__(self, "s_values", tuple(sorted(float(x) for x in self.s_values)))
        object.__setattr__(self, "chi_sweep", tuple(float(x) for x in self.chi_sweep))
        for name in ("theta", "eta", "chi", "h"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.deltas or not self.s_values:
            raise ValueError("delta and s ladders must be nonempty")
        if min(self.deltas) <= 0 or min(self.s_values) <= 0 or min(self.chi_sweep, default=1.0) <= 0:
            raise ValueError("ladders must be positive")
        if self.method not in K_METHODS:
            raise ValueError(f"method must be one of {K_METHODS}")
        if self.n_directions < 1 or self.n_radii < 1 or self.a_grid < 4:
            raise ValueError("grid sizes are too small")

    def check_for(self, d: int, alpha: float) -> int:
        """theta kappa < 1, returning kappa."""
        k = kappa(d, alpha)
        if not self.theta * k < 1:
            raise ValueError(f"need theta < 1/kappa = {1.0 / k:g}")
        return k

    def to_json(self):
        return asdict(self)


def sup_grid(model, r_min: float, n_directions: int, n_radii: int, h: float) -> np.ndarray:
    """Candidate points for sup_{|t| > r_min}: directions x geometric radii plus model hints."""
    u = fibonacci_sphere(n_directions, model.d)
    radii = r_min * 2.0 ** np.arange(n_radii) * (1 + 1e-9)
    pts = (radii[:, None, None] * u[None, :, :]).reshape(-1, model.d)
    if hasattr(model, "sup_candidates"):
        extra = np.asarray(model.sup_candidates(r_min, float(radii[-1]), h), float).reshape(-1, model.d)
        pts = np.concatenate([pts, extra])
    return pts


def _dedupe_for_product(pts: np.ndarray, eta: float, d: int) -> np.ndarray:
    # the product bound depends on t only through max_i |t_i|
    t1 = np.max(np.abs(pts), axis=1)
    _, idx = np.unique(np.round(t1, 9), return_index=True)
    return pts[np.sort(idx)]


@dataclass(frozen=True)
class CriterionReport:
    model: dict
    config: dict
    method: str
    kappa: int
    deltas: Tuple[float, ...]
    s_values: Tuple[float, ...]
    values: np.ndarray  # (n_delta, n_s)
    normalized: np.ndarray  # values s^d / A(s)
    n_terms: np.ndarray  # floor(A(delta s))
    exponents: Tuple[SlopeFit, ...]  # delta exponent per s
    s_trends: Tuple[Optional[SlopeFit], ...]  # per delta, log normalized vs log s
    chi_exponents: Dict[float, float] = field(default_factory=dict)
    verdict: Verdict = Verdict.INCONCLUSIVE

    @property
    def exponent(self) -> SlopeFit:
        """delta exponent at the largest s."""
        return self.exponents[-1]

    def to_json(self):
        return {
            "model": self.model,
            "config": self.config,
            "method": self.method,
            "kappa": self.kappa,
            "deltas": list(self.deltas),
            "s_values": list(self.s_values),
            "values": self.values.tolist(),
            "normalized": self.normalized.tolist(),
            "n_terms": self.n_terms.tolist(),
            "exponents": [e.to_json() for e in self.exponents],
            "exponent": self.exponent.to_json(),
            "s_trends": [None if e is None else e.to_json() for e in self.s_trends],
            "chi_exponents": {repr(k): v for k, v in self.chi_exponents.items()},
            "verdict": self.verdict.value,
        }

    def csv_rows(self) -> List[dict]:
        rows = []
        for i, dl in enumerate(self.deltas):
            for j, s in enumerate(self.s_values):
                rows.append(
                    {
                        "family": self.model.get("family", ""),
                        "d": self.model.get("d", ""),
                        "alpha": self.model.get("alpha", ""),
                        "method": self.method,
                        "theta": self.config["theta"],
                        "eta": self.config["eta"],
                        "chi": self.config["chi"],
                        "h": self.config["h"],
                        "delta": dl,
                        "s": s,
                        "n_terms": int(self.n_terms[i, j]),
                        "value": float(self.values[i, j]),
                        "normalized": float(self.normalized[i, j]),
                    }
                )
        return rows


def _k_sup_on_grid(model, pts, a_grid, cfg, method):
    best = np.zeros(len(a_grid))
    for t in pts:
        best = np.maximum(best, K_integral(model, t, a_grid, cfg.eta, cfg.h, method=method))
    return best


def _sum_for_s(model, A, s, cfg, method, chis):
    """Criterion sums for every delta (rows) and chi (columns) at one s."""
    d = model.d
    Ns = [int(math.floor(float(A(dl * s)) + 1e-9)) for dl in cfg.deltas]
    N = max(Ns)
    out = np.zeros((len(cfg.deltas), len(chis)))
    if N < 1:
        return out, np.array(Ns)
    if N > MAX_TERMS:
        raise BudgetExceeded(f"A(delta s) = {N} terms exceeds {MAX_TERMS}")
    n = np.arange(1, N + 1, dtype=float)
    a_n = norming_values(A, n)
    pts = sup_grid(model, cfg.theta * s, cfg.n_directions, cfg.n_radii, cfg.h)
    if method == "product":
        pts = _dedupe_for_product(pts, cfg.eta, d)
    lo = float(a_n[0]) / max(chis)
    hi = float(a_n[-1]) / min(chis)
    a_grid = np.geomspace(lo, hi * (1 + 1e-12), cfg.a_grid) if hi > lo else np.array([lo])
    K = _k_sup_on_grid(model, pts, a_grid, cfg, method)
    if len(a_grid) > 1 and np.all(K > 0):
        f = PchipInterpolator(np.log(a_grid), np.log(K))
        interp = lambda x: np.exp(f(np.log(np.clip(x, lo, hi))))
    elif len(a_grid) > 1:
        f = PchipInterpolator(np.log(a_grid), K)
        interp = lambda x: np.maximum(f(np.log(np.clip(x, lo, hi))), 0.0)
    else:
        interp = lambda x: np.full(np.shape(x), K[0])
    weight = n * a_n ** -d
    for c, chi in enumerate(chis):
        csum = np.cumsum(weight * interp(a_n / chi))
        for i, Nd in enumerate(Ns):
            out[i, c] = csum[Nd - 1] if Nd >= 1 else 0.0
    return out, np.array(Ns)


def _fit_exponent(deltas, col) -> SlopeFit:
    ok = col > 0
    if ok.sum() < 2:
        return SlopeFit(float("nan"), float("nan"), float("nan"), float("nan"), "ols")
    return ols_slope(np.log(np.asarray(deltas)[ok]), np.log(col[ok]))


def criterion_sum(model, config: CriterionConfig) -> CriterionReport:
    """Evaluate the criterion sum on the (delta, s) ladder and fit its delta exponent.

    The exponent is the least-squares slope of log(value s^d / A(s)) against
    log delta with a 95% interval.  The verdict is ConsistentWithSRT when the
    exponent at the largest s is significantly positive and no delta row grows
    significantly in s; ViolationSuspected when the exponent is significantly
    negative or some row grows; Inconclusive otherwise.
    """
    d, alpha = model.d, model.alpha
    if not d > alpha:
        raise NotApplicable("the criterion needs d > alpha")
    k = config.check_for(d, alpha)
    method = default_method(model) if config.method == "auto" else config.method
    A = model.norming()
    chis = [config.chi] + [c for c in config.chi_sweep if c != config.chi]
    nd, ns = len(config.deltas), len(config.s_values)
    vals = np.zeros((nd, ns, len(chis)))
    nterms = np.zeros((nd, ns), dtype=np.int64)
    for j, s in enumerate(config.s_values):
        vals[:, j, :], nterms[:, j] = _sum_for_s(model, A, s, config, method, chis)
    scale = np.array([s ** d / float(A(s)) for s in config.s_values])
    norm = vals * scale[None, :, None]
    exps = tuple(_fit_exponent(config.deltas, norm[:, j, 0]) for j in range(ns))
    trends = []
    for i in range(nd):
        row = norm[i, :, 0]
        if ns >= 3 and np.all(row > 0):
            trends.append(theil_sen_slope(np.log(config.s_values), np.log(row)))
        elif ns == 2 and np.all(row > 0):
            trends.append(ols_slope(np.log(config.s_values), np.log(row)))
        else:
            trends.append(None)
    chi_exp = {c: float(_fit_exponent(config.deltas, norm[:, -1, m]).slope) for m, c in enumerate(chis)}
    e = exps[-1]
    growing = any(tr is not None and tr.low > 0 for tr in trends)
    if e.low > 0 and not growing:
        verdict = Verdict.CONSISTENT
    elif e.high < 0 or growing:
        verdict = Verdict.VIOLATION
    else:
        verdict = Verdict.INCONCLUSIVE
    return CriterionReport(
        model=model.describe(),
        config=config.to_json(),
        method=method,
        kappa=k,
        deltas=config.deltas,
        s_values=config.s_values,
        values=vals[:, :, 0],
        normalized=norm[:, :, 0],
        n_terms=nterms,
        exponents=exps,
        s_trends=tuple(trends),
        chi_exponents=chi_exp,
        verdict=verdict,
    )

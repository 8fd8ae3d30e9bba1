"""Renewal sums r_{delta,h}(s omega), the small-n part, and their error terms."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from .. import kernels
from ..errors import BudgetExceeded, NotApplicable
from ..stable_law import fibonacci_sphere, rho
from ..step_models.base import substream
from .cell import TargetCell
from .convolution import convolve_exact
from .spectral import window_sum

__all__ = [
    "RenewalEstimate",
    "MonteCarloWindow",
    "n_window",
    "default_torus",
    "target_points",
    "renewal_sum",
    "small_n_sum",
    "big_n_prediction",
    "llt_tail_estimate",
    "mc_window",
]

_MAX_TORUS_CELLS = 1 << 29


@dataclass(frozen=True)
class RenewalEstimate:
    """(s^d / A(s)) sum_{n0 <= n < n1} P(S_n in s omega + cell), with error terms.

    ``value`` = ``exact_part`` + ``tail_estimate``; ``error`` is the wrap-around
    estimate plus the remainder bound (exact methods) or the standard error
    (Monte Carlo).
    """

    s: float
    omega: Tuple[float, ...]
    h: float
    delta: float
    M: Optional[float]
    value: float
    error: float
    method: str
    n_range: Tuple[int, int]
    exact_part: float
    tail_estimate: float = 0.0
    remainder_bound: float = 0.0
    alias_estimate: float = 0.0
    stderr: Optional[float] = None
    meta: dict = field(default_factory=dict, compare=False)

    def to_json(self):
        return {
            "s": self.s,
            "omega": list(self.omega),
            "h": self.h,
            "delta": self.delta,
            "M": self.M,
            "value": self.value,
            "error": self.error,
            "method": self.method,
            "n_range": list(self.n_range),
            "exact_part": self.exact_part,
            "tail_estimate": self.tail_estimate,
            "remainder_bound": self.remainder_bound,
            "alias_estimate": self.alias_estimate,
            "stderr": self.stderr,
            **({"meta": self.meta} if self.meta else {}),
        }


# ranges and targets -----------------------------------------------------------------------
def n_window(A, lo: float, hi: float = math.inf) -> Tuple[int, int]:
    """Integer n with A(lo) <= n < A(hi), as the half-open pair (n0, n1)."""
    n0 = int(math.ceil(A(lo))) if lo > 0 else 0
    n1 = int(math.ceil(A(hi))) if math.isfinite(hi) else -1
    return n0, n1


def default_torus(model, n1: int, span: float) -> int:
    """Power of two covering 8 a_{n1} and 4 span, at least 64."""
    A = model.norming()
    a = A.a(max(n1, 1))
    need = max(64.0, 8.0 * a, 4.0 * span)
    N = 1 << int(math.ceil(math.log2(need)))
    return N


def _unit(omega) -> np.ndarray:
    w = np.asarray(omega, float)
    return w / np.linalg.norm(w)


def target_points(cell: TargetCell, x) -> np.ndarray:
    """Integer model-frame points whose images lie in x + cell (lattice models).

    For nu = d this is the single point of ``cell.target_point``; a cube cell
    (nu = 0) on an integer model lists the integer points of x + [0, h)^d.
    """
    x = np.asarray(x, float)
    if cell.nu == cell.d:
        return cell.target_point(x)[None, :]
    if cell.nu == 0:
        first = np.ceil(x).astype(np.int64)
        last = np.ceil(x + cell.h).astype(np.int64) - 1
        axes = [np.arange(a, b + 1) for a, b in zip(first, last)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, cell.d)
    raise NotApplicable("mixed lattice/continuous cells are not evaluated")


def _check_pre(model, delta, M):
    if not model.d > model.alpha:
        raise NotApplicable(f"renewal sums need d > alpha (d={model.d}, alpha={model.alpha})")
    if not delta > 0:
        raise ValueError("delta must be positive")
    if M is not None and not M > max(delta, 1.0):
        raise ValueError("M must exceed max(delta, 1)")


# limit side ------------------------------------------------------------------------------
def big_n_prediction(model, cell: TargetCell, omega, delta: float, upper: Optional[float] = None) -> float:
    """h^(d-nu) rho_delta(omega), optionally restricted to u > 1/upper.

    The integral is taken for the model-frame limit law: in that frame the
    residue-class restriction (one n in q) and the q-fold LLT density cancel,
    so the effective q is 1.
    """
    law = model.limit_law()
    w = _unit(omega)
    full = rho(law, 1, w, delta)
    if full.infinite:
        return math.inf
    val = full.value
    if upper is not None:
        val -= rho(law, 1, w, upper).value
    return cell.lattice_weight * val


def llt_tail_estimate(model, cell: TargetCell, points, n1: int) -> float:
    """sum_{n >= n1} h^(d-nu) a_n^-d psi(z / a_n) summed over ``points``, as an integral in log n."""
    law = model.limit_law()
    A = model.norming()
    d = model.d
    pts = np.atleast_2d(np.asarray(points, float))

    def f(v):
        n = math.exp(v)
        a = float(A.a(n))
        return n * a ** -d * float(np.sum(law.psi(pts / a)))

    lo = math.log(max(n1 - 0.5, 0.5))
    val = integrate.quad(f, lo, lo + 60.0, limit=400, epsrel=1e-9)[0]
    return cell.lattice_weight * val


def _remainder_bound(model, cell: TargetCell, M: float) -> float:
    """alpha psi_max M^(alpha-d) / (d - alpha) times h^(d-nu)."""
    law = model.limit_law()
    psi_max = float(law.psi(np.zeros((1, model.d)))[0])
    a, d = model.alpha, model.d
    return cell.lattice_weight * a * psi_max * M ** (a - d) / (d - a)


# Monte Carlo ---------------------------------------------------------------------------------
@dataclass(frozen=True)
class MonteCarloWindow:
    counts: np.ndarray  # (n_boxes, n1 - n0) summed over paths
    batch_totals: np.ndarray  # (n_batches, n_boxes) hits per batch
    n_paths: int
    n0: int
    n1: int

    @property
    def mean(self) -> np.ndarray:
        """Estimated sum_n P(S_n in box) per box."""
        return self.counts.sum(axis=1) / self.n_paths

    @property
    def stderr(self) -> np.ndarray:
        """Batch-means standard error (batches have equal size)."""
        b = self.batch_totals.shape[0]
        per = self.batch_totals / (self.n_paths / b)
        return per.std(axis=0, ddof=1) / math.sqrt(b) if b > 1 else np.full(per.shape[1], np.nan)


def mc_window(model, lo, hi, n0: int, n1: int, n_paths: int, seed: int, workers: int = 1, n_batches: int = 32):
    """Hit counts of S_n, n0 <= n < n1, in half-open boxes [lo, hi).

    Paths are generated in ``n_batches`` fixed batches, batch b from
    substream(seed, b); results are reduced in batch order, so the output is
    identical for every ``workers`` value.
    """
    if seed is None:
        raise ValueError("Monte Carlo needs a seed")
    lo = np.atleast_2d(np.asarray(lo, float))
    hi = np.atleast_2d(np.asarray(hi, float))
    per = int(math.ceil(n_paths / n_batches))
    n_paths = per * n_batches
    steps = max(n1 - 1, 0)
    d = model.d

    def batch(b):
        rng = substream(seed, b)
        paths = np.zeros((per, steps + 1, d))
        if steps:
            x = np.asarray(model.sample(per * steps, rng), float).reshape(per, steps, d)
            np.cumsum(x, axis=1, out=paths[:, 1:])
        return kernels.count_hits(paths, lo, hi, n0, n1)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(batch, range(n_batches)))
    else:
        parts = [batch(b) for b in range(n_batches)]
    counts = np.zeros_like(parts[0])
    for c in parts:
        counts += c
    totals = np.stack([c.sum(axis=1) for c in parts])
    return MonteCarloWindow(counts, totals, n_paths, n0, n1)


def _point_boxes(points: np.ndarray):
    pts = np.asarray(points, float)
    return pts - 0.5, pts + 0.5


# main entry points ---------------------------------------------------------------------------
def _window_values(model, cell, targets, n0, n1, method, N, n_paths, seed, workers, span):
    """Per-target window sums with (alias, stderr, meta)."""
    if method == "spectral":
        if n1 <= n0:
            return np.zeros(len(targets)), np.zeros(len(targets)), None, {}
        pts = np.concatenate(targets)
        if N is None:
            N = default_torus(model, n1, span)
        if N ** model.d > _MAX_TORUS_CELLS:
            raise BudgetExceeded(f"torus {N}^{model.d} exceeds the cell budget")
        res = window_sum(model, pts, n0, n1, N)
        vals, alias = [], []
        i = 0
        for t in targets:
            vals.append(res.values[i : i + len(t)].sum())
            alias.append(res.alias_estimate[i : i + len(t)].sum())
            i += len(t)
        return np.array(vals), np.array(alias), None, {"torus": N}
    if method == "direct":
        if n1 <= n0:
            return np.zeros(len(targets)), np.zeros(len(targets)), None, {}
        R = int(math.ceil(span + 2))
        tabs = convolve_exact(model, n1 - 1, R, keep=range(max(n0, 1), n1)) if n1 > 1 else []
        vals = np.array([sum(float(tb.at(t).sum()) for tb in tabs) for t in targets])
        zero_hit = np.array([float(n0 == 0 and np.any(np.all(t == 0, axis=1))) for t in targets])
        lost = np.full(len(targets), float(sum(tb.lost_mass for tb in tabs)))
        return vals + zero_hit, lost, None, {"box_radius": R, "lost_mass_sum": float(lost[0])}
    if method == "mc":
        boxes_lo, boxes_hi, owner = [], [], []
        for j, t in enumerate(targets):
            lo, hi = _point_boxes(t) if cell.nu == cell.d else (t, t + cell.h)
            boxes_lo.append(lo)
            boxes_hi.append(hi)
            owner += [j] * len(lo)
        mc = mc_window(model, np.concatenate(boxes_lo), np.concatenate(boxes_hi), n0, n1, n_paths, seed, workers)
        owner = np.array(owner)
        per_box = mc.counts.sum(axis=1) / mc.n_paths
        per_batch = mc.batch_totals / (mc.n_paths / mc.batch_totals.shape[0])
        vals = np.array([per_box[owner == j].sum() for j in range(len(targets))])
        batch_vals = np.stack([per_batch[:, owner == j].sum(axis=1) for j in range(len(targets))], axis=1)
        se = batch_vals.std(axis=0, ddof=1) / math.sqrt(batch_vals.shape[0])
        return vals, np.zeros(len(targets)), se, {"n_paths": mc.n_paths, "seed": seed}
    raise ValueError(f"unknown method {method!r}")


def _targets_for(model, cell, s, omegas):
    out = []
    for w in omegas:
        x = s * _unit(w)
        if cell.nu == 0 and getattr(model, "lattice", None) is None:
            out.append(x[None, :])
        else:
            out.append(target_points(cell, x))
    return out


def renewal_sum(
    model,
    cell: TargetCell,
    s: float,
    omega,
    delta: float,
    M: float = 8.0,
    method: str = "spectral",
    tail: str = "llt",
    N: Optional[int] = None,
    n_paths: int = 20000,
    seed: Optional[int] = None,
    workers: int = 1,
) -> RenewalEstimate:
    """r_{delta,h}(s omega) over n in [A(delta s), A(M s)) plus the n >= A(M s) part.

    ``method`` is "spectral" (exact convolution on a torus), "direct" (box
    convolution) or "mc".  ``tail="llt"`` adds the local-limit estimate of the
    neglected n >= A(M s) terms; the bound alpha psi_max M^(alpha-d)/(d-alpha)
    is always reported in ``remainder_bound``.
    """
    _check_pre(model, delta, M)
    return _sum_for_directions(model, cell, s, [omega], delta, M, method, tail, N, n_paths, seed, workers)[0]


def _sum_for_directions(model, cell, s, omegas, delta, M, method, tail, N, n_paths, seed, workers):
    if M is None:
        raise ValueError("M is required")
    A = model.norming()
    n0, n1 = n_window(A, delta * s, M * s)
    scale = s ** model.d / float(A(s))
    targets = _targets_for(model, cell, s, omegas)
    if cell.nu == 0 and getattr(model, "lattice", None) is None and method != "mc":
        raise NotApplicable("nonlattice models are estimated by Monte Carlo only")
    vals, alias, se, meta = _window_values(model, cell, targets, n0, n1, method, N, n_paths, seed, workers, span=M * s)
    rb = _remainder_bound(model, cell, M)
    out = []
    for j, w in enumerate(omegas):
        te = 0.0
        if tail == "llt":
            te = scale * llt_tail_estimate(model, cell, targets[j], n1)
        exact = scale * vals[j]
        err = scale * alias[j] + rb if se is None else scale * se[j]
        out.append(
            RenewalEstimate(
                float(s), tuple(float(c) for c in _unit(w)), cell.h, float(delta), float(M), exact + te, float(err),
                method, (n0, n1), float(exact), float(te), float(rb), float(scale * alias[j]),
                None if se is None else float(scale * se[j]), meta,
            )
        )
    return out


def renewal_sums(model, cell, s, omegas, delta, M=8.0, method="spectral", tail="llt", N=None, n_paths=20000, seed=None, workers=1):
    """renewal_sum for several directions sharing one torus computation."""
    _check_pre(model, delta, M)
    return _sum_for_directions(model, cell, s, omegas, delta, M, method, tail, N, n_paths, seed, workers)


def small_n_sum(
    model,
    cell: TargetCell,
    s: float,
    delta: float,
    method: str = "spectral",
    directions=None,
    N: Optional[int] = None,
    n_paths: int = 20000,
    seed: Optional[int] = None,
    workers: int = 1,
) -> RenewalEstimate:
    """sup over a direction sample of (s^d/A(s)) sum_{1 <= n < A(delta s)} P(S_n in s omega + cell).

    The n = 0 term (a point mass at the origin) is left out, so the range is
    empty and the value 0 whenever A(delta s) <= 1.

    The default sample is 64 Fibonacci-sphere directions; the sup over this
    finite set is a lower bound of the sup over the sphere.
    """
    _check_pre(model, delta, None)
    A = model.norming()
    n0, n1 = 1, int(math.ceil(A(delta * s)))
    if directions is None:
        directions = fibonacci_sphere(64, model.d)
    dirs = [_unit(w) for w in np.atleast_2d(directions)]
    scale = s ** model.d / float(A(s))
    if n1 <= n0:
        w = dirs[0]
        return RenewalEstimate(float(s), tuple(w), cell.h, float(delta), None, 0.0, 0.0, method, (0, 0), 0.0)
    targets = _targets_for(model, cell, s, dirs)
    if cell.nu == 0 and getattr(model, "lattice", None) is None and method != "mc":
        raise NotApplicable("nonlattice models are estimated by Monte Carlo only")
    if method == "spectral" and N is None:
        N = default_torus(model, n1, s)
    vals, alias, se, meta = _window_values(model, cell, targets, n0, n1, method, N, n_paths, seed, workers, span=s)
    j = int(np.argmax(vals))
    err = scale * (alias[j] if se is None else se[j])
    return RenewalEstimate(
        float(s), tuple(float(c) for c in dirs[j]), cell.h, float(delta), None, float(scale * vals[j]), float(err),
        method, (n0, n1), float(scale * vals[j]), 0.0, 0.0, float(scale * alias[j]),
        None if se is None else float(scale * se[j]), dict(meta, n_directions=len(dirs)),
    )

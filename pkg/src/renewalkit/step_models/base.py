"""Step distributions: common interface, seeded substreams, paths and diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import MonteCarloBudget, UnknownTail
from .norming import NormingFunction

__all__ = [
    "StepDistribution",
    "LatticeInfo",
    "substream",
    "sample_path",
    "SamplePath",
    "norming_from_tail",
    "NormingCheck",
    "truncated_moment_diagnostics",
    "MomentDiagnostics",
]


def substream(seed: int, *ids: int) -> np.random.Generator:
    """Independent generator for (seed, ids); the derivation is SeedSequence spawn keys."""
    if seed is None:
        raise ValueError("a seed is mandatory")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=tuple(int(i) for i in ids))))


@dataclass(frozen=True)
class LatticeInfo:
    """Declared lattice structure: support in offset + Z^d with decomposition data (nu, q)."""

    nu: int
    q: int = 1
    offset: tuple = ()

    def to_json(self):
        return {"nu": self.nu, "q": self.q, "offset": list(self.offset)}


class StepDistribution:
    """Base class.  Subclasses set ``d``, ``alpha`` and implement the methods they support."""

    d: int
    alpha: float
    name: str = "step"
    symmetric: bool = True
    lattice: Optional[LatticeInfo] = None
    tail_known: bool = True

    # sampling ---------------------------------------------------------------------
    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    # distribution functions -----------------------------------------------------------
    def tail(self, s) -> np.ndarray:
        """q_X(s) = P(|X| > s)."""
        raise NotImplementedError

    def cf(self, t) -> np.ndarray:
        raise NotImplementedError

    def pmf(self, x) -> np.ndarray:
        raise NotImplementedError(f"{self.name} has no pmf")

    def cell_probability(self, lo, h: float) -> np.ndarray:
        """P(X in lo + [0, h)^d) for rows of ``lo``."""
        raise NotImplementedError

    def truncated_mean(self, s) -> np.ndarray:
        """c_X(s) = E[X 1{|X| <= s}]; zero for symmetric laws."""
        if self.symmetric:
            return np.zeros(np.shape(s) + (self.d,))
        raise NotImplementedError

    def truncated_second_moment(self, s, u) -> np.ndarray:
        """m_X(s, u) = E[<u, X>^2 1{|X| <= s}]."""
        raise NotImplementedError

    def truncated_variance(self, s) -> np.ndarray:
        """V_X(s) = E[|X|^2 1{|X| <= s}]."""
        raise NotImplementedError

    # limits ------------------------------------------------------------------------------
    def norming(self) -> NormingFunction:
        raise UnknownTail(f"{self.name}: no declared tail asymptotics")

    def limit_law(self):
        raise NotImplementedError

    def describe(self) -> dict:
        return {"family": self.name, "d": self.d, "alpha": self.alpha}


# paths -----------------------------------------------------------------------------------
@dataclass(frozen=True)
class SamplePath:
    steps: np.ndarray
    partial_sums: np.ndarray  # row 0 is S_0 = 0

    @property
    def n(self) -> int:
        return self.steps.shape[0]


def sample_path(model: StepDistribution, n: int, seed: int, substream_id: int = 0) -> SamplePath:
    """n steps and partial sums S_0..S_n, deterministic in (seed, substream_id)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    rng = substream(seed, substream_id)
    steps = model.sample(n, rng) if n > 0 else np.zeros((0, model.d))
    sums = np.zeros((n + 1, model.d), dtype=steps.dtype)
    np.cumsum(steps, axis=0, out=sums[1:])
    return SamplePath(steps, sums)


# norming validation ------------------------------------------------------------------------
@dataclass(frozen=True)
class NormingCheck:
    norming: NormingFunction
    s_grid: tuple
    ratios: tuple
    band: tuple
    within_band: bool

    def to_json(self):
        return {
            "norming": self.norming.to_json(),
            "s_grid": list(self.s_grid),
            "q_times_A": list(self.ratios),
            "band": list(self.band),
            "within_band": self.within_band,
        }


def norming_from_tail(
    model: StepDistribution, s_grid: Sequence[float] = tuple(np.logspace(2, 6, 9)), band=(1e-3, 1e3)
) -> NormingCheck:
    """The family's A together with the check that q_X(s) A(s) stays in ``band`` on ``s_grid``."""
    if not getattr(model, "tail_known", True):
        raise UnknownTail(f"{model.name}: tail asymptotics not declared")
    A = model.norming()
    s = np.asarray(s_grid, float)
    ratio = np.asarray(model.tail(s), float) * A(s)
    ok = bool(np.all((ratio >= band[0]) & (ratio <= band[1])))
    return NormingCheck(A, tuple(s), tuple(float(r) for r in ratio), tuple(band), ok)


# truncated moments ---------------------------------------------------------------------------
@dataclass(frozen=True)
class MomentDiagnostics:
    s_grid: tuple
    directions: np.ndarray
    m_ratio: np.ndarray  # m_X(s, u) A(s) / s^2, shape (len(s), n_dirs)
    centering: tuple  # (n / a_n) |c_X(a_n)| at n = A(s)
    band_factor: float
    drift: bool
    stderr: Optional[np.ndarray] = None

    @property
    def within_band(self) -> bool:
        m = self.m_ratio
        return bool(np.all(m > 0) and m.max() / m.min() <= self.band_factor)

    def to_json(self):
        return {
            "s_grid": list(self.s_grid),
            "directions": self.directions.tolist(),
            "m_ratio": self.m_ratio.tolist(),
            "centering": list(self.centering),
            "band_factor": self.band_factor,
            "within_band": self.within_band,
            "monotone_drift": self.drift,
        }


def truncated_moment_diagnostics(
    model: StepDistribution,
    s_grid: Sequence[float],
    directions=None,
    band_factor: float = 4.0,
    n_mc: int = 0,
    seed: Optional[int] = None,
) -> MomentDiagnostics:
    """Tables of m_X(s,u) A(s)/s^2 and (n/a_n)|c_X(a_n)| along ``s_grid``.

    Analytic moments are used where the model provides them; otherwise
    ``n_mc`` samples give Monte Carlo estimates and MonteCarloBudget is raised
    if the error bars exceed the band width.  ``drift`` flags a ratio that is
    strictly monotone along the whole grid in some direction.
    """
    s = np.asarray(s_grid, float)
    if np.any(np.diff(s) <= 0):
        raise ValueError("s_grid must be increasing")
    if directions is None:
        rng = np.random.default_rng(0)
        directions = rng.standard_normal((8, model.d))
    u = np.asarray(directions, float)
    u = u / np.linalg.norm(u, axis=1, keepdims=True)
    A = model.norming()
    stderr = None
    try:
        m = np.array([[model.truncated_second_moment(si, ui) for ui in u] for si in s], dtype=float)
        cx = np.array([np.linalg.norm(model.truncated_mean(float(A.a(A(si))))) for si in s])
    except NotImplementedError:
        if n_mc <= 0 or seed is None:
            raise
        x = model.sample(n_mc, substream(seed, 0))
        r = np.linalg.norm(x, axis=1)
        proj = x @ u.T
        m = np.empty((len(s), len(u)))
        stderr = np.empty_like(m)
        cx = np.empty(len(s))
        for i, si in enumerate(s):
            keep = (r <= si)[:, None]
            vals = np.where(keep, proj ** 2, 0.0)
            m[i] = vals.mean(axis=0)
            stderr[i] = vals.std(axis=0) / math.sqrt(n_mc)
            cx[i] = np.linalg.norm(np.where(keep, x, 0.0).mean(axis=0))
        if np.any(stderr > m * (band_factor - 1.0) / 2.0):
            raise MonteCarloBudget("Monte Carlo error bars exceed the band width")
    ratio = m * A(s)[:, None] / s[:, None] ** 2
    n_at = A(s)
    cent = tuple(float(nn / A.a(nn) * c) for nn, c in zip(n_at, cx))
    diffs = np.diff(ratio, axis=0)
    drift = bool(len(s) > 2 and np.any(np.all(diffs > 0, axis=0) | np.all(diffs < 0, axis=0)))
    return MomentDiagnostics(tuple(s), u, ratio, cent, band_factor, drift, stderr)

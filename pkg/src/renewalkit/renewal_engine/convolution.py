"""Truncated exact convolution powers on a box of Z^d."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .. import kernels
from ..errors import BoxTooSmall

__all__ = ["ConvolutionTable", "convolve_exact", "step_table"]


@dataclass(frozen=True)
class ConvolutionTable:
    """F^{*k} restricted to [-radius, radius]^d (centred array).

    Every entry underestimates the true mass and the deficit summed over the
    box is at most ``lost_mass`` = 1 - (in-box mass), tracked per step.
    ``union_bound`` is the a priori bound k q_inf(radius/2).
    """

    k: int
    radius: int
    values: np.ndarray = field(repr=False)
    lost_mass: float
    union_bound: float

    @property
    def d(self) -> int:
        return self.values.ndim

    def at(self, z) -> np.ndarray:
        """Table value at integer points (rows); zero outside the box."""
        z = np.atleast_2d(np.asarray(z, dtype=np.int64))
        inside = np.all(np.abs(z) <= self.radius, axis=1)
        idx = np.where(inside[:, None], z + self.radius, 0)
        out = self.values[tuple(idx.T)]
        return np.where(inside, out, 0.0)

    def cell_mass(self, lo, h: float) -> float:
        """Mass of the integer points in lo + [0, h)^d."""
        lo = np.asarray(lo, float)
        first = np.ceil(lo).astype(np.int64)
        last = np.ceil(lo + h).astype(np.int64) - 1
        if np.any(last < first):
            return 0.0
        a = np.clip(first + self.radius, 0, 2 * self.radius + 1)
        b = np.clip(last + self.radius + 1, 0, 2 * self.radius + 1)
        return float(self.values[tuple(slice(i, j) for i, j in zip(a, b))].sum())


def step_table(model, radius: int) -> np.ndarray:
    """pmf of one step on [-radius, radius]^d."""
    if hasattr(model, "pmf_box"):
        return np.asarray(model.pmf_box(radius), float)
    ax = np.arange(-radius, radius + 1)
    grid = np.stack(np.meshgrid(*([ax] * model.d), indexing="ij"), axis=-1)
    return np.asarray(model.pmf(grid), float)


def convolve_exact(
    model,
    n: int,
    box_radius: int,
    tol: Optional[float] = None,
    backend: Optional[str] = None,
    keep="all",
) -> List[ConvolutionTable]:
    """Tables of F^{*k}, k = 1..n, on the box of radius ``box_radius``.

    Sparse step laws use the scatter kernel over the atoms, dense ones the
    direct convolution with the step pmf on the same box.  ``keep`` is "all",
    "last" or an iterable of the k to retain.  BoxTooSmall is raised when the tracked lost mass
    exceeds ``tol``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    R = int(box_radius)
    p = step_table(model, R)
    nz = np.argwhere(p > 0)
    sparse = len(nz) <= 64
    offsets = nz - R
    weights = p[tuple(nz.T)]
    tail_half = float(model.tail(R / 2.0))  # P(|X| > R/2) bounds each step's escape
    if keep == "all":
        wanted = set(range(1, n + 1))
    elif keep == "last":
        wanted = {n}
    else:
        wanted = {int(k) for k in keep}
    cur = p.copy()
    out = []
    for k in range(1, n + 1):
        if k > 1:
            if sparse:
                cur = kernels.scatter_convolve(cur, offsets, weights, backend=backend)
            else:
                cur = kernels.dense_convolve(cur, p, backend=backend)
        lost = max(0.0, 1.0 - float(cur.sum()))
        if tol is not None and lost > tol:
            raise BoxTooSmall(f"lost mass {lost:.3e} exceeds tolerance {tol:.3e} at k={k} (radius {R})")
        if k in wanted:
            out.append(ConvolutionTable(k, R, cur.copy(), lost, min(1.0, k * tail_half)))
    return out

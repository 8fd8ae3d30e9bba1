"""Stable densities on regular grids by trapezoidal Fourier inversion.

With nodes t = k dt the trapezoid sum of the inversion integral equals, by
Poisson summation, the periodised density sum_m psi(x + m P) with period
P = 2 pi / dt, up to the mass of |cf| outside the truncation box.  Both parts
are bounded explicitly where an envelope for psi is known:

* alias: sum over images m != 0 of a radially decreasing envelope evaluated at
  |m| P - R, for |x| <= R;
* truncation: (2 pi)^-d times the integral of exp(-c_min |t|^alpha) outside
  the ball of radius T (an upper incomplete gamma function).

Laws invariant under every coordinate reflection have a real CF that is even
in each coordinate, so the positive orthant suffices and the sum is a DCT-I.
Everything else goes through a complex FFT on the full box.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import fft, interpolate, special

from ..errors import QuadratureBudgetExceeded
from .isotropic import isotropic_radial_density
from .onedim import sym_stable_pdf, sym_stable_sf

__all__ = ["DensityGrid", "density", "MAGIC"]

MAGIC = b"RKDG"
_VERSION = 1
DEFAULT_MAX_NODES = 40_000_000


@dataclass(frozen=True)
class DensityGrid:
    """psi sampled at ``origin + k * spacing`` for k in the index box ``values.shape``."""

    spacing: float
    origin: np.ndarray
    values: np.ndarray
    order: int = 3
    error_estimate: float = float("nan")
    richardson_gap: float = float("nan")
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def d(self) -> int:
        return self.values.ndim

    @property
    def extent(self) -> np.ndarray:
        """Upper corner of the grid."""
        return self.origin + self.spacing * (np.array(self.values.shape) - 1)

    def axes(self):
        return [self.origin[i] + self.spacing * np.arange(n) for i, n in enumerate(self.values.shape)]

    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack(mesh, axis=-1)

    def mass(self) -> float:
        """Trapezoid mass of the grid (the grid is assumed to cover the bulk)."""
        return float(self.values.sum() * self.spacing ** self.d)

    def evaluator(self, fill_value: float = float("nan")):
        """Callable x -> psi(x) by spline interpolation; ``fill_value`` outside the grid."""
        method = {1: "linear", 3: "cubic"}.get(self.order, "linear")
        f = interpolate.RegularGridInterpolator(
            self.axes(), self.values, method=method, bounds_error=False, fill_value=fill_value
        )

        def psi(x):
            x = np.asarray(x, dtype=float)
            return f(x.reshape(-1, self.d)).reshape(x.shape[:-1])

        return psi

    def interpolate(self, x, fill_value: float = 0.0) -> np.ndarray:
        return self.evaluator(fill_value)(x)

    # serialization -------------------------------------------------------------
    def to_csv(self, path) -> None:
        pts = self.points().reshape(-1, self.d)
        cols = [f"x{i}" for i in range(self.d)] + ["psi"]
        data = np.column_stack([pts, self.values.reshape(-1)])
        np.savetxt(path, data, delimiter=",", header=",".join(cols), comments="", fmt="%.17g")

    def to_bytes(self) -> bytes:
        """Header: magic, u32 version, u32 d, d x u64 sizes, f64 spacing, d x f64 origin; then f64 values (C order)."""
        head = MAGIC + struct.pack("<II", _VERSION, self.d)
        head += struct.pack(f"<{self.d}Q", *self.values.shape)
        head += struct.pack("<d", self.spacing)
        head += struct.pack(f"<{self.d}d", *self.origin)
        return head + np.ascontiguousarray(self.values, dtype="<f8").tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "DensityGrid":
        if blob[:4] != MAGIC:
            raise ValueError("not a density grid file")
        version, d = struct.unpack_from("<II", blob, 4)
        if version != _VERSION:
            raise ValueError(f"unsupported grid version {version}")
        off = 12
        shape = struct.unpack_from(f"<{d}Q", blob, off)
        off += 8 * d
        (spacing,) = struct.unpack_from("<d", blob, off)
        off += 8
        origin = np.array(struct.unpack_from(f"<{d}d", blob, off))
        off += 8 * d
        vals = np.frombuffer(blob, dtype="<f8", offset=off).reshape(shape).astype(float)
        return cls(spacing=spacing, origin=origin, values=vals)

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "DensityGrid":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


# alias bounds -------------------------------------------------------------------
def _radial_alias(env, d: int, period: float, radius: float, shells: int) -> float:
    """sum_{m != 0} env(|m| P - R) for a radially decreasing envelope env."""
    rng = np.arange(-shells, shells + 1)
    m = np.stack(np.meshgrid(*([rng] * d), indexing="ij"), axis=-1).reshape(-1, d)
    m = m[np.any(m != 0, axis=1)]
    dist = np.maximum(np.linalg.norm(m, axis=1) * period - radius, 0.0)
    total = float(np.sum(env(dist)))
    # images beyond the shell box, through the integral of env over |y| > shells * P
    r0 = shells * period
    rr = r0 * np.exp(np.linspace(0.0, 8.0, 400))
    sphere = 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)
    integrand = sphere * rr ** (d - 1) * env(np.maximum(rr - radius, 0.0)) * rr
    tail = float(np.trapezoid(integrand, np.log(rr))) / period ** d
    return total + tail


def _alias_function(law, radius: float) -> Optional[Callable[[float], float]]:
    """P -> bound on |periodised psi - psi| over |x| <= radius, or None if unknown."""
    d, alpha = law.d, law.alpha
    shells = {1: 40, 2: 12, 3: 5}.get(d, 3)
    if np.any(law.tau):
        return None
    if alpha == 2.0:
        lam = np.linalg.eigvalsh(law.covariance())
        peak = 1.0 / math.sqrt((2 * math.pi) ** d * np.prod(lam))
        env = lambda r: peak * np.exp(-0.5 * np.asarray(r) ** 2 / lam.max())
        return lambda P: _radial_alias(env, d, P, radius, shells)
    if law.is_isotropic:
        # isotropic stable laws are Gaussian scale mixtures, hence radially decreasing
        c = law.cf_scale()
        env = lambda r: isotropic_radial_density(np.asarray(r, float), alpha, d, c)
        return lambda P: _radial_alias(env, d, P, radius, shells)
    if law.spectral.is_coordinate_axes():
        scale = (law.C / d) ** (1.0 / alpha)
        g0 = float(sym_stable_pdf(0.0, alpha, scale))

        def bound(P):
            # the periodisation factorises: prod(g + a_i) - prod(g) <= (g0 + a)^d - g0^d
            k = np.arange(1, 200001, dtype=float)
            a = 2.0 * float(np.sum(sym_stable_pdf(np.maximum(k * P - radius, 0.0), alpha, scale)))
            tail_x = 200000.5 * P - radius
            a += 2.0 * float(sym_stable_sf(tail_x, alpha, scale)) / P
            return (g0 + a) ** d - g0 ** d

        return bound
    return None


def _truncation_bound(d: int, alpha: float, cmin: float, T: float) -> float:
    sphere = 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)
    # int_{|t|>T} exp(-c |t|^a) dt = S_{d-1} c^{-d/a} Gamma(d/a, c T^a) / a
    val = sphere * cmin ** (-d / alpha) * special.gammaincc(d / alpha, cmin * T ** alpha)
    val *= special.gamma(d / alpha) / alpha
    return val / (2.0 * math.pi) ** d


def _choose_T(d, alpha, cmin, target) -> float:
    T = (1.0 / cmin) ** (1.0 / alpha)
    while _truncation_bound(d, alpha, cmin, T) > target:
        T *= 1.1
    return T


def _choose_period(alias, radius, target) -> float:
    P = max(4.0 * radius, 1.0)
    while alias(P) > target:
        P *= 1.1
        if P > 1e6:
            break
    return P


# inversion ----------------------------------------------------------------------
def _invert_reflection_symmetric(law, dt: float, n: int) -> np.ndarray:
    """psi at x = k pi/(n dt), k = 0..n, per axis, via a d-fold DCT-I."""
    d = law.d
    t1 = dt * np.arange(n + 1)
    vals = _cf_tensor(law, t1)
    out = fft.dctn(vals, type=1, overwrite_x=True, workers=1)
    return out * (dt / (2.0 * math.pi)) ** d


def _cf_tensor(law, t1: np.ndarray) -> np.ndarray:
    d = law.d
    if law.spectral.is_coordinate_axes() and not np.any(law.tau):
        g = np.exp(-(law.C / d) * np.abs(t1) ** law.alpha)
        out = g
        for _ in range(d - 1):
            out = np.multiply.outer(out, g)
        return out
    if law.is_isotropic:
        r2 = t1 ** 2
        acc = r2
        for _ in range(d - 1):
            acc = np.add.outer(acc, r2)
        return np.exp(-law.cf_scale() * acc ** (law.alpha / 2.0))
    grids = np.meshgrid(*([t1] * d), indexing="ij")
    pts = np.stack(grids, axis=-1)
    return np.real(law.cf(pts))


def _invert_general(law, dt: float, n: int) -> np.ndarray:
    """psi at x = k pi/(n dt), k = -n..n-1, per axis, via a complex FFT."""
    d = law.d
    t1 = dt * np.arange(-n, n)
    grids = np.meshgrid(*([t1] * d), indexing="ij")
    vals = law.cf(np.stack(grids, axis=-1))
    del grids
    vals = fft.ifftshift(vals)
    out = fft.fftn(vals, overwrite_x=True, workers=1)
    out = fft.fftshift(out)
    return np.real(out) * (dt / (2.0 * math.pi)) ** d


def _grid_from_symmetric(half: np.ndarray, dx: float, keep: int) -> np.ndarray:
    sl = tuple(slice(0, keep + 1) for _ in range(half.ndim))
    q = half[sl]
    for ax in range(q.ndim):
        rev = np.flip(np.take(q, np.arange(1, keep + 1), axis=ax), axis=ax)
        q = np.concatenate([rev, q], axis=ax)
    return q


def _period_mass(half: np.ndarray, dx: float) -> float:
    """Mass of one full alias period reconstructed from the positive orthant."""
    n = half.shape[0] - 1
    w = np.full(n + 1, 2.0)
    w[0] = w[-1] = 1.0
    acc = half
    for _ in range(half.ndim):
        acc = np.tensordot(acc, w, axes=([0], [0]))
    return float(acc) * dx ** half.ndim


def _raw_grid(law, dt, n, keep, symmetric):
    """Values on the kept cube and the mass of one full alias period."""
    dx = math.pi / (n * dt)
    if symmetric:
        half = _invert_reflection_symmetric(law, dt, n)
        return _grid_from_symmetric(half, dx, keep), _period_mass(half, dx)
    full = _invert_general(law, dt, n)
    sl = tuple(slice(n - keep, n + keep + 1) for _ in range(law.d))
    return full[sl], float(full.sum()) * dx ** law.d


def density(
    law,
    extent: Optional[float] = 5.0,
    tol: float = 1e-7,
    spacing: Optional[float] = None,
    tail_eps: float = 1e-9,
    max_nodes: int = DEFAULT_MAX_NODES,
    richardson: bool = True,
) -> DensityGrid:
    """Density of ``law`` on the cube [-extent, extent]^d.

    ``tol`` is the target for the alias bound; ``tail_eps`` for the truncated
    CF mass.  ``spacing`` caps the output spacing (output spacing is pi/T).
    The reported ``error_estimate`` bounds |psi_grid - psi| on the ball
    |x| <= extent when an envelope is known; otherwise it is the Richardson gap.
    ``meta["period_mass"]`` is the mass of one full alias period, which equals
    the total mass of psi up to the truncated CF mass.
    """
    d, alpha = law.d, law.alpha
    if extent is None:
        extent = 5.0 * max(1.0, law.C ** (1.0 / alpha))
    alias = _alias_function(law, extent)
    symmetric = law.spectral.is_reflection_symmetric() and not np.any(law.tau)
    cmin = law.cf_abs_lower_exponent()
    if law.spectral.is_coordinate_axes():
        cmin = law.C / d
    T = _choose_T(d, alpha, cmin, tail_eps)
    if spacing is not None:
        T = max(T, math.pi / spacing)
    if alias is not None:
        P = _choose_period(alias, extent, tol)
    else:
        P = 8.0 * extent
    dt = 2.0 * math.pi / P
    n = int(math.ceil(T / dt))
    if symmetric and n % 2:
        n += 1
    per_axis = (n + 1) if symmetric else 2 * n
    if per_axis ** d > max_nodes:
        raise QuadratureBudgetExceeded(
            f"inversion needs {per_axis}^{d} nodes, budget is {max_nodes}"
        )
    dx = math.pi / (n * dt)
    keep = int(math.floor(extent / dx + 1e-9))
    if keep > n - 1:
        raise QuadratureBudgetExceeded("requested extent exceeds half the alias period")
    values, period_mass = _raw_grid(law, dt, n, keep, symmetric)

    gap = float("nan")
    if richardson:
        # twice the node spacing: same output spacing, half the period
        coarse_keep = min(keep, n // 2 - 1)
        if coarse_keep >= 1 and (n // 2) * dt * 2 >= T * 0.999:
            cvals, _ = _raw_grid(law, 2 * dt, n // 2, coarse_keep, symmetric)
            sl = tuple(slice(keep - coarse_keep, keep + coarse_keep + 1) for _ in range(d))
            gap = float(np.max(np.abs(values[sl] - cvals)))

    if alias is not None:
        err = alias(P) + _truncation_bound(d, alpha, cmin, n * dt)
    else:
        err = gap
    origin = np.full(d, -keep * dx)
    meta = {
        "period": P,
        "T": n * dt,
        "nodes_per_axis": per_axis,
        "symmetric_path": symmetric,
        "period_mass": period_mass,
    }
    return DensityGrid(spacing=dx, origin=origin, values=values, error_estimate=err, richardson_gap=gap, meta=meta)

"""Strictly stable laws on R^d described by (alpha, C, tau, spectral measure)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ..errors import NotApplicable
from .isotropic import isotropic_radial_density
from .onedim import sym_stable_pdf

__all__ = ["SpectralMeasure", "StableLaw", "isotropic_moment", "cf", "fibonacci_sphere"]


def isotropic_moment(alpha: float, d: int) -> float:
    """E|<xi, e>|^alpha for xi uniform on the unit sphere of R^d."""
    return math.exp(
        math.lgamma((alpha + 1) / 2.0)
        + math.lgamma(d / 2.0)
        - 0.5 * math.log(math.pi)
        - math.lgamma((d + alpha) / 2.0)
    )


def fibonacci_sphere(n: int, d: int) -> np.ndarray:
    """Deterministic, roughly uniform directions on S^{d-1} (d = 1, 2, 3)."""
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        th = 2.0 * np.pi * np.arange(n) / n
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    if d == 3:
        i = np.arange(n) + 0.5
        z = 1.0 - 2.0 * i / n
        phi = np.pi * (3.0 - math.sqrt(5.0)) * i
        rho = np.sqrt(1.0 - z * z)
        return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
    rng = np.random.default_rng(20240601 + d)
    v = rng.standard_normal((n, d))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


@dataclass(frozen=True)
class SpectralMeasure:
    """Law of the direction xi on S^{d-1}.

    ``kind`` is ``"isotropic"`` (uniform law, handled in closed form) or
    ``"atoms"``.  A spherical density is discretised into atoms by a
    quadrature rule in :meth:`from_density`, keeping ``kind="density"`` as a tag.
    """

    d: int
    kind: str = "isotropic"
    directions: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in ("isotropic", "atoms", "density"):
            raise ValueError(f"unknown spectral kind {self.kind!r}")
        if self.kind != "isotropic":
            dirs = np.atleast_2d(np.asarray(self.directions, dtype=float))
            w = np.asarray(self.weights, dtype=float).ravel()
            if dirs.shape != (w.size, self.d):
                raise ValueError("directions must have shape (m, d) matching weights")
            if np.any(np.abs(np.linalg.norm(dirs, axis=1) - 1.0) > 1e-12):
                raise ValueError("spectral directions must be unit vectors (to 1e-12)")
            if np.any(w <= 0):
                raise ValueError("spectral weights must be positive")
            if abs(w.sum() - 1.0) > 1e-12:
                raise ValueError("spectral weights must sum to 1")
            object.__setattr__(self, "directions", dirs)
            object.__setattr__(self, "weights", w)

    @classmethod
    def isotropic(cls, d: int) -> "SpectralMeasure":
        return cls(d=d, kind="isotropic")

    @classmethod
    def atoms(cls, directions, weights) -> "SpectralMeasure":
        dirs = np.atleast_2d(np.asarray(directions, dtype=float))
        return cls(d=dirs.shape[1], kind="atoms", directions=dirs, weights=np.asarray(weights, float))

    @classmethod
    def coordinate_axes(cls, d: int) -> "SpectralMeasure":
        """Equal atoms at +-e_i: the spectral measure of a product of symmetric stable laws."""
        dirs = np.concatenate([np.eye(d), -np.eye(d)])
        return cls.atoms(dirs, np.full(2 * d, 1.0 / (2 * d)))

    @classmethod
    def from_density(cls, d: int, density: Callable[[np.ndarray], np.ndarray], n_nodes: int = 256):
        nodes = fibonacci_sphere(n_nodes, d)
        w = np.asarray(density(nodes), dtype=float)
        keep = w > 0
        w = w[keep] / w[keep].sum()
        return cls(d=d, kind="density", directions=nodes[keep], weights=w)

    def mean(self) -> np.ndarray:
        if self.kind == "isotropic":
            return np.zeros(self.d)
        return self.weights @ self.directions

    def is_symmetric(self) -> bool:
        if self.kind == "isotropic":
            return True
        return _is_invariant(self.directions, self.weights, -np.ones(self.d))

    def is_reflection_symmetric(self) -> bool:
        """Invariant under every single-coordinate reflection."""
        if self.kind == "isotropic":
            return True
        for i in range(self.d):
            flip = np.ones(self.d)
            flip[i] = -1.0
            if not _is_invariant(self.directions, self.weights, flip):
                return False
        return True

    def is_coordinate_axes(self) -> bool:
        if self.kind == "isotropic" or len(self.weights) != 2 * self.d:
            return False
        ref = SpectralMeasure.coordinate_axes(self.d)
        return _is_invariant_pair(self.directions, self.weights, ref.directions, ref.weights)

    def spans_space(self) -> bool:
        if self.kind == "isotropic":
            return True
        return np.linalg.matrix_rank(self.directions, tol=1e-10) == self.d

    def moment(self, t: np.ndarray, alpha: float) -> np.ndarray:
        """E f_alpha(<xi, t>) for t of shape (..., d)."""
        t = np.asarray(t, dtype=float)
        if self.kind == "isotropic":
            return isotropic_moment(alpha, self.d) * np.linalg.norm(t, axis=-1) ** alpha + 0j
        th = t @ self.directions.T
        a = np.abs(th)
        sg = np.sign(th)
        if alpha == 1.0:
            with np.errstate(divide="ignore", invalid="ignore"):
                lg = np.where(a > 0, np.log(np.where(a > 0, a, 1.0)), 0.0)
            f = a * (1.0 + 1j * (2.0 / np.pi) * sg * lg)
        else:
            f = a ** alpha * (1.0 - 1j * math.tan(math.pi * alpha / 2.0) * sg)
        return f @ self.weights


def _is_invariant(dirs, w, flip) -> bool:
    return _is_invariant_pair(dirs, w, dirs * flip[None, :], w)


def _is_invariant_pair(d1, w1, d2, w2) -> bool:
    if len(w1) != len(w2):
        return False
    used = np.zeros(len(w2), dtype=bool)
    for x, wx in zip(d1, w1):
        dist = np.abs(d2 - x[None, :]).max(axis=1) + np.where(used, np.inf, 0.0)
        j = int(np.argmin(dist))
        if dist[j] > 1e-12 or abs(w2[j] - wx) > 1e-12:
            return False
        used[j] = True
    return True


class StableLaw:
    """Strictly stable law with CF exp(-C E f_alpha(<xi,t>) + i<tau,t> 1{alpha=1})."""

    def __init__(self, alpha: float, C: float, spectral: SpectralMeasure, tau=None):
        alpha = float(alpha)
        if not 0.0 < alpha <= 2.0:
            raise ValueError("alpha must lie in (0, 2]")
        if not C > 0:
            raise ValueError("C must be positive")
        self.alpha = alpha
        self.C = float(C)
        self.spectral = spectral
        self.d = spectral.d
        self.tau = np.zeros(self.d) if tau is None else np.asarray(tau, dtype=float)
        if alpha == 1.0 and np.abs(spectral.mean()).max() > 1e-12:
            raise ValueError("alpha = 1 requires a spectral measure with zero mean")
        if not spectral.spans_space():
            raise NotApplicable("spectral measure is concentrated in a hyperplane (degenerate law)")
        self._grid_cache = None

    # constructors -------------------------------------------------------------
    @classmethod
    def isotropic(cls, alpha: float, d: int, cf_scale: float = 1.0) -> "StableLaw":
        """Isotropic law with CF exp(-cf_scale |t|^alpha)."""
        return cls(alpha, cf_scale / isotropic_moment(alpha, d), SpectralMeasure.isotropic(d))

    @classmethod
    def product(cls, alpha: float, d: int, cf_scale: float = 1.0) -> "StableLaw":
        """Law of (X_1..X_d) i.i.d. with CF exp(-cf_scale |t_i|^alpha) per coordinate."""
        return cls(alpha, d * cf_scale, SpectralMeasure.coordinate_axes(d))

    @classmethod
    def gaussian(cls, cov) -> "StableLaw":
        """N(0, cov) written as an alpha = 2 stable law."""
        cov = np.atleast_2d(np.asarray(cov, dtype=float))
        lam, vec = np.linalg.eigh(cov)
        if np.any(lam <= 0):
            raise NotApplicable("covariance must be positive definite")
        d = cov.shape[0]
        dirs = np.concatenate([vec.T, -vec.T])
        w = np.concatenate([lam, lam]) / (2.0 * lam.sum())
        # C E<xi,t>^2 = t' cov t / 2  =>  C = trace(cov) / 2
        return cls(2.0, lam.sum() / 2.0, SpectralMeasure.atoms(dirs, w))

    # properties -----------------------------------------------------------------
    @property
    def is_isotropic(self) -> bool:
        return self.spectral.kind == "isotropic" and not np.any(self.tau)

    @property
    def is_symmetric(self) -> bool:
        return self.spectral.is_symmetric() and not np.any(self.tau)

    def cf_scale(self) -> float:
        """c with CF exp(-c|t|^alpha) for isotropic laws."""
        if not self.is_isotropic:
            raise NotApplicable("cf_scale is defined for isotropic laws only")
        return self.C * isotropic_moment(self.alpha, self.d)

    def covariance(self) -> np.ndarray:
        if self.alpha != 2.0:
            raise NotApplicable("covariance exists only for alpha = 2")
        if self.spectral.kind == "isotropic":
            return 2.0 * self.C / self.d * np.eye(self.d)
        dirs, w = self.spectral.directions, self.spectral.weights
        return 2.0 * self.C * (dirs.T * w) @ dirs

    # characteristic function -----------------------------------------------------
    def cf(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        expo = -self.C * self.spectral.moment(t, self.alpha)
        if self.alpha == 1.0 and np.any(self.tau):
            expo = expo + 1j * (t @ self.tau)
        out = np.exp(expo)
        if np.ndim(out) == 0:
            return complex(out)
        return out

    def cf_abs_lower_exponent(self, n_dirs: int = 512) -> float:
        """A lower bound c_min for Re(C E f) / |t|^alpha over sampled directions."""
        if self.spectral.kind == "isotropic":
            return self.cf_scale()
        u = fibonacci_sphere(n_dirs, self.d)
        re = self.C * np.real(self.spectral.moment(u, self.alpha))
        return float(re.min()) * 0.9

    # density -----------------------------------------------------------------------
    def psi(self, x) -> np.ndarray:
        """Density at points x of shape (..., d)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.d:
            raise ValueError("last axis of x must have length d")
        if self.alpha == 2.0 and not np.any(self.tau):
            cov = self.covariance()
            inv = np.linalg.inv(cov)
            q = np.einsum("...i,ij,...j->...", x, inv, x)
            return np.exp(-0.5 * q) / math.sqrt((2 * math.pi) ** self.d * np.linalg.det(cov))
        if self.is_isotropic:
            r = np.linalg.norm(x, axis=-1)
            return isotropic_radial_density(r, self.alpha, self.d, self.cf_scale())
        if self.spectral.is_coordinate_axes() and not np.any(self.tau):
            scale = (self.C / self.d) ** (1.0 / self.alpha)
            return np.prod(sym_stable_pdf(x, self.alpha, scale), axis=-1)
        # generic spectral measures: interpolated inversion grid, NaN outside it
        return self._grid()(x)

    def use_grid(self, grid) -> None:
        """Evaluate psi for generic laws from ``grid`` (a DensityGrid)."""
        self._grid_cache = grid.evaluator()

    def _grid(self):
        if self._grid_cache is None:
            from .density import density

            self.use_grid(density(self, extent=None))
        return self._grid_cache

    def __repr__(self):
        return f"StableLaw(alpha={self.alpha}, C={self.C}, d={self.d}, spectral={self.spectral.kind})"


def cf(law: StableLaw, t) -> np.ndarray:
    return law.cf(t)

"""Target cells D^{-1} K I_nu x (h I_{d-nu})."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..exact_lattice import UnimodularMatrix

__all__ = ["TargetCell"]


@dataclass(frozen=True)
class TargetCell:
    """Cell of the renewal target, stated in the normalized lattice frame.

    Integer-valued models are evaluated in their own frame; ``target_point``
    maps a target x to the unique model-frame integer point z whose image
    D^{-1} K z lies in x + cell.

    The first ``nu`` coordinates form the parallelepiped D^{-1} K [0,1)^nu with
    D = diag(1, ..., 1, q); the remaining d - nu coordinates form [0, h)^(d-nu).
    ``K`` is stored as a tuple of integer rows (identity when omitted).
    """

    d: int
    h: float = 1.0
    nu: int = 0
    q: int = 1
    K: Optional[Tuple[Tuple[int, ...], ...]] = None

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("h must be positive")
        if not 0 <= self.nu <= self.d:
            raise ValueError("need 0 <= nu <= d")
        if self.q < 1:
            raise ValueError("q must be a positive integer")
        if self.nu == 0 and self.q != 1:
            raise ValueError("q must be 1 when nu = 0")
        if self.K is None:
            object.__setattr__(self, "K", tuple(tuple(int(i == j) for j in range(self.nu)) for i in range(self.nu)))
        else:
            K = tuple(tuple(int(c) for c in row) for row in self.K)
            if len(K) != self.nu or any(len(r) != self.nu for r in K):
                raise ValueError("K must be nu x nu")
            UnimodularMatrix(K)  # validates det = +-1
            object.__setattr__(self, "K", K)

    @classmethod
    def for_model(cls, model, h: float = 1.0) -> "TargetCell":
        """Lattice models use their declared (nu, q); others the plain cube h I_d."""
        lat = getattr(model, "lattice", None)
        if lat is None:
            return cls(model.d, h)
        ap = getattr(model, "aperiodicity", None)
        K = None
        if ap is not None and ap.K is not None:
            K = tuple(tuple(int(c) for c in row) for row in ap.K.entries)
        return cls(model.d, h, nu=lat.nu, q=lat.q, K=K)

    # geometry -------------------------------------------------------------------------------
    @property
    def volume(self) -> float:
        return self.h ** (self.d - self.nu) / self.q

    @property
    def lattice_weight(self) -> float:
        """h^(d - nu): the factor multiplying rho in the big-n limit."""
        return self.h ** (self.d - self.nu)

    def contains(self, x, y) -> np.ndarray:
        """Is y in x + cell?  Rows of ``y`` are tested against the point ``x``."""
        y = np.atleast_2d(np.asarray(y, float)) - np.asarray(x, float)
        ok = np.ones(y.shape[0], dtype=bool)
        if self.nu:
            # y_lat = D^{-1} K u with u in [0,1)^nu  <=>  u = K^{-1} D y_lat
            Kinv = np.array(UnimodularMatrix(self.K).inverse().entries, dtype=float)
            Dy = y[:, : self.nu].copy()
            Dy[:, -1] *= self.q
            u = Dy @ Kinv.T
            eps = 1e-9
            ok &= np.all((u >= -eps) & (u < 1 - eps), axis=1)
        if self.nu < self.d:
            rest = y[:, self.nu:]
            ok &= np.all((rest >= 0) & (rest < self.h), axis=1)
        return ok

    def to_lattice_frame(self, z) -> np.ndarray:
        """L = D^{-1} K z for integer model-frame points z (lattice block only)."""
        z = np.atleast_2d(np.asarray(z, float))
        out = z.copy()
        if self.nu:
            out[:, : self.nu] = z[:, : self.nu] @ np.array(self.K, float).T
            out[:, self.nu - 1] /= self.q
        return out

    def target_point(self, x) -> np.ndarray:
        """The integer z with D^{-1} K z in x + cell, for a purely lattice cell.

        D^{-1} K z in x + D^{-1} K I_nu  <=>  z in K^{-1} D x + I_nu, and the
        half-open unit cube holds exactly one integer point: ceil(K^{-1} D x).
        """
        if self.nu != self.d:
            raise ValueError("target_point needs a purely lattice cell (nu = d)")
        x = np.asarray(x, float).copy()
        x[-1] *= self.q
        Kinv = np.array(UnimodularMatrix(self.K).inverse().entries, dtype=float)
        y = Kinv @ x
        z = np.ceil(y - 1e-12).astype(np.int64)
        return z

    def box(self, x) -> Tuple[np.ndarray, np.ndarray]:
        """Bounding half-open box of x + cell for nu = 0."""
        if self.nu != 0:
            raise ValueError("box is defined for nu = 0 cells")
        x = np.asarray(x, float)
        return x, x + self.h

    def to_json(self):
        return {"d": self.d, "h": self.h, "nu": self.nu, "q": self.q, "K": [list(r) for r in self.K]}

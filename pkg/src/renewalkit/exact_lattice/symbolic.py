"""Exact reals of the form ``r + sum_j c_j * sigma_j``.

``r`` and the ``c_j`` are rationals; the ``sigma_j`` are formal symbols that
are assumed irrational and linearly independent over the rationals together
with 1.  Under that assumption equality, rational independence and (given a
sign convention) positivity are all decidable.
"""
from __future__ import annotations

import math
from fractions import Fraction
from numbers import Integral, Rational
from typing import Mapping, Optional

__all__ = ["SymbolicReal", "as_symbolic", "parse_symbolic"]


def _as_fraction(x) -> Fraction:
    if isinstance(x, bool):
        raise TypeError("booleans are not exact rationals")
    if isinstance(x, (Integral, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(
        f"{type(x).__name__} is not an exact rational; floats are rejected, pass 'p/q' strings"
    )


class SymbolicReal:
    """Immutable exact real with a rational part and formal irrational parts.

    Signs of expressions with irrational parts need a value for each symbol.
    When ``values`` is not given the symbols are ordered formally: the first
    symbol (sorted by name) with a nonzero coefficient decides the sign, as if
    every symbol were infinitely larger than 1 and than the symbols after it.
    """

    __slots__ = ("_rat", "_irr", "_hash")

    def __init__(self, rational=0, irrational: Optional[Mapping[str, object]] = None):
        self._rat = _as_fraction(rational)
        items = []
        for name, coef in (irrational or {}).items():
            c = _as_fraction(coef)
            if c != 0:
                items.append((str(name), c))
        items.sort()
        self._irr = tuple(items)
        self._hash = hash((self._rat, self._irr))

    @classmethod
    def symbol(cls, name: str, coef=1) -> "SymbolicReal":
        return cls(0, {name: coef})

    @property
    def rational_part(self) -> Fraction:
        return self._rat

    @property
    def irrational_part(self) -> dict:
        return dict(self._irr)

    @property
    def symbols(self) -> tuple:
        return tuple(name for name, _ in self._irr)

    def is_rational(self) -> bool:
        return not self._irr

    def is_zero(self) -> bool:
        return self._rat == 0 and not self._irr

    def coefficient(self, name: str) -> Fraction:
        for n, c in self._irr:
            if n == name:
                return c
        return Fraction(0)

    # arithmetic -----------------------------------------------------------
    def _combine(self, other: "SymbolicReal", sign: int) -> "SymbolicReal":
        irr = dict(self._irr)
        for name, c in other._irr:
            irr[name] = irr.get(name, Fraction(0)) + sign * c
        return SymbolicReal(self._rat + sign * other._rat, irr)

    def __add__(self, other):
        other = as_symbolic(other)
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(as_symbolic(other), -1)

    def __rsub__(self, other):
        return as_symbolic(other)._combine(self, -1)

    def __neg__(self):
        return SymbolicReal(-self._rat, {n: -c for n, c in self._irr})

    def __mul__(self, k):
        if isinstance(k, SymbolicReal):
            if k.is_rational():
                k = k._rat
            elif self.is_rational():
                return k * self._rat
            else:
                raise TypeError("product of two irrational SymbolicReals is not representable")
        k = _as_fraction(k)
        return SymbolicReal(self._rat * k, {n: c * k for n, c in self._irr})

    __rmul__ = __mul__

    def __truediv__(self, k):
        k = _as_fraction(k)
        return self * (1 / k)

    def __eq__(self, other):
        try:
            other = as_symbolic(other)
        except TypeError:
            return NotImplemented
        return self._rat == other._rat and self._irr == other._irr

    def __hash__(self):
        return self._hash

    # order ------------------------------------------------------------------
    def sign(self, values: Optional[Mapping[str, float]] = None) -> int:
        if not self._irr:
            return (self._rat > 0) - (self._rat < 0)
        if values is None:
            c = self._irr[0][1]
            return 1 if c > 0 else -1
        v = self.evaluate(values)
        if v == 0.0:
            raise ValueError("sign undecidable at floating precision for %r" % (self,))
        return 1 if v > 0 else -1

    def evaluate(self, values: Optional[Mapping[str, float]] = None) -> float:
        total = float(self._rat)
        for name, c in self._irr:
            if values is None or name not in values:
                raise KeyError(f"no numeric value for symbol {name!r}")
            total += float(c) * float(values[name])
        return total

    def floor(self, values: Optional[Mapping[str, float]] = None) -> int:
        """Integer floor; needs symbol values unless the number is rational."""
        if not self._irr:
            return math.floor(self._rat)
        if values is None:
            return math.floor(self._rat)
        return math.floor(self.evaluate(values))

    def frac(self, values: Optional[Mapping[str, float]] = None) -> "SymbolicReal":
        """Representative of ``self`` modulo 1 (exact shift by an integer)."""
        return self - self.floor(values)

    # io -------------------------------------------------------------------
    def to_json(self):
        if not self._irr:
            return str(self._rat)
        return {"rat": str(self._rat), "irr": {n: str(c) for n, c in self._irr}}

    def __repr__(self):
        if not self._irr:
            return f"SymbolicReal({self._rat})"
        parts = [str(self._rat)] if self._rat else []
        parts += [f"{c}*{n}" for n, c in self._irr]
        return "SymbolicReal(" + " + ".join(parts) + ")"

    __str__ = __repr__


def as_symbolic(x) -> SymbolicReal:
    if isinstance(x, SymbolicReal):
        return x
    return SymbolicReal(_as_fraction(x))


def parse_symbolic(obj) -> SymbolicReal:
    """Parse the JSON form: ``"p/q"``, an int, or ``{"rat": "p/q", "irr": {...}}``."""
    if isinstance(obj, dict):
        return SymbolicReal(obj.get("rat", 0), obj.get("irr", {}))
    if isinstance(obj, float):
        raise TypeError("floating-point coordinates are rejected; use 'p/q' strings")
    return as_symbolic(obj)

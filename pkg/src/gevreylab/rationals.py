"""Exact coefficient arithmetic: rationals and the Gaussian-rational extension.

Plain rational coefficients are ``fractions.Fraction`` (already canonical:
reduced form, positive denominator, exact equality).  ``GaussianRational``
adds the field Q(i) = {a + b*i : a, b in Q} behind the same arithmetic
protocol, for problems with complex linear parts.  Series code treats
coefficients generically: anything supporting +, -, *, /, == 0 works.
"""

from __future__ import annotations

import math
from fractions import Fraction

RationalLike = (int, Fraction)


def as_coefficient(value):
    """Coerce an int/Fraction/GaussianRational into a canonical coefficient."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, GaussianRational):
        return value.real if value.imag == 0 else value
    raise TypeError(f"unsupported coefficient type: {type(value).__name__}")


class GaussianRational:
    """A Gaussian rational a + b*i with exact Fraction components."""

    __slots__ = ("real", "imag")

    def __init__(self, real, imag=0):
        object.__setattr__(self, "real", Fraction(real))
        object.__setattr__(self, "imag", Fraction(imag))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    def _lift(self, other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, RationalLike):
            return GaussianRational(other)
        return None

    def __add__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return GaussianRational(self.real + other.real, self.imag + other.imag)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.real, -self.imag)

    def __sub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return GaussianRational(self.real - other.real, self.imag - other.imag)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return GaussianRational(
            self.real * other.real - self.imag * other.imag,
            self.real * other.imag + self.imag * other.real,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        d = other.real * other.real + other.imag * other.imag
        if d == 0:
            raise ZeroDivisionError("division by zero GaussianRational")
        return GaussianRational(
            (self.real * other.real + self.imag * other.imag) / d,
            (self.imag * other.real - self.real * other.imag) / d,
        )

    def __rtruediv__(self, other):
        other = self._lift(other)
        if other is None:
            return NotImplemented
        return other / self

    def conjugate(self):
        return GaussianRational(self.real, -self.imag)

    def abs_squared(self) -> Fraction:
        return self.real * self.real + self.imag * self.imag

    def __abs__(self) -> float:
        return math.hypot(float(self.real), float(self.imag))

    def __bool__(self):
        return bool(self.real) or bool(self.imag)

    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self.real == other.real and self.imag == other.imag
        if isinstance(other, RationalLike):
            return self.imag == 0 and self.real == other
        return NotImplemented

    def __hash__(self):
        if self.imag == 0:
            return hash(self.real)
        return hash((self.real, self.imag))

    def __repr__(self):
        if self.imag == 0:
            return f"GaussianRational({self.real})"
        return f"GaussianRational({self.real}, {self.imag})"


def coeff_abs(value) -> float:
    """|c| as a float, exact until the final conversion."""
    if isinstance(value, GaussianRational):
        return abs(value)
    return abs(float(value))


def coeff_abs_exact(value):
    """|c| as an exact Fraction when possible (rational c), else float."""
    if isinstance(value, GaussianRational):
        if value.imag == 0:
            return abs(value.real)
        return abs(value)
    return abs(value)

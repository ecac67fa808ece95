"""Exact numbers of the form ``numerator * 2**exponent``.

Every quantity the plotting formulas produce is an integer times a power of
two, so this type is closed under everything the evaluator needs.  Huge
negative exponents stay cheap because they live in the exponent field rather
than in a denominator.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import total_ordering
from numbers import Rational


def _trailing_zeros(n: int) -> int:
    low = n & 0xFFFFFFFFFFFFFFFF
    if low:
        return (low & -low).bit_length() - 1
    return (n & -n).bit_length() - 1


@total_ordering
class Dyadic:
    """Canonical dyadic rational: numerator odd, or zero with exponent 0."""

    __slots__ = ("numerator", "exponent")

    def __init__(self, numerator: int = 0, exponent: int = 0):
        numerator = int(numerator)
        exponent = int(exponent)
        if numerator == 0:
            exponent = 0
        elif not numerator & 1:
            tz = _trailing_zeros(numerator)
            numerator >>= tz
            exponent += tz
        self.numerator = numerator
        self.exponent = exponent

    @classmethod
    def from_value(cls, value) -> "Dyadic":
        if isinstance(value, Dyadic):
            return value
        if isinstance(value, int):
            return cls(value)
        if isinstance(value, float):
            p, q = value.as_integer_ratio()
        elif isinstance(value, Rational):
            p, q = value.numerator, value.denominator
        else:
            raise TypeError(f"cannot convert {type(value).__name__} to Dyadic")
        if q & (q - 1):
            raise ValueError(f"{value!r} is not a dyadic rational")
        return cls(p, -(q.bit_length() - 1))

    @classmethod
    def parse(cls, text: str) -> "Dyadic":
        """Parse a terminating decimal such as ``6.5`` or ``-0.125``.

        Decimals whose value is not a dyadic rational (``0.1``) are rejected.
        """
        text = text.strip()
        if not re.fullmatch(r"[+-]?(\d+(\.\d*)?|\.\d+)", text):
            raise ValueError(f"not a decimal number: {text!r}")
        frac = Fraction(text)
        if frac.denominator & (frac.denominator - 1):
            raise ValueError(f"{text} has no finite binary expansion")
        return cls.from_value(frac)

    @classmethod
    def power_of_two(cls, exponent: int) -> "Dyadic":
        return cls(1, exponent)

    def to_fraction(self) -> Fraction:
        if self.exponent >= 0:
            return Fraction(self.numerator << self.exponent)
        return Fraction(self.numerator, 1 << -self.exponent)

    def is_integer(self) -> bool:
        return self.exponent >= 0

    def __int__(self):
        if self.exponent >= 0:
            return self.numerator << self.exponent
        # truncation towards zero, like int(float)
        q = abs(self.numerator) >> -self.exponent
        return q if self.numerator >= 0 else -q

    def __floor__(self):
        if self.exponent >= 0:
            return self.numerator << self.exponent
        return self.numerator >> -self.exponent

    def __repr__(self):
        return f"Dyadic({self.numerator}, {self.exponent})"

    def __str__(self):
        if self.exponent >= 0:
            return str(self.numerator << self.exponent)
        if -self.exponent > 64:
            return f"{self.numerator}*2^{self.exponent}"
        # p / 2**e == p * 5**e / 10**e, so e decimal places are exact
        digits = -self.exponent
        whole, rem = divmod(abs(self.numerator) * 5**digits, 10**digits)
        sign = "-" if self.numerator < 0 else ""
        return f"{sign}{whole}.{rem:0{digits}d}".rstrip("0")

    def __hash__(self):
        if self.exponent >= 0:
            return hash(self.numerator << self.exponent)
        return hash(self.to_fraction())

    def _coerce(self, other):
        if isinstance(other, Dyadic):
            return other
        if isinstance(other, int):
            return Dyadic(other)
        return None

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (Fraction, float)):
                return self.to_fraction() == other
            return NotImplemented
        return self.numerator == o.numerator and self.exponent == o.exponent

    def __lt__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, (Fraction, float)):
                return self.to_fraction() < other
            return NotImplemented
        return (self - o).numerator < 0

    def __neg__(self):
        return Dyadic(-self.numerator, self.exponent)

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.numerator == 0:
            return o
        if o.numerator == 0:
            return self
        e = min(self.exponent, o.exponent)
        return Dyadic((self.numerator << (self.exponent - e)) + (o.numerator << (o.exponent - e)), e)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Dyadic(self.numerator * o.numerator, self.exponent + o.exponent)

    __rmul__ = __mul__

    def scale2(self, t: int) -> "Dyadic":
        """Multiply by ``2**t``."""
        if self.numerator == 0:
            return self
        return Dyadic(self.numerator, self.exponent + t)

    def floordiv_int(self, d: int) -> int:
        """``floor(self / d)`` for a positive integer d, exact."""
        if d < 1:
            raise ValueError("divisor must be positive")
        if not d & (d - 1):
            return floor_dyadic(self.scale2(1 - d.bit_length()))
        if self.exponent >= 0:
            return (self.numerator << self.exponent) // d
        return self.numerator // (d << -self.exponent)


def floor_dyadic(v: Dyadic) -> int:
    return v.__floor__()


def mod_real(v: Dyadic, d: int) -> Dyadic:
    """``v - d * floor(v / d)``; the result lies in ``[0, d)`` for any real v."""
    if d < 1:
        raise ValueError("modulus must be a positive integer")
    q = v.floordiv_int(d)
    if q == 0:
        return v
    return v - Dyadic(q * d)

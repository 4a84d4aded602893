"""Exact degrees of the form a + b*kappa with kappa a positive infinitesimal."""

from __future__ import annotations

import re
from fractions import Fraction
from functools import total_ordering

_TERM = re.compile(
    r"""\s*(?P<sign>[+-])?\s*
        (?:
          (?P<coef>\d+(?:/\d+)?)\s*(?:\*\s*(?P<k1>kappa))?
          |
          (?P<k2>kappa)
        )\s*""",
    re.VERBOSE,
)


@total_ordering
class Homogeneity:
    """Pair (a, b) standing for a + b*kappa, ordered lexicographically.

    One extra value, ``Homogeneity.infinity()``, sits above every finite
    degree and absorbs addition.
    """

    __slots__ = ("a", "b", "inf")

    def __init__(self, a=0, b=0, *, inf=False):
        self.a = Fraction(a)
        self.b = Fraction(b)
        self.inf = inf

    @classmethod
    def infinity(cls):
        return cls(0, 0, inf=True)

    @classmethod
    def coerce(cls, value):
        if isinstance(value, Homogeneity):
            return value
        if isinstance(value, str):
            return cls.parse(value)
        return cls(Fraction(value))

    @classmethod
    def parse(cls, text: str) -> "Homogeneity":
        """Parse strings like ``"-5/2-kappa"``, ``"2 - 3*kappa"`` or ``"inf"``."""
        s = text.strip()
        if s in ("inf", "+inf", "infinity"):
            return cls.infinity()
        if not s:
            raise ValueError("empty homogeneity")
        pos, a, b = 0, Fraction(0), Fraction(0)
        while pos < len(s):
            m = _TERM.match(s, pos)
            if not m or m.end() == pos:
                raise ValueError(f"cannot parse homogeneity {text!r} at offset {pos}")
            if pos > 0 and m.group("sign") is None:
                raise ValueError(f"missing operator in {text!r} at offset {pos}")
            sign = -1 if m.group("sign") == "-" else 1
            if m.group("k2"):
                b += sign
            elif m.group("k1"):
                b += sign * Fraction(m.group("coef"))
            else:
                a += sign * Fraction(m.group("coef"))
            pos = m.end()
        return cls(a, b)

    def is_infinite(self) -> bool:
        return self.inf

    def is_natural(self) -> bool:
        return not self.inf and self.b == 0 and self.a.denominator == 1 and self.a >= 0

    def substitute(self, kappa) -> Fraction:
        if self.inf:
            raise ValueError("cannot substitute into infinity")
        return self.a + self.b * Fraction(kappa)

    def _key(self):
        return (1, 0, 0) if self.inf else (0, self.a, self.b)

    def __eq__(self, other):
        if not isinstance(other, Homogeneity):
            try:
                other = Homogeneity.coerce(other)
            except (TypeError, ValueError):
                return NotImplemented
        return self._key() == other._key()

    def __lt__(self, other):
        other = Homogeneity.coerce(other)
        return self._key() < other._key()

    def __hash__(self):
        return hash(self._key())

    def __add__(self, other):
        other = Homogeneity.coerce(other)
        if self.inf or other.inf:
            return Homogeneity.infinity()
        return Homogeneity(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __neg__(self):
        if self.inf:
            raise ValueError("negating infinity")
        return Homogeneity(-self.a, -self.b)

    def __sub__(self, other):
        return self + (-Homogeneity.coerce(other))

    def __rsub__(self, other):
        return Homogeneity.coerce(other) - self

    def __mul__(self, n):
        if isinstance(n, Homogeneity):
            raise TypeError("homogeneities only scale by rationals")
        n = Fraction(n)
        if self.inf:
            if n > 0:
                return self
            raise ValueError("non-positive multiple of infinity")
        return Homogeneity(self.a * n, self.b * n)

    __rmul__ = __mul__

    def __str__(self):
        if self.inf:
            return "inf"
        if self.b == 0:
            return str(self.a)
        k = "kappa" if abs(self.b) == 1 else f"{abs(self.b)}*kappa"
        if self.a == 0:
            return ("-" if self.b < 0 else "") + k
        return f"{self.a}{'-' if self.b < 0 else '+'}{k}"

    def __repr__(self):
        return f"Homogeneity({str(self)!r})"


ZERO = Homogeneity(0)
KAPPA = Homogeneity(0, 1)
INFINITY = Homogeneity.infinity()


def hmin(values, default=None):
    values = list(values)
    if not values:
        return default
    return min(values)

"""Polynomials with rational coefficients in named constants.

These are the scalar values carried by characters of the renormalisation
group. A monomial is a sorted tuple of ``(name, power)`` pairs.
"""

from __future__ import annotations

from fractions import Fraction


def _mono_mul(m1, m2):
    powers = dict(m1)
    for name, p in m2:
        powers[name] = powers.get(name, 0) + p
    return tuple(sorted(powers.items()))


class Poly:
    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for mono, c in (terms or {}).items():
            if type(c) is not Fraction:
                c = Fraction(c)
            if c:
                clean[mono] = clean.get(mono, 0) + c
        self.terms = {m: c for m, c in clean.items() if c}

    @classmethod
    def const(cls, c):
        return cls({(): c})

    @classmethod
    def symbol(cls, name: str):
        return cls({((name, 1),): 1})

    @classmethod
    def coerce(cls, x):
        if isinstance(x, Poly):
            return x
        return cls.const(x)

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    def __add__(self, other):
        other = Poly.coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-Poly.coerce(other))

    def __rsub__(self, other):
        return Poly.coerce(other) - self

    def __mul__(self, other):
        other = Poly.coerce(other)
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        try:
            other = Poly.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for mono in sorted(self.terms, key=lambda m: (sum(p for _, p in m), m)):
            c = self.terms[mono]
            body = "*".join(n if p == 1 else f"{n}^{p}" for n, p in mono)
            if not body:
                parts.append(str(c))
            elif c == 1:
                parts.append(body)
            elif c == -1:
                parts.append("-" + body)
            else:
                parts.append(f"{c}*{body}")
        return " + ".join(parts).replace("+ -", "- ")

    __repr__ = __str__

    def to_json(self):
        return [[[list(x) for x in m], str(c)] for m, c in sorted(self.terms.items())]

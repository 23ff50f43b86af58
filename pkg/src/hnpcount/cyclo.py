"""Exact arithmetic in cyclotomic fields, enough for character sums.

An element is a finite sum of rational multiples of roots of unity
exp(2 pi i r) with r a rational phase in [0, 1). Equality is decided by
reducing modulo the cyclotomic polynomial of the common level.
"""

from __future__ import annotations

import cmath
from fractions import Fraction
from functools import lru_cache
from math import gcd, pi

from sympy import Poly, cyclotomic_poly, symbols

_z = symbols("z")


@lru_cache(maxsize=None)
def _cyclotomic_coeffs(n: int) -> tuple:
    """Coefficients of Phi_n, lowest degree first."""
    return tuple(int(c) for c in reversed(Poly(cyclotomic_poly(n, _z), _z).all_coeffs()))


def _phase(r) -> Fraction:
    r = Fraction(r)
    return r - (r.numerator // r.denominator)


class Cyclo:
    """Immutable element of Q(mu_infinity)."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for ph, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                ph = _phase(ph)
                v = clean.get(ph, 0) + c
                if v:
                    clean[ph] = v
                else:
                    clean.pop(ph, None)
        self.terms = clean

    @classmethod
    def root(cls, phase, coeff=1) -> "Cyclo":
        return cls({phase: coeff})

    @classmethod
    def rational(cls, c) -> "Cyclo":
        return cls({Fraction(0): c})

    def __add__(self, other):
        other = _coerce(other)
        t = dict(self.terms)
        for ph, c in other.terms.items():
            t[ph] = t.get(ph, 0) + c
        return Cyclo(t)

    __radd__ = __add__

    def __neg__(self):
        return Cyclo({ph: -c for ph, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        t = {}
        for p1, c1 in self.terms.items():
            for p2, c2 in other.terms.items():
                ph = _phase(p1 + p2)
                t[ph] = t.get(ph, 0) + c1 * c2
        return Cyclo(t)

    __rmul__ = __mul__

    def conjugate(self) -> "Cyclo":
        return Cyclo({-ph: c for ph, c in self.terms.items()})

    def level(self) -> int:
        n = 1
        for ph in self.terms:
            d = ph.denominator
            n = n * d // gcd(n, d)
        return n

    def reduced(self, n: int | None = None) -> tuple:
        """Canonical coefficient vector modulo Phi_n (n defaults to the level)."""
        n = self.level() if n is None else n
        poly = [Fraction(0)] * n
        for ph, c in self.terms.items():
            k = ph * n
            if k.denominator != 1:
                raise ValueError("level too small for this element")
            poly[int(k)] += c
        phi = _cyclotomic_coeffs(n)
        deg = len(phi) - 1
        for k in range(n - 1, deg - 1, -1):
            c = poly[k]
            if c:
                for j, a in enumerate(phi):
                    poly[k - deg + j] -= c * a
        return tuple(poly[:deg])

    def is_zero(self) -> bool:
        return not self.terms or not any(self.reduced())

    def __eq__(self, other):
        try:
            other = _coerce(other)
        except TypeError:
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        raise TypeError("Cyclo is not hashable")

    def to_fraction(self) -> Fraction:
        """The rational value, or ValueError if the element is not rational."""
        if not self.terms:
            return Fraction(0)
        red = self.reduced()
        if any(red[1:]):
            raise ValueError("not a rational number")
        return red[0]

    def is_rational(self) -> bool:
        try:
            self.to_fraction()
        except ValueError:
            return False
        return True

    def __complex__(self):
        return sum((float(c) * cmath.exp(2j * pi * float(ph)) for ph, c in self.terms.items()), 0j)

    def __repr__(self):
        return f"Cyclo({dict(sorted(self.terms.items()))})"


def _coerce(x) -> Cyclo:
    if isinstance(x, Cyclo):
        return x
    if isinstance(x, (int, Fraction)):
        return Cyclo.rational(x)
    raise TypeError(f"cannot use {type(x).__name__} as a cyclotomic number")

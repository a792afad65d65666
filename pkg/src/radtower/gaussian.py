"""Exact Gaussian rational arithmetic.

Coefficients throughout the package live in Q(i), represented as a pair of
`fractions.Fraction` values.  Values are immutable; arithmetic never leaves
the exact field.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt

_F0 = Fraction(0)
_F1 = Fraction(1)


class GaussianRational:
    """A complex number re + im*i with exact rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    # -- constructors -------------------------------------------------

    @staticmethod
    def from_int(n: int) -> "GaussianRational":
        return GaussianRational(Fraction(n), _F0)

    # -- predicates ---------------------------------------------------

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def is_one(self) -> bool:
        return self.re == _F1 and not self.im

    def is_rational(self) -> bool:
        return not self.im

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other: "GaussianRational") -> "GaussianRational":
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b and not d:
            return GaussianRational(a * c, _F0)
        return GaussianRational(a * c - b * d, a * d + b * c)

    def __truediv__(self, other: "GaussianRational") -> "GaussianRational":
        c, d = other.re, other.im
        if not d:
            if not c:
                raise ZeroDivisionError("division by zero GaussianRational")
            return GaussianRational(self.re / c, self.im / c)
        n = c * c + d * d
        a, b = self.re, self.im
        return GaussianRational((a * c + b * d) / n, (b * c - a * d) / n)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm(self) -> Fraction:
        """re^2 + im^2 (the field norm down to Q)."""
        return self.re * self.re + self.im * self.im

    def __eq__(self, other) -> bool:
        if not isinstance(other, GaussianRational):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    # -- ordering convention -------------------------------------------
    # "positive" means re > 0, or re == 0 and im > 0; used to normalize
    # leading coefficients deterministically (only the units +-1 are used).

    def is_negative_convention(self) -> bool:
        if self.re:
            return self.re < 0
        return self.im < 0

    # -- rendering ------------------------------------------------------

    def render(self) -> str:
        """Canonical text form: 3, -1/2, i, -2*i, (1+2*i), (1/2-3*i)."""
        re, im = self.re, self.im
        if not im:
            return str(re)
        if not re:
            if im == 1:
                return "i"
            if im == -1:
                return "-i"
            return f"{im}*i"
        sign = "+" if im > 0 else "-"
        a = abs(im)
        istr = "i" if a == 1 else f"{a}*i"
        return f"({re}{sign}{istr})"

    def __repr__(self):
        return f"GaussianRational({self.re!r}, {self.im!r})"


GR_ZERO = GaussianRational(_F0, _F0)
GR_ONE = GaussianRational(_F1, _F0)
GR_I = GaussianRational(_F0, _F1)
GR_MINUS_ONE = GaussianRational(Fraction(-1), _F0)


def fraction_sqrt(q: Fraction):
    """Exact square root of a nonnegative rational, or None."""
    if q < 0:
        return None
    if not q:
        return Fraction(0)
    rn, rd = isqrt(q.numerator), isqrt(q.denominator)
    if rn * rn == q.numerator and rd * rd == q.denominator:
        return Fraction(rn, rd)
    return None


def fraction_nth_root(q: Fraction, n: int):
    """Exact real n-th root of a rational, or None.

    Even n requires q >= 0; odd n passes the sign through.
    """
    if n == 1:
        return q
    neg = q < 0
    if neg and n % 2 == 0:
        return None
    a = abs(q)
    rn = round(a.numerator ** (1.0 / n))
    rd = round(a.denominator ** (1.0 / n))
    for dn in (rn - 1, rn, rn + 1):
        for dd in (rd - 1, rd, rd + 1):
            if dn > 0 and dd > 0 and dn**n == a.numerator and dd**n == a.denominator:
                r = Fraction(dn, dd)
                return -r if neg else r
    return None


def gaussian_sqrt(c: GaussianRational):
    """Exact square root inside Q(i), or None if it does not exist there.

    For c = x + y*i a root u + v*i needs u^2 - v^2 = x, 2uv = y; the norm
    x^2 + y^2 must be a rational square N^2, then u^2 = (x+N)/2.
    """
    if not c:
        return GR_ZERO
    if not c.im:
        x = c.re
        if x > 0:
            r = fraction_sqrt(x)
            return GaussianRational(r, _F0) if r is not None else None
        r = fraction_sqrt(-x)
        return GaussianRational(_F0, r) if r is not None else None
    n = fraction_sqrt(c.norm())
    if n is None:
        return None
    u2 = (c.re + n) / 2
    u = fraction_sqrt(u2)
    if u is None or not u:
        return None
    v = c.im / (2 * u)
    cand = GaussianRational(u, v)
    return cand if cand * cand == c else None


def gaussian_nth_root(c: GaussianRational, n: int):
    """An exact n-th root of c inside Q(i), or None.

    Handles what the factorizer needs: rational radicands with real roots,
    -|q| with n = 2 (root i*sqrt(|q|)), and Gaussian square roots.
    """
    if n == 1:
        return c
    if not c:
        return GR_ZERO
    if n == 2:
        return gaussian_sqrt(c)
    if c.im:
        return None
    r = fraction_nth_root(c.re, n)
    if r is not None:
        return GaussianRational(r, _F0)
    if n % 4 == 2:
        # (i*s)^n = i^n * s^n = -s^n for n = 2 mod 4
        r = fraction_nth_root(-c.re, n)
        if r is not None:
            return GaussianRational(_F0, r)
    return None

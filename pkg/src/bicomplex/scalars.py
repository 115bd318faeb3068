"""Exact arithmetic over the Gaussian rationals Q(i).

Every quantity in this package is a Scalar: a complex number a+b*i whose
real and imaginary parts are arbitrary-precision rationals.  There is no
floating-point mode anywhere; equality of scalars is exact equality.
"""

from __future__ import annotations

import re as _re
from fractions import Fraction

__all__ = ["Scalar", "ZERO", "ONE", "I", "sc"]

_F0 = Fraction(0)
_F1 = Fraction(1)


class Scalar:
    """A Gaussian rational re + im*i with exact Fraction components.

    The nz slot caches truthiness so that the dense linear algebra can
    test for zero without re-entering Fraction.__bool__.
    """

    __slots__ = ("re", "im", "nz")

    def __init__(self, re=0, im=0):
        self.re = re if type(re) is Fraction else Fraction(re)
        self.im = im if type(im) is Fraction else Fraction(im)
        self.nz = bool(self.re) or bool(self.im)

    # -- predicates ---------------------------------------------------

    def is_zero(self):
        return not self.nz

    def is_one(self):
        return self.re == _F1 and not self.im

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if not self.nz:
            return other
        if not other.nz:
            return self
        return Scalar(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if not other.nz:
            return self
        return Scalar(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return _coerce(other).__sub__(self)

    def __neg__(self):
        if not self.nz:
            return self
        return Scalar(-self.re, -self.im)

    def __mul__(self, other):
        other = _coerce(other)
        if not (self.nz and other.nz):
            return ZERO
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b and not d:
            return Scalar(a * c, _F0)
        return Scalar(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def inv(self):
        a, b = self.re, self.im
        if not b:
            if not a:
                raise ZeroDivisionError("inverse of zero Scalar")
            return Scalar(1 / a, _F0)
        n = a * a + b * b
        return Scalar(a / n, -b / n)

    def __truediv__(self, other):
        return self * _coerce(other).inv()

    def __rtruediv__(self, other):
        return _coerce(other) * self.inv()

    def conj(self):
        if not self.im:
            return self
        return Scalar(self.re, -self.im)

    def norm2(self):
        """|z|^2 = re^2 + im^2, an exact nonnegative rational."""
        return self.re * self.re + self.im * self.im

    # -- comparison / hashing ------------------------------------------

    def __eq__(self, other):
        if isinstance(other, Scalar):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.re == other and not self.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return self.nz

    # -- text form ------------------------------------------------------
    #
    # Canonical text form used in all files: "a/b" for real values and
    # "a/b+c/d*i" (sign of the imaginary part embedded) otherwise.
    # Denominators equal to 1 are omitted.  parse(str(x)) == x exactly.

    def __str__(self):
        if not self.im:
            return _fstr(self.re)
        sign = "+" if self.im > 0 else "-"
        return "%s%s%s*i" % (_fstr(self.re), sign, _fstr(abs(self.im)))

    def __repr__(self):
        return "Scalar(%s)" % self

    @staticmethod
    def parse(text: str) -> "Scalar":
        """Parse the canonical text form (and common variants like "i", "-2*i")."""
        s = text.strip().replace(" ", "")
        if not s:
            raise ValueError("empty scalar literal")
        m = _RX_FULL.match(s)
        if not m or (m.group("re") is None and m.group("im") is None):
            raise ValueError("bad scalar literal: %r" % text)
        re_part = m.group("re")
        re_val = Fraction(re_part) if re_part else _F0
        if m.group("im") is None:
            return Scalar(re_val, _F0)
        sign = -1 if m.group("isign") == "-" else 1
        coef = m.group("icoef")
        im_val = Fraction(coef) if coef else _F1
        return Scalar(re_val, sign * im_val)


def _fstr(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else "%d/%d" % (f.numerator, f.denominator)


# "a/b", "a/b+c/d*i", "i", "-i", "c*i", "-c/d*i" ...
_RX_FULL = _re.compile(
    r"^(?P<re>[+-]?\d+(?:/\d+)?)?"
    r"(?P<im>(?P<isign>[+-]?)(?:(?P<icoef>\d+(?:/\d+)?)\*?)?i)?$"
)


def _coerce(x) -> Scalar:
    if isinstance(x, Scalar):
        return x
    if isinstance(x, (int, Fraction)):
        return Scalar(x)
    raise TypeError("cannot coerce %r to Scalar" % (x,))


def sc(x, y=0) -> Scalar:
    """Convenience constructor: sc(2), sc("1/2+3*i"), sc(Fraction(1,3), 2)."""
    if isinstance(x, str):
        if y:
            raise ValueError("string form takes no imaginary argument")
        return Scalar.parse(x)
    if isinstance(x, Scalar):
        return x
    return Scalar(x, y)


ZERO = Scalar(0)
ONE = Scalar(1)
I = Scalar(0, 1)

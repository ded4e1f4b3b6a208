"""Exact base-field arithmetic: the rationals, or a prime field F_p.

Scalars are plain ``Fraction`` values in characteristic 0 and ints in
``range(p)`` in characteristic p; a ``Field`` instance mediates all
arithmetic so that every computation in the toolkit stays exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import FieldError


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class Field:
    """The rationals (``char == 0``) or the prime field F_char."""

    char: int = 0

    def __post_init__(self):
        if self.char != 0 and not _is_prime(self.char):
            raise FieldError("field characteristic must be 0 or a prime, got %r" % (self.char,))

    @property
    def zero(self):
        return Fraction(0) if self.char == 0 else 0

    @property
    def one(self):
        return Fraction(1) if self.char == 0 else 1

    def scalar(self, num, den=1):
        """Coerce an integer (pair) or Fraction into a field scalar."""
        if isinstance(num, float) or isinstance(den, float):
            raise FieldError("floating point scalars are not allowed")
        if self.char == 0:
            if den == 1 and type(num) is Fraction:
                return num
            return Fraction(num, den)
        if isinstance(num, Fraction):
            num, den = num.numerator, num.denominator * den
        num = int(num)
        den = int(den)
        if den % self.char == 0:
            raise FieldError("denominator %d is not invertible mod %d" % (den, self.char))
        return (num * pow(den, -1, self.char)) % self.char

    def add(self, a, b):
        return a + b if self.char == 0 else (a + b) % self.char

    def sub(self, a, b):
        return a - b if self.char == 0 else (a - b) % self.char

    def neg(self, a):
        return -a if self.char == 0 else (-a) % self.char

    def mul(self, a, b):
        return a * b if self.char == 0 else (a * b) % self.char

    def inv(self, a):
        if self.is_zero(a):
            raise FieldError("division by zero")
        return 1 / a if self.char == 0 else pow(a, -1, self.char)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def is_zero(self, a) -> bool:
        return a == 0

    def parse(self, text: str):
        """Parse ``"3"``, ``"-2"`` or ``"a/b"`` into a scalar."""
        text = text.strip()
        if "/" in text:
            num_s, den_s = text.split("/", 1)
            try:
                return self.scalar(int(num_s), int(den_s))
            except ValueError:
                raise FieldError("bad scalar literal %r" % text) from None
        try:
            return self.scalar(int(text))
        except ValueError:
            raise FieldError("bad scalar literal %r" % text) from None

    def format(self, a) -> str:
        if self.char == 0 and a.denominator != 1:
            return "%d/%d" % (a.numerator, a.denominator)
        return str(int(a))

    def nonzero_elements(self, limit=64):
        """Iterate the nonzero elements of F_p (all of them for small p).

        Over the rationals this is meaningless and raises.
        """
        if self.char == 0:
            raise FieldError("the rationals have infinitely many nonzero elements")
        for a in range(1, min(self.char, limit + 1)):
            yield a

    def nth_root(self, a, n: int):
        """An exact n-th root of ``a`` in the field, or None."""
        if n == 0:
            return self.one if a == self.one else None
        if n < 0:
            r = self.nth_root(a, -n)
            return None if r is None or self.is_zero(r) else self.inv(r)
        if self.char != 0:
            for x in range(1, self.char):
                if pow(x, n, self.char) == a:
                    return x
            return None
        if a == 0:
            return Fraction(0)
        sign = 1
        if a < 0:
            if n % 2 == 0:
                return None
            sign = -1
            a = -a
        num = _int_nth_root(a.numerator, n)
        den = _int_nth_root(a.denominator, n)
        if num is None or den is None:
            return None
        return Fraction(sign * num, den)


def _int_nth_root(m: int, n: int):
    """Exact integer n-th root of m >= 0, or None."""
    if m in (0, 1):
        return m
    lo, hi = 1, 1
    while hi ** n < m:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if mid ** n < m:
            lo = mid + 1
        else:
            hi = mid
    return lo if lo ** n == m else None


RATIONALS = Field(0)

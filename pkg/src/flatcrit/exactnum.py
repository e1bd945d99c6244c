"""Exact arithmetic in Q and real quadratic fields Q(sqrt(D)).

Rationals are :class:`fractions.Fraction`.  :class:`QuadNum` holds
``a + b*sqrt(D)`` with rational ``a``, ``b`` and a square-free ``D >= 0``.
Signs and comparisons are decided exactly, never through floating point.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import lru_cache
from numbers import Rational as _RationalABC

__all__ = [
    "Fraction",
    "QuadNum",
    "FieldMismatch",
    "ZeroDivisor",
    "qn_arith",
    "qn_sign",
    "qn_to_real",
    "parse_number",
    "format_number",
    "to_exact",
    "sign",
    "is_exact",
]


class FieldMismatch(ValueError):
    """Operands live in different quadratic fields."""

    def __init__(self, d1: int, d2: int):
        super().__init__(f"field mismatch: sqrt({d1}) vs sqrt({d2})")


class ZeroDivisor(ZeroDivisionError):
    def __init__(self):
        super().__init__("zero divisor")


@lru_cache(maxsize=None)
def _squarefree(n: int) -> bool:
    if n < 2:
        return n == 0
    f = 2
    while f * f <= n:
        if n % (f * f) == 0:
            return False
        f += 1
    return True


def _sign_frac(x: Fraction) -> int:
    return (x > 0) - (x < 0)


class QuadNum:
    """An element ``a + b*sqrt(D)`` of Q(sqrt(D)).

    Instances are immutable.  ``D = 0`` denotes plain rationals; in that
    case ``b`` is always zero.  Integers and Fractions combine freely with
    any field; two QuadNums must share ``D`` unless one of them has ``D = 0``
    and ``b = 0`` (a rational).
    """

    __slots__ = ("a", "b", "D")

    def __init__(self, a=0, b=0, D: int = 0):
        D = int(D)
        if D < 0 or not _squarefree(D):
            raise ValueError(f"D must be a non-negative square-free integer other than 1, got {D}")
        a = a if type(a) is Fraction else Fraction(a)
        b = b if type(b) is Fraction else Fraction(b)
        if D == 0 and b:
            raise ValueError("D = 0 forces b = 0")
        self.a = a
        self.b = b
        self.D = D

    @classmethod
    def _raw(cls, a: Fraction, b: Fraction, D: int) -> "QuadNum":
        obj = object.__new__(cls)
        obj.a = a
        obj.b = b
        obj.D = D
        return obj

    # -- coercion -----------------------------------------------------
    def _coerce(self, other):
        """Return (a, b, D) of ``other`` in this field, or None if foreign."""
        if isinstance(other, QuadNum):
            if other.D == self.D:
                return other.a, other.b, self.D
            if other.D == 0 or not other.b:
                return other.a, Fraction(0), self.D
            if self.D == 0 or not self.b:
                return other.a, other.b, other.D
            raise FieldMismatch(self.D, other.D)
        if isinstance(other, (int, Fraction)) or isinstance(other, _RationalABC):
            return Fraction(other), Fraction(0), self.D
        return None

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        if isinstance(other, float):
            return float(self) + other
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        a, b, D = c
        return QuadNum._raw(self.a + a, self.b + b, D)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, float):
            return float(self) - other
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        a, b, D = c
        return QuadNum._raw(self.a - a, self.b - b, D)

    def __rsub__(self, other):
        if isinstance(other, float):
            return other - float(self)
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        a, b, D = c
        return QuadNum._raw(a - self.a, b - self.b, D)

    def __neg__(self):
        return QuadNum._raw(-self.a, -self.b, self.D)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, float):
            return float(self) * other
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        a, b, D = c
        sa, sb = self.a, self.b
        if not b:
            return QuadNum._raw(sa * a, sb * a, D)
        if not sb:
            return QuadNum._raw(sa * a, sa * b, D)
        return QuadNum._raw(sa * a + sb * b * D, sa * b + sb * a, D)

    __rmul__ = __mul__

    def inverse(self) -> "QuadNum":
        if not self.b:
            if not self.a:
                raise ZeroDivisor()
            return QuadNum._raw(1 / self.a, Fraction(0), self.D)
        n = self.a * self.a - self.b * self.b * self.D
        # n != 0 because D is not a perfect square
        return QuadNum._raw(self.a / n, -self.b / n, self.D)

    def __truediv__(self, other):
        if isinstance(other, float):
            return float(self) / other
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        a, b, D = c
        if not b:
            if not a:
                raise ZeroDivisor()
            return QuadNum._raw(self.a / a, self.b / a, D)
        return self * QuadNum._raw(a, b, D).inverse()

    def __rtruediv__(self, other):
        if isinstance(other, float):
            return other / float(self)
        c = self._coerce(other)
        if c is None:
            return NotImplemented
        a, b, D = c
        return QuadNum._raw(a, b, D) * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = QuadNum._raw(Fraction(1), Fraction(0), self.D)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- comparison ---------------------------------------------------
    def sign(self) -> int:
        a, b = self.a, self.b
        if not b:
            return _sign_frac(a)
        sb = 1 if b > 0 else -1
        if not a:
            return sb
        sa = 1 if a > 0 else -1
        if sa == sb:
            return sa
        # opposite signs: compare a^2 with b^2 D
        lhs = a * a
        rhs = b * b * self.D
        if lhs > rhs:
            return sa
        return sb  # lhs == rhs impossible for square-free D > 1

    def conjugate(self) -> "QuadNum":
        return QuadNum._raw(self.a, -self.b, self.D)

    def __eq__(self, other):
        if isinstance(other, QuadNum):
            if self.b or other.b:
                return self.D == other.D and self.a == other.a and self.b == other.b
            return self.a == other.a
        if isinstance(other, (int, Fraction)):
            return not self.b and self.a == other
        if isinstance(other, float):
            return float(self) == other
        return NotImplemented

    def __hash__(self):
        if not self.b:
            return hash(self.a)
        return hash((self.a, self.b, self.D))

    def _cmp(self, other) -> int:
        if isinstance(other, float):
            x = float(self)
            return (x > other) - (x < other)
        return (self - other).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- conversion ---------------------------------------------------
    def __float__(self) -> float:
        return qn_to_real(self)

    def is_rational(self) -> bool:
        return not self.b

    def __repr__(self):
        return f"QuadNum({self.a!s}, {self.b!s}, D={self.D})"

    def __str__(self):
        return format_number(self)


def qn_arith(x: QuadNum, y: QuadNum, op: str) -> QuadNum:
    """Field operation ``op`` in {'add', 'sub', 'mul', 'div'}.

    Unlike the operators, this refuses to lift a rational into a foreign
    field: both operands must carry the same ``D``.
    """
    x = x if isinstance(x, QuadNum) else QuadNum(x)
    y = y if isinstance(y, QuadNum) else QuadNum(y)
    if x.D != y.D:
        raise FieldMismatch(x.D, y.D)
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "div":
        return x / y
    raise ValueError(f"unknown op {op!r}")


def qn_sign(x) -> int:
    """Exact sign (-1, 0, 1) of a QuadNum or rational."""
    if isinstance(x, QuadNum):
        return x.sign()
    return (x > 0) - (x < 0)


def _isqrt_q(r: Fraction) -> int:
    """floor(sqrt(r)) for rational r >= 0."""
    return math.isqrt(r.numerator // r.denominator)


def qn_to_real(x) -> float:
    """Binary64 value of ``x``, rounded to nearest (within 1 ulp).

    The value is computed as a scaled integer with at least 64 significant
    bits (exact integer square roots), then converted with a single
    correctly-rounded Fraction -> float step.  Cancellation between ``a``
    and ``b*sqrt(D)`` therefore does not lose precision.
    """
    if not isinstance(x, QuadNum):
        try:
            return float(x)
        except OverflowError as exc:
            raise OverflowError("magnitude overflow") from exc
    a, b, D = x.a, x.b, x.D
    if not b:
        try:
            return float(a)
        except OverflowError as exc:
            raise OverflowError("magnitude overflow") from exc
    r = b * b * D  # (b sqrt D)^2
    sb = 1 if b > 0 else -1
    rough = abs(float(a) if abs(a) < 1e300 else 1e300) + math.sqrt(float(min(r, Fraction(10) ** 600)))
    k = 64 - math.frexp(rough)[1] if rough > 0 else 64
    while True:
        root = _isqrt_q(r * Fraction(2) ** (2 * k))  # floor(|b| sqrt(D) 2^k)
        total = a * Fraction(2) ** k + sb * root
        n = math.floor(total)
        if abs(n).bit_length() >= 64:
            break
        k += 64 - abs(n).bit_length() + 8
    val = n / Fraction(2) ** k
    try:
        return float(val)
    except OverflowError as exc:
        raise OverflowError("magnitude overflow") from exc


def sign(x) -> int:
    """Sign of an exact number or a float."""
    if isinstance(x, QuadNum):
        return x.sign()
    return (x > 0) - (x < 0)


def is_exact(x) -> bool:
    return isinstance(x, (QuadNum, Fraction, int))


def to_exact(x, D: int = 0) -> QuadNum:
    if isinstance(x, QuadNum):
        if x.D != D and x.b:
            raise FieldMismatch(x.D, D)
        return QuadNum._raw(x.a, x.b, D)
    if isinstance(x, float):
        x = Fraction(x)
    return QuadNum._raw(Fraction(x), Fraction(0), D)


def parse_number(text: str, D: int | None = None) -> QuadNum:
    """Parse ``"p/q"`` or ``"p/q + r/s*sqrt(D)"`` (whitespace-insensitive).

    ``"sqrt(2)"``, ``"-1/2*sqrt(2)"`` and ``"3 - sqrt(2)"`` are accepted.  If
    ``D`` is given the result is placed in that field and a foreign radicand
    raises :class:`FieldMismatch`.
    """
    s = "".join(text.split())
    if not s:
        raise ValueError("empty number")
    m = re.fullmatch(
        r"(?P<a>[+-]?\d+(?:/\d+)?(?:\.\d+)?(?:[eE][+-]?\d+)?)?"
        r"(?:(?P<op>[+-])?(?P<b>\d+(?:/\d+)?)?\*?sqrt\((?P<D>\d+)\))?",
        s,
    )
    if m is None or (m.group("a") is None and m.group("D") is None):
        raise ValueError(f"cannot parse number {text!r}")
    a = Fraction(m.group("a")) if m.group("a") else Fraction(0)
    if m.group("D") is None:
        return QuadNum._raw(a, Fraction(0), D or 0)
    if m.group("a") is not None and m.group("op") is None:
        raise ValueError(f"cannot parse number {text!r}")
    b = Fraction(m.group("b")) if m.group("b") else Fraction(1)
    if m.group("op") == "-":
        b = -b
    Dn = int(m.group("D"))
    if D is not None and D != Dn:
        raise FieldMismatch(D, Dn)
    return QuadNum(a, b, Dn)


def format_number(x) -> str:
    """Canonical text form, inverse of :func:`parse_number`."""
    if isinstance(x, float):
        return repr(x)
    if not isinstance(x, QuadNum):
        return str(Fraction(x))
    if not x.b:
        return str(x.a)
    op = "+" if x.b > 0 else "-"
    return f"{x.a} {op} {abs(x.b)}*sqrt({x.D})"

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flatcrit.exactnum import (
    FieldMismatch,
    QuadNum,
    ZeroDivisor,
    format_number,
    parse_number,
    qn_to_real,
    sign,
    to_exact,
)

fracs = st.fractions(min_value=-1000, max_value=1000, max_denominator=1000)
radicands = st.sampled_from([2, 3, 5, 7])


@st.composite
def quads(draw, D=None):
    D = draw(radicands) if D is None else D
    return QuadNum(draw(fracs), draw(fracs), D)


def test_sqrt2_squares_to_two():
    r = QuadNum(0, 1, 2)
    assert r * r == 2
    assert (r * r).is_rational()


def test_golden_ratio_identity():
    phi = QuadNum(Fraction(1, 2), Fraction(1, 2), 5)
    assert phi * phi == phi + 1
    assert float(phi) == (1 + math.sqrt(5)) / 2


def test_mixing_fields_raises():
    with pytest.raises(FieldMismatch):
        QuadNum(0, 1, 2) + QuadNum(0, 1, 3)


def test_rationals_lift_into_any_field():
    assert QuadNum(1, 1, 2) + Fraction(1, 2) == QuadNum(Fraction(3, 2), 1, 2)
    assert QuadNum(3, 0, 0) + QuadNum(0, 1, 5) == QuadNum(3, 1, 5)


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        QuadNum(1, 1, 2) / QuadNum(0, 0, 2)
    with pytest.raises(ZeroDivisor):
        QuadNum(0, 0, 2).inverse()


def test_sign_near_cancellation():
    # Pell convergents p/q of sqrt 2 with p^2 - 2 q^2 = +-1; at this size the
    # difference is ~1e-40 and invisible to floats.  Oracle: the integer sign
    # of p^2 - 2 q^2.
    p, q = 1, 1
    for _ in range(60):
        p, q = p + 2 * q, p + q
        x = QuadNum(Fraction(p, q), -1, 2)
        expected = 1 if p * p - 2 * q * q > 0 else -1
        assert sign(x) == expected
    assert float(QuadNum(Fraction(p, q), -1, 2)) == 0.0 or abs(float(QuadNum(Fraction(p, q), -1, 2))) < 1e-40


def test_parse_and_format():
    assert parse_number("1/2 + 3/4*sqrt(5)") == QuadNum(Fraction(1, 2), Fraction(3, 4), 5)
    assert parse_number("-sqrt(2)") == QuadNum(0, -1, 2)
    assert parse_number("0.25") == Fraction(1, 4)
    with pytest.raises(FieldMismatch):
        parse_number("sqrt(3)", D=2)
    with pytest.raises(ValueError):
        parse_number("one half")


@given(quads(), quads())
def test_field_axioms(x, y):
    if x.D != y.D:
        y = QuadNum(y.a, y.b, x.D)
    assert x + y == y + x
    assert x * y == y * x
    assert (x + y) - y == x
    if sign(y) != 0:
        assert (x * y) / y == x


@given(quads(), quads(), quads())
def test_distributive(x, y, z):
    y, z = QuadNum(y.a, y.b, x.D), QuadNum(z.a, z.b, x.D)
    assert x * (y + z) == x * y + x * z


@settings(max_examples=300)
@given(quads())
def test_sign_agrees_with_float_when_well_separated(x):
    v = float(x.a) + float(x.b) * math.sqrt(x.D)
    if abs(v) > 1e-9 * (abs(float(x.a)) + abs(float(x.b)) * math.sqrt(x.D) + 1):
        assert sign(x) == (1 if v > 0 else -1)


@given(quads())
def test_to_real_is_correctly_rounded(x):
    f = qn_to_real(x)
    # exact comparison of the neighbouring floats with x
    lo, hi = math.nextafter(f, -math.inf), math.nextafter(f, math.inf)
    assert sign(x - Fraction(lo)) >= 0 or sign(x - Fraction(f)) < 0
    assert abs(Fraction(f) - Fraction(lo)) > 0
    d_here = abs(x - Fraction(f))
    for g in (lo, hi):
        assert sign(abs(x - Fraction(g)) - d_here) >= 0


@given(quads())
def test_format_round_trip(x):
    assert parse_number(format_number(x), x.D if x.b else None) == x


def test_to_exact():
    assert to_exact(0.5) == Fraction(1, 2)
    assert to_exact(3, 2) == QuadNum(3, 0, 2)

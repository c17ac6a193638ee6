from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from planeval.errors import DomainError, ParseError, ValidationError
from planeval.exactnum import (
    ContFrac,
    QuadIrr,
    ValElem,
    ceil_exact,
    cf_eval,
    cf_of,
    cf_of_quad,
    cf_of_rat,
    floor_exact,
    fmt_cf,
    fmt_exact,
    parse_cf,
    parse_rat,
    parse_real,
    quad,
    sqrt_rat,
    squarefree_split,
    to_decimal,
    valelem_cmp,
)

iv = mpmath.iv
iv.prec = 200

rats = st.fractions(min_value=-50, max_value=50, max_denominator=40)
radicands = st.integers(min_value=2, max_value=60)


@st.composite
def quads(draw, d=None):
    a = draw(rats)
    b = draw(rats.filter(lambda x: x != 0))
    return quad(a, b, draw(radicands) if d is None else d)


def interval(x):
    """200-bit enclosure of an exact value."""
    if isinstance(x, QuadIrr):
        return iv.mpf(x.a.numerator) / x.a.denominator + iv.mpf(x.b.numerator) / x.b.denominator * iv.sqrt(x.d)
    x = F(x)
    return iv.mpf(x.numerator) / x.denominator


def overlaps(i, j):
    return i.a <= j.b and j.a <= i.b


# ------------------------------------------------------------------ examples


def test_cf_eval_examples():
    assert cf_eval(parse_cf("[1; 2]")) == F(3, 2)
    assert cf_eval(parse_cf("[1; (1)]")) == quad(F(1, 2), F(1, 2), 5)
    assert cf_eval(parse_cf("[2; 3, 4]")) == F(30, 13)


def test_cf_eval_rejects_zero_in_period():
    with pytest.raises(ValidationError):
        cf_eval(ContFrac((1,), (0, 2)))


def test_cf_of_rat_examples():
    assert cf_of_rat(F(3, 2)) == ContFrac((1, 2))
    assert cf_of_rat(F(4)) == ContFrac((4,))
    assert cf_of_rat(F(30, 13)) == ContFrac((2, 3, 4))


def test_cf_of_rat_below_one():
    with pytest.raises(DomainError):
        cf_of_rat(F(1, 2))


def test_valelem_cmp_examples():
    phi = quad(F(1, 2), F(1, 2), 5)
    assert valelem_cmp(ValElem(3), ValElem(2)) == 1
    assert valelem_cmp(ValElem(0, 2, phi), ValElem(3)) == 1
    assert valelem_cmp(ValElem(1, 1, phi), ValElem(1, 1, phi)) == 0


def test_valelem_mismatched_gamma():
    with pytest.raises(DomainError):
        valelem_cmp(ValElem(0, 1, quad(0, 1, 2)), ValElem(0, 1, quad(0, 1, 3)))


def test_valelem_text():
    g = quad(0, 1, 2)
    assert str(ValElem(1, 1, g)) == "1+1*gamma"
    assert str(ValElem(2, -3, g)) == "2-3*gamma"
    assert str(ValElem(7)) == "7"


def test_quad_canonical_form():
    assert quad(1, 2, 8) == QuadIrr(F(1), F(4), 2)
    assert quad(1, 3, 9) == F(10)
    assert quad(5, 0, 7) == F(5)
    assert squarefree_split(72) == (6, 2)


def test_sqrt_rat():
    assert sqrt_rat(F(9, 4)) == F(3, 2)
    assert sqrt_rat(2) == quad(0, 1, 2)
    with pytest.raises(DomainError):
        sqrt_rat(-1)


def test_floor_and_ceil():
    assert floor_exact(quad(0, 1, 2)) == 1
    assert ceil_exact(quad(0, 1, 2)) == 2
    assert floor_exact(quad(0, -1, 2)) == -2
    assert floor_exact(F(-3, 2)) == -2
    assert ceil_exact(F(4)) == 4


def test_to_decimal():
    assert to_decimal(100 / sqrt_rat(9999)) == "1.000050003750"
    assert to_decimal(F(1, 3), 4) == "0.3333"
    assert to_decimal(F(2, 3), 4) == "0.6667"
    assert to_decimal(F(-1, 8), 2) == "-0.12"  # ties go toward +infinity


def test_text_encodings():
    assert fmt_exact(quad(1, -2, 3)) == "1 - 2*sqrt(3)"
    assert fmt_exact(quad(0, 3, 5)) == "3*sqrt(5)"
    assert fmt_exact(F(-7, 2)) == "-7/2"
    assert parse_rat("-7/2") == F(-7, 2)
    assert parse_real("1 + 1/2*sqrt(8)") == quad(1, 1, 2)
    assert parse_real("[1; (2)]") == quad(0, 1, 2)
    assert fmt_cf(cf_of_quad(quad(0, 1, 2))) == "[1; (2)]"
    assert fmt_cf(parse_cf("[(1, 2)]")) == "[(1, 2)]"


@pytest.mark.parametrize("text", ["[1; 2", "1/0", "abc", "[1; (2, x)]"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_real(text)


# ---------------------------------------------------------------- properties


@given(quads(), quads(d=None), st.sampled_from(["+", "-", "*", "/"]))
def test_arithmetic_matches_interval_oracle(x, y, op):
    if isinstance(y, QuadIrr) and isinstance(x, QuadIrr) and x.d != y.d:
        y = quad(y.a, y.b, x.d)
    exact = {"+": lambda: x + y, "-": lambda: x - y, "*": lambda: x * y, "/": lambda: x / y}[op]
    ix, iy = interval(x), interval(y)
    approx = {"+": ix + iy, "-": ix - iy, "*": ix * iy, "/": ix / iy}[op]
    assert overlaps(interval(exact()), approx)


@given(quads(), rats)
def test_comparison_matches_interval_oracle(x, r):
    diff = interval(x) - interval(r)
    assume(not (diff.a <= 0 <= diff.b))
    assert (x > r) == (diff.a > 0)
    assert (x < r) == (diff.b < 0)


@given(quads())
def test_floor_matches_interval_oracle(x):
    i = interval(x)
    assert mpmath.floor(i.a) == floor_exact(x) == mpmath.floor(i.b)


@given(st.fractions(min_value=1, max_value=500, max_denominator=200))
def test_cf_roundtrip_rational(x):
    cf = cf_of_rat(x)
    assert cf_eval(cf) == x
    assert cf_of_rat(cf_eval(cf)) == cf
    assert parse_cf(fmt_cf(cf)) == cf


@given(st.lists(st.integers(1, 9), min_size=0, max_size=3), st.lists(st.integers(1, 9), min_size=1, max_size=3))
def test_cf_roundtrip_periodic(pre, period):
    cf = ContFrac(tuple([1] + pre), tuple(period))
    value = cf_eval(cf)
    assert isinstance(value, QuadIrr)
    assert cf_eval(cf_of(value)) == value
    head = cf_eval(ContFrac(tuple(cf.quotients(40))))
    assert abs(interval(value) - interval(head)).b < mpmath.mpf(10) ** -12


@given(quads())
def test_text_roundtrip(x):
    assert parse_real(fmt_exact(x)) == x


@given(st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20),
       st.integers(-20, 20), st.integers(-20, 20))
def test_valelem_order_is_translation_invariant(p1, q1, p2, q2, p3, q3):
    g = quad(F(1, 2), F(1, 2), 5)
    x, y, z = ValElem(p1, q1, g), ValElem(p2, q2, g), ValElem(p3, q3, g)
    assert valelem_cmp(x, y) == valelem_cmp(x + z, y + z)
    assert valelem_cmp(x, y) == -valelem_cmp(y, x)
    diff = interval(x.real()) - interval(y.real())
    if diff.a > 0:
        assert valelem_cmp(x, y) == 1
    elif diff.b < 0:
        assert valelem_cmp(x, y) == -1

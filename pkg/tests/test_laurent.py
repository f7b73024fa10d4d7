from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from troprefine.errors import ParseError
from troprefine.laurent import (
    ONE,
    ZERO,
    LaurentPoly,
    add,
    area_factor,
    eval_at,
    from_json,
    monomial,
    mul,
    parse,
    to_canonical_string,
    to_json,
)

from conftest import QUARTIC_VALUE_TEXT

polys = st.dictionaries(st.integers(-12, 12), st.integers(-9, 9), max_size=6).map(LaurentPoly)
nonzero_polys = polys.filter(lambda p: not p.is_zero())

q2_minus = monomial(1, 4) - monomial(1, -4)


def test_monomial_examples():
    assert monomial(1, 4) == LaurentPoly({4: 1})
    assert to_canonical_string(monomial(-2, -8)) == "-2*q^-4"
    assert monomial(0, 6) == ZERO
    assert monomial(0, 6).terms == {}


def test_add_examples():
    assert add(monomial(1, 4), monomial(-1, 4)) == ZERO
    assert add(q2_minus, monomial(1, 4) + monomial(1, -4)) == monomial(2, 4)
    assert add(q2_minus, ZERO) == q2_minus


def test_mul_examples():
    assert mul(q2_minus, q2_minus) == parse("q^4 - 2 + q^-4")
    assert to_canonical_string(mul(parse("q^4 - 2 + q^-4"), parse("q^4 + q^-4"))) == QUARTIC_VALUE_TEXT
    assert mul(q2_minus, ONE) == q2_minus


def test_area_factor_is_difference_of_monomials():
    assert area_factor(4) == q2_minus
    assert area_factor(-4) == -q2_minus


def test_eval_examples():
    assert eval_at(q2_minus, 1) == 0
    assert eval_at(q2_minus, 2) == Fraction(15, 4)
    assert eval_at(monomial(1, 1), 4) == 2
    with pytest.raises(ZeroDivisionError):
        eval_at(q2_minus, 0)


def test_canonical_strings():
    assert to_canonical_string(ZERO) == "0"
    assert to_canonical_string(monomial(3, 1)) == "3*q^1/2"
    assert to_canonical_string(parse(QUARTIC_VALUE_TEXT)) == QUARTIC_VALUE_TEXT


@pytest.mark.parametrize("bad", ["", "q^", "2q^3", "q^1/3", "3 +"])
def test_parse_rejects_garbage(bad):
    with pytest.raises(ParseError):
        parse(bad)


@given(polys, polys, polys)
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == ZERO


@given(polys)
def test_no_zero_coefficients_stored(p):
    assert all(c != 0 for _, c in p.items())
    keys = [h for h, _ in p.items()]
    assert keys == sorted(keys, reverse=True)


@given(polys)
def test_text_and_json_round_trip(p):
    assert parse(to_canonical_string(p)) == p
    assert from_json(to_json(p)) == p


@given(nonzero_polys, nonzero_polys)
def test_degree_additivity(a, b):
    assert (a * b).max_half_exponent() == a.max_half_exponent() + b.max_half_exponent()


@given(polys, st.integers(1, 6))
def test_evaluation_is_a_ring_map(p, n):
    r = p * p + p
    x = Fraction(n * n)
    assert eval_at(r, x) == eval_at(p, x) ** 2 + eval_at(p, x)


def test_inversion():
    p = parse("2*q^3 - q^-1/2 + 5")
    assert p.inverted() == parse("2*q^-3 - q^1/2 + 5")
    assert p.inverted().inverted() == p
    assert parse(QUARTIC_VALUE_TEXT).inverted() == parse(QUARTIC_VALUE_TEXT)

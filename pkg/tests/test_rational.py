from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from agraph.rational import (
    exact_decimal,
    format_value,
    freeze,
    is_terminating,
    normalize,
    product,
    rational_text,
    to_rational,
)


def test_floats_convert_through_their_decimal_repr():
    assert to_rational(0.1) == Fraction(1, 10)
    assert to_rational(93.841552734375) == Fraction(93841552734375, 10**12)


def test_integral_values_collapse_to_int():
    assert to_rational(Fraction(6, 3)) == 2
    assert type(to_rational(Fraction(6, 3))) is int
    assert type(to_rational(4.0)) is int
    assert to_rational(Decimal("2.50")) == Fraction(5, 2)
    assert to_rational("3/4") == Fraction(3, 4)


def test_booleans_and_garbage_are_rejected():
    with pytest.raises(TypeError):
        to_rational(True)
    with pytest.raises(TypeError):
        to_rational(object())


def test_normalize_recurses_and_freeze_hashes():
    v = normalize({"a": (1.5, [2.0, "x"]), "b": None})
    assert v == {"a": [Fraction(3, 2), [2, "x"]], "b": None}
    assert hash(freeze(v)) == hash(freeze(normalize({"b": None, "a": [1.5, [2, "x"]]})))


def test_product_of_empty_list_is_one():
    assert product([]) == 1
    assert product([2, Fraction(1, 2), 3]) == 3


@pytest.mark.parametrize(
    "q, text",
    [
        (Fraction(2, 3), "0.666667"),
        (1234567, "1234570"),
        (Fraction(1234565, 10**7), "0.123456"),  # half-even keeps the even digit
        (Fraction(1234575, 10**7), "0.123458"),
        (1234565, "1234560"),
        (Fraction(32, 5), "6.4"),
        (0, "0"),
        (Fraction(-1, 8), "-0.125"),
        (Fraction(1, 10**9), "0.000000001"),
    ],
)
def test_format_value_six_significant_digits(q, text):
    assert format_value(q) == text


def test_exact_decimal_and_terminating():
    assert exact_decimal(Fraction(93841552734375, 10**12)) == "93.841552734375"
    assert exact_decimal(Fraction(-3, 4)) == "-0.75"
    assert exact_decimal(12) == "12"
    assert is_terminating(Fraction(1, 80))
    assert not is_terminating(Fraction(1, 3))
    with pytest.raises(ValueError):
        exact_decimal(Fraction(1, 3))


@given(st.fractions(max_denominator=10**6))
def test_rational_text_round_trips(q):
    assert to_rational(rational_text(q)) == q


@given(st.integers(0, 10**6), st.integers(0, 12))
def test_exact_decimal_round_trips_terminating_values(n, k):
    q = Fraction(n, 2**k * 5 ** (k // 2))
    assert Fraction(exact_decimal(q)) == q

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from almostosc.numerics import (
    Mode,
    NumericOverflowError,
    OddRatio,
    odd_ratio_pow,
    odd_ratio_root,
    pos_pow,
    to_value,
)

ODD = st.integers(0, 4).map(lambda i: 2 * i + 1)
RATIOS = st.builds(OddRatio, ODD, ODD)
RATIONALS = st.fractions(min_value=-50, max_value=50, max_denominator=50)
FLOATS = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False).filter(lambda v: v == 0 or abs(v) > 1e-30)


def test_odd_ratio_normalizes():
    r = OddRatio(9, 3)
    assert (r.num, r.den) == (3, 1)
    assert OddRatio.parse("15/9") == OddRatio(5, 3)
    assert OddRatio.parse("5/3").value() == pytest.approx(5 / 3)
    assert str(OddRatio(7, 3)) == "7/3"


@pytest.mark.parametrize("bad", ["2", "1/2", "0", "-3", "4/6"])
def test_odd_ratio_rejects(bad):
    with pytest.raises(ValueError):
        OddRatio.parse(bad)


def test_odd_ratio_ordering():
    assert OddRatio(5) > OddRatio(3) >= 1
    assert OddRatio(1, 3) < 1


@pytest.mark.parametrize(
    "x, rho, expected",
    [
        (Fraction(2), OddRatio(3), Fraction(8)),
        (Fraction(-8), OddRatio(1, 3), Fraction(-2)),
        (Fraction(-1), OddRatio(5, 3), Fraction(-1)),
        (Fraction(-27, 8), OddRatio(1, 3), Fraction(-3, 2)),
    ],
)
def test_pow_examples(x, rho, expected):
    got = odd_ratio_pow(x, rho)
    assert isinstance(got, Fraction)
    assert got == expected


@pytest.mark.parametrize(
    "u, rho, expected",
    [(Fraction(8), OddRatio(3), Fraction(2)), (Fraction(-1), OddRatio(3), Fraction(-1)),
     (Fraction(27), OddRatio(3), Fraction(3))],
)
def test_root_examples(u, rho, expected):
    assert 3 ** 3 == 27
    assert odd_ratio_root(u, rho) == expected


def test_irrational_root_falls_back_to_float():
    got = odd_ratio_root(Fraction(2), OddRatio(3))
    assert isinstance(got, float)
    assert got ** 3 == pytest.approx(2.0)


def test_float_mode_values():
    assert odd_ratio_pow(-8.0, OddRatio(1, 3)) == pytest.approx(-2.0)
    assert odd_ratio_pow(0.0, OddRatio(5, 3)) == 0.0


def test_overflow_is_reported():
    with pytest.raises(NumericOverflowError):
        odd_ratio_pow(1e200, OddRatio(3))
    with pytest.raises(NumericOverflowError):
        pos_pow(Fraction(10) ** 400, Fraction(1, 3))


def test_big_integers_stay_exact():
    x = Fraction(10**30 + 7, 3)
    assert odd_ratio_root(odd_ratio_pow(x, OddRatio(3)), OddRatio(3)) == x


def test_to_value():
    assert to_value("1/2") == Fraction(1, 2)
    assert to_value("0.25", Mode.FLOAT) == 0.25
    assert to_value(0.5) == Fraction(1, 2)


@given(RATIONALS, RATIOS)
def test_odd_symmetry_exact(x, rho):
    a, b = odd_ratio_pow(-x, rho), odd_ratio_pow(x, rho)
    if isinstance(a, Fraction):
        assert a == -b
    else:
        assert a == pytest.approx(-b, rel=1e-12, abs=1e-300)


@given(FLOATS, RATIOS)
def test_odd_symmetry_float(x, rho):
    assert odd_ratio_pow(-x, rho) == pytest.approx(-odd_ratio_pow(x, rho), rel=1e-12, abs=0)


@given(FLOATS, FLOATS, RATIOS)
def test_monotone(x, y, rho):
    if x == y:
        return
    lo, hi = min(x, y), max(x, y)
    # strict in exact arithmetic; floats may round two close inputs together
    assert odd_ratio_pow(Fraction(lo), rho) < odd_ratio_pow(Fraction(hi), rho)
    assert odd_ratio_pow(lo, rho) <= odd_ratio_pow(hi, rho)


@given(FLOATS, RATIOS)
def test_inversion_float(x, rho):
    back = odd_ratio_root(odd_ratio_pow(x, rho), rho)
    assert back == pytest.approx(x, rel=1e-10, abs=1e-300)


@given(RATIONALS, RATIOS)
def test_inversion_exact(x, rho):
    y = odd_ratio_pow(x, rho)
    back = odd_ratio_root(y, rho)
    if isinstance(y, Fraction) and isinstance(back, Fraction):
        assert back == x
    else:
        assert float(back) == pytest.approx(float(x), rel=1e-10, abs=1e-300)

from fractions import Fraction

import pytest

from qvoa.scalar import ONE, ZERO, QScalar, q_int, q_pow
from qvoa.series import (PowerSeries, SeriesError, exponent_series, pochhammer_expand,
                         pochhammer_expand_inverse, recognize_product, recognize_rational,
                         series_exp, series_log)

Q = q_pow(1)
N = 12


def geometric(c, order=N):
    return PowerSeries([c ** m for m in range(order + 1)])


def test_qint_small_values():
    assert q_int(0) == ZERO
    assert q_int(1) == ONE
    assert q_int(2) == Q + 1 / Q
    assert q_int(-3) == -q_int(3)


def test_reduced_after_arithmetic():
    x = (Q ** 2 - 1) / (Q - 1)
    assert x == Q + 1
    assert x.den.degree() == 0


def test_fractional_powers_combine():
    assert q_pow(Fraction(1, 2)) * q_pow(Fraction(1, 3)) == q_pow(Fraction(5, 6))
    assert q_pow(Fraction(1, 2)) ** 2 == Q


def test_text_round_trip():
    x = (Q ** 3 - 2 * q_pow(Fraction(1, 2))) / (1 + Q ** 2)
    assert QScalar.from_text(x.to_text()) == x


def test_division_by_zero_raises():
    with pytest.raises(ZeroDivisionError):
        ONE / ZERO


def test_exp_of_zero_is_one():
    assert series_exp(PowerSeries.zero(N)) == PowerSeries.one(N)


def test_exp_of_log_series():
    s = PowerSeries([0] + [Fraction(1, m) for m in range(1, N + 1)])
    assert series_exp(s) == geometric(ONE)
    assert series_exp(-s) == PowerSeries.from_polynomial([1, -1], N)


def test_log_inverts_exp():
    s = PowerSeries([0] + [Q ** m / m for m in range(1, N + 1)])
    assert series_log(series_exp(s)) == s


def test_mixed_orders_truncate():
    a, b = PowerSeries.one(5), PowerSeries.one(3)
    assert (a * b).order == 3
    assert (a + b).order == 3


def test_inverse_needs_unit():
    with pytest.raises(SeriesError):
        PowerSeries.from_polynomial([0, 1], 4).inverse()


def test_recognize_simple_ratio():
    s = PowerSeries.from_polynomial([1, -1], N) * geometric(Q)
    form = recognize_rational(s, 1, 1)
    assert form is not None
    assert form.denominator == (ONE, -Q)  # root at x = q^-1


def test_dilogarithm_not_rational():
    s = series_exp(PowerSeries([0] + [Fraction(1, m * m) for m in range(1, N + 1)]))
    assert recognize_rational(s, 3, 3) is None


def test_recognize_product_of_factors():
    s = (PowerSeries.from_polynomial([1, -Q ** 2], N) * geometric(Q) * geometric(Q ** -1))
    form = recognize_product(s)
    assert form.finite == {2: 1, 1: -1, -1: -1}


def test_pochhammer_basics():
    assert pochhammer_expand(0, N) == PowerSeries.one(N)
    a = Q ** 3
    assert pochhammer_expand(a, N)[1] == -a / (1 - Q)
    assert pochhammer_expand(a, N) * pochhammer_expand_inverse(a, N) == PowerSeries.one(N)


def test_pochhammer_ratio_round_trip():
    a, p = Q ** 2, q_pow(Fraction(3, 2))
    s = pochhammer_expand(a / p, N) * pochhammer_expand_inverse(a, N)
    form = recognize_product(s)
    assert form is not None and not form.is_rational()
    assert recognize_product(form.series(N)) == form
    assert form.series(N) == s


def test_exponent_series_matches_rule():
    from qvoa.rules import Rule
    r = Rule("qpow(m)/m")
    s = exponent_series(r, N)
    assert s == PowerSeries([0] + [Q ** m / m for m in range(1, N + 1)])
    assert series_exp(s) == geometric(Q)

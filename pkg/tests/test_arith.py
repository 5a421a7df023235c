from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from singmod.arith import (
    QSeries, divisors, factorize, hurwitz, is_squarefree, kronecker, sigma, sigma1,
    sigma1_ratio,
)
from singmod.arith import _conv_int

fracs = st.fractions(min_value=-50, max_value=50, max_denominator=12)
coeff_lists = st.lists(fracs, min_size=0, max_size=12)


def series(cs, val=0, trunc=None):
    return QSeries(cs, val, 1, trunc)


def naive_mul(a, b, n):
    out = [0] * n
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            if i + j < n:
                out[i + j] += x * y
    return out


@given(st.lists(st.integers(-10**30, 10**30), min_size=1, max_size=120),
       st.lists(st.integers(-10**30, 10**30), min_size=1, max_size=120))
def test_integer_convolution_matches_naive(a, b):
    n = len(a) + len(b) - 1
    assert list(_conv_int(a, b, n)) == naive_mul(a, b, n)


@given(coeff_lists, coeff_lists, st.integers(-3, 3))
def test_addition_commutes(a, b, v):
    x, y = series(a, v, 10), series(b, 0, 12)
    assert x + y == y + x
    assert (x + y) - y == x.truncate(10)


@given(coeff_lists, coeff_lists, coeff_lists)
def test_multiplication_associative(a, b, c):
    x, y, z = series(a, 0, 8), series(b, -1, 9), series(c, 1, 10)
    assert (x * y) * z == x * (y * z)


def test_product_truncation():
    x = series([1, 2, 3], 0, 5)
    y = series([1], -2, 4)
    assert (x * y).trunc == 3  # min(5 - 2, 4 + 0)


@given(st.lists(fracs, min_size=1, max_size=10).filter(lambda c: c[0] != 0), st.integers(-4, 4))
def test_inverse_round_trip(cs, v):
    x = series(cs, v, v + 15)
    one = x * x.inverse()
    assert one.agrees_with(QSeries.constant(1))
    assert x.inverse().trunc == 15 - v


def test_inverse_of_zero():
    with pytest.raises(ArithmeticError):
        QSeries.constant(0, trunc=5).inverse()


def test_fractional_exponents_and_shift():
    s = QSeries.monomial(Fraction(1, 24)) * QSeries.monomial(Fraction(-1, 24))
    assert s == QSeries.constant(1)
    t = QSeries([1, 1], 0, 1, 3).shift(Fraction(-1, 3))
    assert t.den == 3 and t.coeff(Fraction(2, 3)) == 1


def test_text_round_trip():
    s = QSeries([Fraction(1, 3), 0, -7], -2, 2, 6)
    assert QSeries.from_text(s.to_text()) == s


def test_first_mismatch():
    a = series([1, 2, 3], 0, 5)
    b = series([1, 2, 4], 0, 5)
    assert a.first_mismatch(b) == 2 and a.first_mismatch(a) is None


def test_pow_and_deriv():
    s = series([1, 1], 0, 10)
    assert (s ** 3).coeffs == (1, 3, 3, 1)
    assert (s ** -1).coeffs[:4] == (1, -1, 1, -1)
    assert series([5, 1, 1], -1).deriv() == series([-5, 0, 1], -1)


def test_cannot_extend_truncation():
    with pytest.raises(ValueError):
        series([1], 0, 3).truncate(5)


def test_arithmetic_functions():
    assert factorize(360) == {2: 3, 3: 2, 5: 1}
    assert divisors(12) == [1, 2, 3, 4, 6, 12]
    assert is_squarefree(30) and not is_squarefree(12)
    assert sigma(6) == 12 and sigma(6, 0) == 4 and sigma1(28) == 56
    assert sigma1_ratio(6, 2) == 4 and sigma1_ratio(5, 2) == 0


@pytest.mark.parametrize("a,n,k", [(5, 3, -1), (5, 11, 1), (-3, 2, -1), (-4, 3, -1), (8, 7, 1), (12, 5, -1)])
def test_kronecker(a, n, k):
    assert kronecker(a, n) == k


@pytest.mark.parametrize("n,h", [(0, Fraction(-1, 12)), (3, Fraction(1, 3)), (4, Fraction(1, 2)),
                                 (7, 1), (8, 1), (11, 1), (12, Fraction(4, 3)), (15, 2),
                                 (16, Fraction(3, 2)), (23, 3), (1, 0), (2, 0)])
def test_hurwitz_table(n, h):
    assert hurwitz(n) == h


def test_hurwitz_class_number_relation():
    # sum_r H(4n - r^2) = 2 sigma(n) - sum_{d|n} min(d, n/d), with H(0) = -1/12
    for n in range(1, 60):
        lhs = sum(hurwitz(4 * n - r * r) for r in range(-2 * n, 2 * n + 1))
        rhs = 2 * sigma1(n) - sum(min(d, n // d) for d in divisors(n))
        assert lhs == rhs, n

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from singmod.arith import QSeries
from singmod.borcherds import (
    BorcherdsInput, NonIntegralExponent, _factor_power, catalog_input, certify, lift,
    log_derivative, reference, weyl_vector,
)
from singmod.modform import eta_qexp, theta_qexp


@given(st.integers(1, 5), st.integers(-30, 30))
def test_factor_power_matches_repeated_product(n, e):
    base = QSeries.from_dict({0: 1, n: -1}, 1, 25)
    assert _factor_power(n, e, 25) == (base ** e).truncate(25)


def test_delta_and_e4():
    assert certify(lift(catalog_input("12theta", 40)), reference("delta", 40)) == (True, None)
    p = lift(catalog_input("f3", 40))
    assert p.rho == 0 and p.weight == 4
    assert certify(p, reference("e4", 40)) == (True, None)


def test_mismatch_is_reported():
    ok, bad = certify(lift(catalog_input("12theta", 20)), reference("e4", 20))
    assert not ok and bad == 0


def test_weyl_vector():
    assert weyl_vector(theta_qexp(5) * 12) == 1
    f3 = catalog_input("f3bare", 4).f
    assert weyl_vector(f3) == Fraction(-1, 3)


def test_f3_bare_is_cube_root_of_j():
    p = lift(catalog_input("f3bare", 12))
    assert p.rho == Fraction(-1, 3) and p.weight == 0
    cube = (p.series ** 3).normalized()
    from singmod.modform import j_qexp
    assert cube.agrees_with(j_qexp(10))


def test_zero_input():
    p = lift(catalog_input("zero", 10))
    assert p.series == QSeries.constant(1, trunc=10)


def test_log_derivative_identity():
    # q d/dq log prod (1-q^n)^c(n^2) = -sum_n sum_{d|n} d c(d^2) q^n
    p = lift(catalog_input("12theta", 30))
    assert log_derivative(p.product_expansion) == p.log_expansion


def test_eta_power_as_product():
    # 24 theta lifts to Delta^2 = eta^48
    p = lift(BorcherdsInput(theta_qexp(400) * 24, 20))
    assert p.series.agrees_with((eta_qexp(20) ** 48).normalized())


def test_rejects_fractional_coefficients():
    with pytest.raises(NonIntegralExponent):
        BorcherdsInput(theta_qexp(10) * Fraction(1, 2), 3)
    with pytest.raises(ValueError, match="not available"):
        lift(BorcherdsInput(theta_qexp(10), 5))


def test_additivity():
    a, b = catalog_input("12theta", 15), catalog_input("f3", 15)
    s = lift(BorcherdsInput(a.f + b.f, 15))
    pa, pb = lift(a), lift(b)
    assert s.rho == pa.rho + pb.rho
    assert s.product_expansion == pa.product_expansion * pb.product_expansion
    assert s.weight == 16

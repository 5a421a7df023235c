from fractions import Fraction

import pytest

from singmod.arith import QSeries
from singmod.modform import theta_qexp
from singmod.plusspace import (
    HALF, THREE_HALVES, InsufficientTruncation, PlusSupportError, admissible_poles,
    export_basis, half_basis, import_basis, in_plus, mu, rankin_cohen, rebuild,
    shipped_basis, solve_constant, three_halves_basis, verify_modularity,
)


@pytest.fixture(scope="module")
def basis1():
    return half_basis(1, 30, 12)


def test_admissible_poles():
    assert admissible_poles(HALF, 1, 20) == [0, 3, 4, 7, 8, 11, 12, 15, 16, 19, 20]
    assert admissible_poles(THREE_HALVES, 1, 8) == [1, 4, 5, 8]
    assert in_plus(5, HALF, 2) is False and in_plus(4, HALF, 2) is True


def test_mu():
    assert all(mu(n, 1) == 1 for n in range(-20, 20) if n % 4 in (0, 3))
    assert mu(1, 1) == 0
    assert mu(4, 5) == 2 and mu(0, 5) == 1


def test_f0_is_theta(basis1):
    f0 = next(f for f in basis1 if f.pole == 0)
    assert f0.series.agrees_with(theta_qexp(12))


def test_f3_coefficients(basis1):
    f3 = next(f for f in basis1 if f.pole == 3).series
    assert [f3[e] for e in (-3, 0, 1, 4, 5, 8, 9)] == [1, 0, -248, 26752, -85995, 1707264, -4096248]


def test_basis_normalization(basis1):
    for f in basis1:
        f.check_support()
        assert f.principal_part == {-f.pole: 1} or f.pole == 0
        for g in basis1:
            if g.pole < f.pole:
                assert f.series[-g.pole] == 0


def test_three_halves_g1():
    g1 = next(f for f in three_halves_basis(1, 4, 20) if f.pole == 1).series
    assert [g1[e] for e in (-1, 0, 3, 4, 7, 8)] == [1, -2, 248, -492, 4119, -7256]


def test_bracket_pool_matches_monomial_pool():
    a = half_basis(1, 12, 10, pool="monomial")
    b = half_basis(1, 12, 10, pool="bracket")
    assert [f.series for f in a] == [f.series for f in b]


def test_rankin_cohen_zeroth_is_product():
    f, g = theta_qexp(10), theta_qexp(10) ** 3
    assert rankin_cohen(f, HALF, g, Fraction(3, 2), 0) == f * g


def test_rebuild_from_witness(basis1):
    for f in basis1:
        assert rebuild(f, basis1, 12) == f.series.truncate(12)


@pytest.fixture(scope="module")
def g1():
    return next(f for f in three_halves_basis(1, 1, 31) if f.pole == 1).series


def test_verify_modularity_rejects_non_modular(basis1, g1):
    assert verify_modularity(g1, basis1).verdict
    bad = g1 + QSeries.monomial(3, 1, trunc=31)
    rep = verify_modularity(bad, basis1)
    assert not rep.verdict and rep.nonzero() == {3: 1}
    with pytest.raises(PlusSupportError):
        verify_modularity(g1 + QSeries.monomial(1, 1, trunc=31), basis1)
    with pytest.raises(InsufficientTruncation):
        verify_modularity(g1.truncate(31) + QSeries.constant(0, trunc=31), basis1[:3])


def test_theta_cubed_is_not_in_the_plus_space(basis1):
    with pytest.raises(PlusSupportError):
        verify_modularity(theta_qexp(20) ** 3, basis1)


def test_solve_constant(basis1, g1):
    assert solve_constant(g1 - QSeries.constant(g1[0]), basis1) == -2


def test_basis_file_round_trip(tmp_path, basis1):
    path = tmp_path / "b.qs"
    export_basis(basis1, path)
    back = import_basis(path)
    assert [f.series for f in back] == [f.series for f in basis1]
    text = path.read_text().replace("pole=3\n", "pole=4\n", 1)
    path.write_text(text)
    with pytest.raises(ValueError):
        import_basis(path)


@pytest.mark.parametrize("M", [2, 3, 5, 6])
def test_shipped_bases_are_consistent(M):
    forms = shipped_basis(M)
    assert forms[0].pole == 0 and forms[0].level == 4 * M
    for f in forms:
        f.check_support()
    fresh = half_basis(M, 24, 6)
    by_pole = {f.pole: f.series for f in forms}
    for f in fresh:
        assert by_pole[f.pole].agrees_with(f.series)

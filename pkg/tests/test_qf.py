from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from singmod.arith import hurwitz
from singmod.qf import (
    GenusCharData, InvalidDiscriminant, NotPositiveDefinite, QuadForm, class_reps, degree,
    genus_char, heegner_point, reduce, reduced_forms, represented_values, stabilizer,
)


@given(st.integers(1, 30), st.integers(-40, 40), st.integers(1, 30),
       st.integers(-5, 5), st.integers(-5, 5))
def test_reduction_is_equivalence(a, b, c, x, y):
    if b * b - 4 * a * c >= 0:
        return
    Q = QuadForm(a, b, c)
    R, g = reduce(Q)
    assert R.disc == Q.disc
    assert abs(R.b) <= R.a <= R.c
    assert R == reduce(Q.act(((1, x), (0, 1))))[0]


def test_reduced_forms_23():
    assert [(f.a, f.b, f.c) for f in reduced_forms(23)] == [(1, 1, 6), (2, -1, 3), (2, 1, 3)]


def test_indefinite_rejected():
    with pytest.raises(NotPositiveDefinite):
        reduce(QuadForm(1, 3, 1))
    with pytest.raises(InvalidDiscriminant):
        class_reps(5, 1)


def test_stabilizers():
    assert len(stabilizer(QuadForm(1, 0, 1))) == 4
    assert len(stabilizer(QuadForm(1, 1, 1))) == 6
    assert len(stabilizer(QuadForm(2, 1, 3))) == 2


def test_class_number_23():
    reps = class_reps(23, 1)
    assert len(reps) == 3 and all(r.w == 1 for r in reps)


@pytest.mark.parametrize("M", [2, 3, 5, 6, 7])
def test_level_classes_degree(M):
    # the number of Gamma_0(M)-classes refines the level 1 count by the
    # number of square roots of -d modulo 4M over Z / 2M
    for d in range(3, 80):
        if (-d) % 4 not in (0, 1):
            continue
        reps = class_reps(d, M)
        assert all(r.form.a % M == 0 and r.form.disc == -d for r in reps)
        roots = sum(1 for r in range(2 * M) if (r * r + d) % (4 * M) == 0)
        if all(d % p for p in (2, 3, 5, 7) if M % p == 0):
            assert degree(d, M) == roots * hurwitz(d)


def test_heegner_point():
    z = heegner_point(QuadForm(1, 1, 1), 128).approx
    with mpmath.workprec(128):
        assert abs(z - mpmath.mpc(-0.5, mpmath.sqrt(3) / 2)) < mpmath.mpf(2) ** -120


def test_genus_character():
    chi = GenusCharData(5, 1, 1)
    assert chi.sign == 1
    # discriminant -15: [1,1,4] represents 1, [2,1,2] represents 2
    assert genus_char(chi, QuadForm(1, 1, 4)) == 1
    assert genus_char(chi, QuadForm(2, 1, 2)) == -1
    assert genus_char(chi, QuadForm(1, 1, 6)) == 0  # 5 does not divide 23
    with pytest.raises(ValueError):
        GenusCharData(6, 0, 1)
    with pytest.raises(ValueError):
        GenusCharData(5, 1, 5)


def test_genus_character_independent_of_representative():
    chi = GenusCharData(-3, 1, 1)
    for Q in reduced_forms(3 * 20):
        vals = {genus_char(chi, Q.act(g)) for g in [((1, 0), (0, 1)), ((1, 1), (0, 1)), ((0, -1), (1, 0))]}
        assert len(vals) == 1


def test_represented_values():
    assert {1, 4, 2} <= represented_values(QuadForm(1, 0, 1), 2)
    assert 3 not in represented_values(QuadForm(1, 0, 1), 3)

from fractions import Fraction

import pytest

from singmod.arith import QSeries
from singmod.modform import ModFunc, catalog, parse
from singmod.qf import GenusCharData
from singmod.traces import (
    HypothesisError, RoundingFailure, assemble, cm_trace, constant_term, fhn_closed_form,
    principal_part_terms, residue_pairing, twisted_assemble, twisted_cm_trace,
    twisted_principal_part_terms,
)
from singmod.traces import _round

import mpmath


@pytest.fixture(scope="module")
def J():
    return catalog("J")


@pytest.mark.parametrize("d,t", [(3, -248), (4, 492), (7, -4119), (8, 7256)])
def test_known_traces(J, d, t):
    assert cm_trace(J, d)[0] == t


def test_non_discriminant_trace_is_zero(J):
    assert cm_trace(J, 5) == (0, 0)
    assert cm_trace(J, 6) == (0, 0)


def test_principal_part_and_constant():
    parts = {1: {1: 1}}
    assert principal_part_terms(parts) == QSeries.monomial(-1, -1)
    assert constant_term(parts) == 2
    # D sigma_1(j/D) vanishes unless D divides j
    assert constant_term({1: {1: 1}, 2: {1: 1}, 3: {2: 1}, 6: {6: 1}}) == 2 * (1 + 0 + 0 + 6)
    # pole of order 4 contributes b = 1, 2, 4
    pp = principal_part_terms({1: {4: 1}})
    assert [pp[e] for e in (-16, -4, -1)] == [-4, -2, -1]


def test_twisted_principal_part():
    pp = twisted_principal_part_terms({1: {1: 1}}, 5)
    assert pp == QSeries.monomial(-5, -1)


def test_assemble_rejects_bad_inputs(J):
    with pytest.raises(ValueError):
        assemble(J, 0)
    with pytest.raises(HypothesisError):
        assemble(ModFunc(parse("(j 1)"), 1), 5)


def test_assembled_series_shape(J):
    ts = assemble(J, 20, 256)
    assert ts.series[-1] == -1 and ts.series[0] == 2
    assert ts.modulus_vector == {1: 2}
    assert ts.rounding_report < Fraction(1, 10 ** 10)
    assert set(ts.as_dict()) >= {"series", "modulus_vector", "rounding_report"}


def test_rounding_failure_at_low_precision(J):
    with pytest.raises(RoundingFailure):
        _round(mpmath.mpf("0.3"), 64)


def test_twisted_traces(J):
    chi = GenusCharData(5, 1, 1)
    ts = twisted_assemble(J, chi, 10, 256)
    assert ts.series[-5] == -1 and ts.series[0] == 0
    assert ts.parity == 1
    with pytest.raises(ValueError):
        twisted_cm_trace(J, GenusCharData(-3, 1, 1), 1)


def test_level_six_series_shape():
    F = catalog("m6")
    ts = assemble(F, 12, 256)
    assert ts.modulus_vector == {1: 2, 2: 2, 3: 2, 6: 2}
    assert ts.series[-1] == -4 and ts.series[0] == 2


def test_residue_pairing_polynomial_h():
    F = QSeries.from_dict({-4: 1, -2: 3, -1: -2, 0: 0, 1: 7}, 1, 6)
    for n in (1, 2, 3, 4):
        h = QSeries.from_dict({0: 1, n: -1}, 1, 6)
        assert residue_pairing(F, h) == fhn_closed_form(F, n)
    with pytest.raises(ValueError):
        residue_pairing(F, QSeries.monomial(1))

"""Generating series of traces of singular moduli on X_0(M).

The scalar series attached to a modular function ``F`` on ``Gamma_0(M)`` is

    - sum_{D|M} sum_{b>=1} sum_{n>=1} c_D(-b n) b q^(-b^2)
    + 2 sum_{D|M} sum_{j>=1} c_D(-j) D sigma_1(j/D)
    + sum_{d>0} Tr_F(d) q^d,

where ``c_D`` are the coefficients of ``F`` at the cusp ``I_D`` and ``Tr_F(d)``
sums ``F(alpha_Q)/w_Q`` over ``Gamma_0(M)``-classes of forms ``[a,b,c]``, ``M|a``,
of discriminant ``-d``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import mpmath

from .arith import QSeries, divisors, kronecker, sigma1_ratio
from .modform import ModFunc
from .qf import GenusCharData, class_reps, genus_char, heegner_point

__all__ = [
    "RoundingFailure", "HypothesisError", "TraceSeries", "TwistedTraceSeries",
    "cm_trace", "twisted_cm_trace", "principal_part_terms", "constant_term",
    "twisted_principal_part_terms", "assemble", "twisted_assemble",
    "residue_pairing", "fhn_closed_form",
]

ROUND_DENOMINATOR = 6
FAIL_RESIDUAL = Fraction(1, 10 ** 6)
TARGET_RESIDUAL = Fraction(1, 10 ** 10)


class RoundingFailure(ArithmeticError):
    """A CM trace is not close enough to a rational with denominator dividing 6."""


class HypothesisError(ValueError):
    pass


def _is_admissible(d: int, M: int) -> bool:
    return d > 0 and any((x * x + d) % (4 * M) == 0 for x in range(2 * M))


def _round(value, prec_bits: int, scale=None):
    """Round a real mpmath value to a rational with denominator 6; return (Fraction, residual)."""
    with mpmath.workprec(prec_bits):
        x = value.real if isinstance(value, mpmath.mpc) else value
        if scale is not None:
            x = x / scale
        k = int(mpmath.nint(x * ROUND_DENOMINATOR))
        exact = Fraction(k, ROUND_DENOMINATOR)
        resid = abs(x - mpmath.mpf(k) / ROUND_DENOMINATOR)
        imag = abs(value.imag) if isinstance(value, mpmath.mpc) else mpmath.mpf(0)
        if scale is not None:
            imag = imag / scale
        resid = max(resid, imag)
        rr = Fraction(float(resid))
    if rr >= FAIL_RESIDUAL:
        raise RoundingFailure(f"rounding residual {float(rr):.3g} at {prec_bits} bits")
    return exact, rr


def _class_sum(F: ModFunc, forms, prec_bits: int, weights):
    """Sum of ``weight * F(alpha_Q) / w_Q`` in the canonical order of ``forms``."""
    total = mpmath.mpc(0)
    with mpmath.workprec(prec_bits + 32):
        for rep, wt in zip(forms, weights):
            if wt == 0:
                continue
            z = heegner_point(rep.form, prec_bits + 32).approx
            total += wt * F.value(z, prec_bits + 16) / rep.w
    return total


def cm_trace(F: ModFunc, d: int, M: int | None = None, prec_bits: int = 256):
    """``sum_Q F(alpha_Q) / w_Q`` over classes of discriminant ``-d``; returns ``(Fraction, residual)``."""
    M = F.M if M is None else M
    if M != F.M:
        raise ValueError(f"F has level {F.M}, not {M}")
    if not _is_admissible(d, M):
        return Fraction(0), Fraction(0)
    reps = class_reps(d, M)
    val = _class_sum(F, reps, prec_bits, [1] * len(reps))
    return _round(val, prec_bits)


def twisted_cm_trace(F: ModFunc, chi: GenusCharData, d: int, M: int | None = None,
                     prec_bits: int = 256):
    """``(1/sqrt(Delta)) sum_Q chi_Delta(Q) F(alpha_Q) / w_Q`` over classes of discriminant ``-d|Delta|``."""
    M = F.M if M is None else M
    if chi.M != M or F.M != M:
        raise ValueError("levels of F, chi and M disagree")
    if chi.delta < 0:
        raise ValueError("the scalar twisted series vanishes identically for Delta < 0")
    D = d * abs(chi.delta)
    if not _is_admissible(D, M):
        return Fraction(0), Fraction(0)
    reps = class_reps(D, M)
    signs = [genus_char(chi, r.form) for r in reps]
    val = _class_sum(F, reps, prec_bits, signs)
    with mpmath.workprec(prec_bits):
        scale = mpmath.sqrt(chi.delta)
    return _round(val, prec_bits, scale)


# -- principal parts and constant terms --------------------------------------------------

Parts = Mapping[int, Mapping[int, Fraction]]  # cusp D -> {n: c_D(-n)}


def _parts(F) -> dict:
    if isinstance(F, ModFunc):
        return {D: F.principal_part(D) for D in F.cusp_divisors()}
    return {D: {int(n): Fraction(c) for n, c in p.items()} for D, p in F.items()}


def principal_part_terms(F) -> QSeries:
    """``- sum_D sum_b sum_n c_D(-b n) b q^(-b^2)``; ``F`` is a ModFunc or ``{D: {n: c(-n)}}``."""
    terms = {}
    for part in _parts(F).values():
        for k, c in part.items():
            for b in divisors(k):
                terms[-b * b] = terms.get(-b * b, 0) - b * c
    return QSeries.from_dict(terms, 1, None)


def twisted_principal_part_terms(F, delta: int) -> QSeries:
    """``- sum_D sum_b sum_n (Delta|n) b c_D(-b n) q^(-|Delta| b^2)``."""
    terms = {}
    for part in _parts(F).values():
        for k, c in part.items():
            for b in divisors(k):
                e = -abs(delta) * b * b
                terms[e] = terms.get(e, 0) - kronecker(delta, k // b) * b * c
    return QSeries.from_dict(terms, 1, None)


def constant_term(F) -> Fraction:
    """``2 sum_D sum_j c_D(-j) D sigma_1(j/D)``."""
    total = Fraction(0)
    for D, part in _parts(F).items():
        for j, c in part.items():
            total += 2 * c * D * sigma1_ratio(j, D)
    return total


def modulus_vector(F: ModFunc) -> dict:
    """Smallest admissible ``m_I = max(1, -ord_I(F) + 1)`` at every cusp."""
    return {D: max(1, -F.order(D) + 1) for D in F.cusp_divisors()}


def check_hypotheses(F: ModFunc):
    for D in F.cusp_divisors():
        c0 = F.constant_term(D)
        if c0 != 0:
            raise HypothesisError(f"constant term {c0} at the cusp I_{D} is not zero")


# -- assembly --------------------------------------------------------------------------------

@dataclass
class TraceSeries:
    series: QSeries
    M: int
    F: str
    N: int
    modulus_vector: dict
    rounding_report: Fraction
    prec_bits: int
    traces: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "M": self.M, "F": self.F, "N": self.N,
            "modulus_vector": {str(k): v for k, v in sorted(self.modulus_vector.items())},
            "rounding_report": float(self.rounding_report),
            "prec_bits": self.prec_bits,
            "series": self.series.to_text(),
        }


@dataclass
class TwistedTraceSeries(TraceSeries):
    chi: GenusCharData | None = None
    constant_source: str = "definition"

    @property
    def parity(self) -> int:
        return self.chi.sign

    def as_dict(self):
        out = super().as_dict()
        out["twist"] = {"delta": self.chi.delta, "r": self.chi.r}
        out["normalization"] = "coefficients divided by sqrt(Delta)"
        out["constant_source"] = self.constant_source
        return out


def _collect(fn, N: int):
    traces, worst = {}, Fraction(0)
    for d in range(1, N + 1):
        t, r = fn(d)
        if t:
            traces[d] = t
        worst = max(worst, r)
    return traces, worst


def assemble(F: ModFunc, N: int, prec_bits: int = 256) -> TraceSeries:
    """The scalar trace series of ``F`` known modulo ``q^(N+1)``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    check_hypotheses(F)
    traces, worst = _collect(lambda d: cm_trace(F, d, F.M, prec_bits), N)
    s = principal_part_terms(F) + QSeries.constant(constant_term(F))
    s = s + QSeries.from_dict(traces, 1, N + 1)
    return TraceSeries(s.truncate(N + 1), F.M, F.name, N, modulus_vector(F), worst,
                       prec_bits, traces)


def twisted_assemble(F: ModFunc, chi: GenusCharData, N: int, prec_bits: int = 256,
                     basis=None) -> TwistedTraceSeries:
    """Twisted series normalized by ``1/sqrt(Delta)``, known modulo ``q^(N+1)``.

    The constant term vanishes by definition.  When a weight 1/2 ``basis`` is
    supplied it is instead solved from the pairing with the basis form of pole
    order 0 and recorded as derived.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    check_hypotheses(F)
    traces, worst = _collect(lambda d: twisted_cm_trace(F, chi, d, F.M, prec_bits), N)
    s = twisted_principal_part_terms(F, chi.delta) + QSeries.from_dict(traces, 1, N + 1)
    source = "definition"
    if basis is not None:
        from .plusspace import solve_constant

        s = s + QSeries.constant(solve_constant(s.truncate(N + 1), basis, chi.M))
        source = "pairing"
    return TwistedTraceSeries(s.truncate(N + 1), F.M, F.name, N, modulus_vector(F), worst,
                              prec_bits, traces, chi, source)


# -- residues of F dh/h ---------------------------------------------------------------------

def residue_pairing(F: QSeries, h: QSeries) -> Fraction:
    """``-Res_{q=0} F dh/h`` for a series ``h = 1 + O(q)``, exact."""
    if h.val != 0 or h[0] == 0 or h.den != 1 or F.den != 1:
        raise ValueError("h must be a unit power series in q")
    logder = h.deriv() / h  # q h'/h
    return -(F * logder)[0]


def fhn_closed_form(F: QSeries, n: int) -> Fraction:
    """``n sum_{j>=1} c_F(-n j)``."""
    total = Fraction(0)
    for e, c in F.items():
        if e < 0 and (-e) % n == 0:
            total += c
    return n * total

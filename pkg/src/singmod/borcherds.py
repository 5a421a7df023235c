"""Borcherds products of weight 1/2 plus space forms at level 4.

For ``f = sum c(n) q^n`` with integral coefficients,

    Psi(f) = q^rho prod_{n>=1} (1 - q^n)^c(n^2),   rho = -sum_{n>=0} c(-n) H(n),

with ``H`` the Hurwitz class numbers (``H(0) = -1/12``).  ``Psi`` is a
meromorphic modular form of weight ``c(0)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .arith import QSeries, hurwitz
from .modform import delta_qexp, eisenstein_qexp, theta_qexp

__all__ = [
    "NonIntegralExponent", "BorcherdsInput", "BorcherdsProduct", "lift", "certify",
    "catalog_input", "reference", "weyl_vector",
]


class NonIntegralExponent(ValueError):
    pass


@dataclass
class BorcherdsInput:
    f: QSeries
    trunc: int
    name: str = ""

    def __post_init__(self):
        if self.f.den != 1:
            raise ValueError("the input must have integral exponents")
        for e, c in self.f.items():
            if c.denominator != 1:
                raise NonIntegralExponent(f"coefficient {c} at q^{e} is not an integer")


@dataclass
class BorcherdsProduct:
    rho: Fraction
    exponents: dict  # n -> c(n^2)
    product_expansion: QSeries  # prod (1 - q^n)^c(n^2), without q^rho
    log_expansion: QSeries  # q d/dq log of the product
    weight: Fraction
    trunc: int

    @property
    def series(self) -> QSeries:
        """``q^rho prod (1 - q^n)^c(n^2)``."""
        return self.product_expansion.shift(self.rho)

    def as_dict(self):
        return {
            "rho": str(self.rho),
            "weight": str(self.weight),
            "trunc": self.trunc,
            "exponents": {str(n): int(c) for n, c in sorted(self.exponents.items()) if c},
            "series": self.series.to_text(),
        }


def weyl_vector(f: QSeries) -> Fraction:
    """``-sum_{n>=0} c(-n) H(n)``."""
    return -sum((c * hurwitz(-e) for e, c in f.items() if e <= 0), Fraction(0))


def _factor_power(n: int, e: int, trunc: int) -> QSeries:
    """``(1 - q^n)^e`` modulo ``q^trunc``."""
    terms = {}
    c = 1
    for k in range((trunc - 1) // n + 1):
        terms[k * n] = c
        c = c * (k - e) // (k + 1)  # C(e, k+1) (-1)^(k+1) from C(e, k) (-1)^k
    return QSeries.from_dict(terms, 1, trunc)


def lift(inp: BorcherdsInput) -> BorcherdsProduct:
    """Expand ``prod_{n < trunc} (1 - q^n)^c(n^2)`` exactly modulo ``q^trunc``."""
    f, T = inp.f, inp.trunc
    exps = {}
    for n in range(1, T):
        try:
            c = f[n * n]
        except IndexError:
            raise ValueError(f"c({n * n}) is not available below the input truncation") from None
        exps[n] = int(c)
    prod = QSeries.constant(1, trunc=T)
    for n, e in exps.items():
        if e:
            prod = prod * _factor_power(n, e, T)
    logd = {}
    for m in range(1, T):
        s = sum(n * exps[n] for n in range(1, m + 1) if m % n == 0)
        if s:
            logd[m] = -s
    rho = weyl_vector(f)
    return BorcherdsProduct(rho, exps, prod, QSeries.from_dict(logd, 1, T), f[0], T)


def certify(prod: BorcherdsProduct, ref: QSeries):
    """Exact comparison on the common range; returns ``(match, first mismatch exponent)``."""
    bad = prod.series.first_mismatch(ref)
    return bad is None, bad


def log_derivative(s: QSeries) -> QSeries:
    """``q d/dq log`` of a unit power series ``1 + O(q)``."""
    return s.deriv() / s


# -- catalog ---------------------------------------------------------------------------------

@lru_cache(maxsize=8)
def _f3(trunc: int) -> QSeries:
    from .plusspace import half_basis

    return next(f.series for f in half_basis(1, 3, trunc) if f.pole == 3)


def catalog_input(name: str, trunc: int) -> BorcherdsInput:
    """``12theta``, ``f3`` (``f_3 + 4 theta``, the input lifting to E4), ``f3bare`` (``f_3``) or ``zero``.

    ``trunc`` is the truncation of the product, so the form is needed to ``q^((trunc-1)^2)``.
    """
    need = (trunc - 1) ** 2 + 1
    if name == "12theta":
        f = theta_qexp(need) * 12
    elif name == "f3":
        f = _f3(need) + theta_qexp(need) * 4
    elif name == "f3bare":
        f = _f3(need)
    elif name == "zero":
        f = QSeries.constant(0, trunc=need)
    else:
        raise KeyError(f"unknown Borcherds input {name!r}")
    return BorcherdsInput(f, trunc, name)


def reference(name: str, trunc: int) -> QSeries:
    if name == "delta":
        return delta_qexp(trunc)
    if name == "e4":
        return eisenstein_qexp(4, trunc)
    if name == "one":
        return QSeries.constant(1, trunc=trunc)
    raise KeyError(f"unknown reference {name!r}")

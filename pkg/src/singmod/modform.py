"""Concrete modular objects as expression trees.

An expression is a nested tuple:

    ("const", Fraction)      rational constant
    ("eta", t)               eta(t*tau)
    ("j", t)                 j(t*tau)
    ("+", (e1, e2, ...))     sum
    ("*", (e1, e2, ...))     product
    ("pow", e, n)            integer power

The same tree yields exact q-expansions (at infinity and, through the
Atkin-Lehner rules, at every cusp of X_0(M)) and high precision values at
points of the upper half plane.  Text form is an s-expression, e.g.
``(+ (j 1) -744)`` or ``(* 4096 (pow (eta 2) 24) (pow (eta 1) -24))``.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import lru_cache

import mpmath

from .arith import QSeries, divisors, is_squarefree, sigma

__all__ = [
    "eta_qexp", "theta_qexp", "eisenstein_qexp", "delta_qexp", "j_qexp",
    "parse", "to_sexp", "expand", "atkin_lehner", "atkin_lehner_matrix",
    "eval_point", "ModFunc", "catalog", "UnsupportedExpression", "PrecisionLoss",
]


class UnsupportedExpression(ValueError):
    pass


class PrecisionLoss(ArithmeticError):
    pass


# -- basic q-expansions ------------------------------------------------------------

@lru_cache(maxsize=64)
def _euler_product(trunc: int) -> QSeries:
    """prod_{n>=1} (1 - q^n) mod q^trunc via the pentagonal number theorem."""
    terms = {}
    k = 0
    while True:
        hit = False
        for kk in ((k,) if k == 0 else (k, -k)):
            e = kk * (3 * kk - 1) // 2
            if e < trunc:
                terms[e] = (-1) ** (kk % 2)
                hit = True
        if not hit:
            break
        k += 1
    return QSeries.from_dict(terms, 1, trunc)


def eta_qexp(trunc: int) -> QSeries:
    """``q^(1/24) prod (1-q^n)``, known modulo ``q^trunc``."""
    if trunc < 1:
        raise ValueError("trunc must be >= 1")
    return _euler_product(trunc).shift(Fraction(1, 24))


def theta_qexp(trunc: int) -> QSeries:
    terms = {0: 1}
    n = 1
    while n * n < trunc:
        terms[n * n] = 2
        n += 1
    return QSeries.from_dict(terms, 1, trunc)


@lru_cache(maxsize=64)
def eisenstein_qexp(k: int, trunc: int) -> QSeries:
    """Normalized Eisenstein series ``E_k`` (``k`` in 4, 6, 8, ...)."""
    b = Fraction(*mpmath.bernfrac(k))
    factor = Fraction(-2 * k) / b
    terms = {0: Fraction(1)}
    for n in range(1, trunc):
        terms[n] = factor * sigma(n, k - 1)
    return QSeries.from_dict(terms, 1, trunc)


@lru_cache(maxsize=64)
def delta_qexp(trunc: int) -> QSeries:
    """``Delta = q prod (1-q^n)^24``."""
    return (_euler_product(trunc) ** 24).shift(1).truncate(trunc)


@lru_cache(maxsize=64)
def j_qexp(trunc: int) -> QSeries:
    """``j = E4^3 / Delta`` computed from Eisenstein series, modulo ``q^trunc``."""
    e4 = eisenstein_qexp(4, trunc + 2)
    e6 = eisenstein_qexp(6, trunc + 2)
    delta = (e4 ** 3 - e6 ** 2) / 1728
    return ((e4 ** 3) / delta).truncate(trunc)


def level_one_basis(k: int, trunc: int):
    """Monomials ``E4^a E6^b`` with ``4a + 6b = k`` (a basis of ``M_k(SL_2(Z))``)."""
    out = []
    if k < 0 or k % 2:
        return out
    for b in range(k // 6 + 1):
        rest = k - 6 * b
        if rest % 4 == 0:
            a = rest // 4
            out.append(eisenstein_qexp(4, trunc) ** a * eisenstein_qexp(6, trunc) ** b)
    return out


# -- expression trees -----------------------------------------------------------------

def const(c):
    return ("const", Fraction(c))


def add(*es):
    return ("+", tuple(es))


def mul(*es):
    return ("*", tuple(es))


def power(e, n: int):
    return ("pow", e, int(n))


def eta(t: int = 1):
    return ("eta", int(t))


def jfun(t: int = 1):
    return ("j", int(t))


def eta_quotient(exps: dict):
    """``prod eta(t tau)^r_t`` as a tree."""
    return mul(*[power(eta(t), r) for t, r in sorted(exps.items()) if r])


_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def parse(text: str):
    """Parse the s-expression text form."""
    tokens = _TOKEN.findall(text)
    pos = 0

    def node():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        if tok != "(":
            return const(Fraction(tok))
        head = tokens[pos]
        pos += 1
        args = []
        while tokens[pos] != ")":
            args.append(node())
        pos += 1
        if head in ("eta", "j"):
            if len(args) != 1 or args[0][0] != "const" or args[0][1].denominator != 1:
                raise ValueError(f"({head} t) needs one integer argument")
            return (head, int(args[0][1]))
        if head == "pow":
            if len(args) != 2 or args[1][0] != "const" or args[1][1].denominator != 1:
                raise ValueError("(pow e n) needs an integer exponent")
            return power(args[0], int(args[1][1]))
        if head in ("+", "*"):
            return (head, tuple(args))
        raise ValueError(f"unknown operator {head!r}")

    tree = node()
    if pos != len(tokens):
        raise ValueError("trailing tokens in expression")
    return tree


def to_sexp(e) -> str:
    kind = e[0]
    if kind == "const":
        c = e[1]
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    if kind in ("eta", "j"):
        return f"({kind} {e[1]})"
    if kind == "pow":
        return f"(pow {to_sexp(e[1])} {e[2]})"
    return "(" + kind + " " + " ".join(to_sexp(x) for x in e[1]) + ")"


def weight(e) -> Fraction:
    kind = e[0]
    if kind in ("const", "j"):
        return Fraction(0)
    if kind == "eta":
        return Fraction(1, 2)
    if kind == "pow":
        return weight(e[1]) * e[2]
    ws = [weight(x) for x in e[1]]
    if kind == "*":
        return sum(ws, Fraction(0))
    if len(set(ws)) > 1:
        raise ValueError("sum of terms of different weights")
    return ws[0] if ws else Fraction(0)


def _valuation_bound(e) -> Fraction:
    kind = e[0]
    if kind == "const":
        return Fraction(0)
    if kind == "eta":
        return Fraction(e[1], 24)
    if kind == "j":
        return Fraction(-e[1])
    if kind == "+":
        return min((_valuation_bound(x) for x in e[1]), default=Fraction(0))
    if kind == "*":
        return sum((_valuation_bound(x) for x in e[1]), Fraction(0))
    n = e[2]
    return _valuation_bound(e[1]) * n


def _expand(e, T: Fraction, pad: int):
    """Expansion known at least modulo ``q^T`` when ``pad`` suffices."""
    kind = e[0]
    if kind == "const":
        return QSeries.constant(e[1])
    if kind == "eta":
        t = e[1]
        n = max(1, math.ceil((T - Fraction(t, 24)) / t) + 1 + pad)
        return _euler_product(n).rescale(t).shift(Fraction(t, 24))
    if kind == "j":
        t = e[1]
        n = max(1, math.ceil(T / t) + 1 + pad)
        return j_qexp(n).rescale(t)
    if kind == "+":
        out = QSeries.constant(0)
        for x in e[1]:
            out = out + _expand(x, T, pad)
        return out
    if kind == "*":
        vals = [_valuation_bound(x) for x in e[1]]
        total = sum(vals, Fraction(0))
        out = QSeries.constant(1)
        for x, v in zip(e[1], vals):
            out = out * _expand(x, T - (total - v), pad)
        return out
    base, n = e[1], e[2]
    if n == 0:
        return QSeries.constant(1)
    # q^v u known mod q^S has relative precision S - v, and so does its n-th power
    v = _valuation_bound(base)
    return _expand(base, T - (n - 1) * v, pad) ** n


def expand(e, trunc) -> QSeries:
    """q-expansion of a tree at infinity, exact modulo ``q^trunc``."""
    T = Fraction(trunc)
    for pad in (2, 6, 16, 40, 100):
        s = _expand(e, T, pad)
        te = s.trunc_exponent()
        if te is None or te >= T:
            return s.truncate_at(T) if te is not None else s
    raise PrecisionLoss(f"could not expand {to_sexp(e)} to q^{trunc}")


# -- Atkin-Lehner involutions --------------------------------------------------------------

def _egcd(a, b):
    if b == 0:
        return (a, 1, 0)
    g, x, y = _egcd(b, a % b)
    return g, y, x - (a // b) * y


def atkin_lehner_matrix(D: int, M: int):
    """``W_D = [[D x, y], [M z, D w]]`` of determinant ``D``."""
    if M % D or math.gcd(D, M // D) != 1:
        raise ValueError(f"{D} is not an exact divisor of {M}")
    if D == 1:
        return ((1, 0), (M, 1))
    if D == M:
        return ((0, -1), (M, 0))
    # D w - (M/D) y = 1
    g, w, y = _egcd(D, M // D)
    assert g == 1
    return ((D, -y), (M, D * w))


def _mobius(g, tau):
    (a, b), (c, d) = g
    return (a * tau + b) / (c * tau + d)


_TEST_POINT = (Fraction(1234, 10000), Fraction(10789, 10000))


def _is_eta_factor(e):
    return e[0] == "eta" or (e[0] == "pow" and e[1][0] == "eta")


def _al_eta_monomial(exps: dict, D: int, M: int):
    """``prod eta(t tau)^r_t | W_D = C * prod eta(t' tau)^r_t`` with ``t' = t D / gcd(t,D)^2``.

    ``C`` is determined up to sign in closed form (``|C| = D^(-k/2) prod gcd(t,D)^(-r_t/2)``)
    and the sign is read off numerically at a fixed test point.
    """
    k2 = sum(exps.values())  # twice the weight
    if k2 % 2:
        raise UnsupportedExpression("W_D on half-integral weight eta products")
    k = k2 // 2
    for t in exps:
        if M % t:
            raise UnsupportedExpression(f"eta({t} tau) is not of level {M}")
    new = {}
    sq = Fraction(1)
    for t, r in exps.items():
        g = math.gcd(t, D)
        tp = t * D // (g * g)
        new[tp] = new.get(tp, 0) + r
        sq *= Fraction(1, g) ** r
    sq *= Fraction(1, D) ** k
    num, den = sq.numerator, sq.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn != num or rd * rd != den:
        raise UnsupportedExpression("Atkin-Lehner constant is irrational")
    mag = Fraction(rn, rd)
    W = atkin_lehner_matrix(D, M)
    with mpmath.workprec(120):
        tau = mpmath.mpc(mpmath.mpf(_TEST_POINT[0].numerator) / _TEST_POINT[0].denominator,
                         mpmath.mpf(_TEST_POINT[1].numerator) / _TEST_POINT[1].denominator)
        lhs = (mpmath.mpf(D) ** (mpmath.mpf(-k) / 2) * (W[1][0] * tau + W[1][1]) ** (-k)
               * _eval(eta_quotient(exps), _mobius(W, tau)))
        rhs = mpmath.mpf(mag.numerator) / mag.denominator * _eval(eta_quotient(new), tau)
        ratio = lhs / rhs
    sign = int(mpmath.nint(ratio.real))
    if sign not in (1, -1) or abs(ratio - sign) > mpmath.mpf(2) ** -80:
        raise UnsupportedExpression(f"eta product {exps} has no clean W_{D} image (ratio {ratio})")
    return sign * mag, {t: r for t, r in new.items() if r}


def _al_j(t: int, D: int, M: int):
    g = math.gcd(t, D)
    tp = t * D // (g * g)
    W = atkin_lehner_matrix(D, M)
    with mpmath.workprec(120):
        tau = mpmath.mpc(mpmath.mpf(_TEST_POINT[0].numerator) / _TEST_POINT[0].denominator,
                         mpmath.mpf(_TEST_POINT[1].numerator) / _TEST_POINT[1].denominator)
        lhs = _eval(jfun(t), _mobius(W, tau))
        rhs = _eval(jfun(tp), tau)
        if abs(lhs - rhs) > mpmath.mpf(2) ** -60 * (1 + abs(rhs)):
            raise UnsupportedExpression(f"j({t} tau) has no clean W_{D} image")
    return jfun(tp)


def atkin_lehner(e, D: int, M: int):
    """Tree for ``e | W_D`` (slash normalized by ``det^(-k/2)``, so ``Delta|W_D = D^-6 Delta(D tau)``)."""
    if D == 1:
        return e
    kind = e[0]
    if kind == "const":
        return e
    if kind == "j":
        return _al_j(e[1], D, M)
    if _is_eta_factor(e):
        return atkin_lehner(mul(e), D, M)
    if kind == "+":
        return ("+", tuple(atkin_lehner(x, D, M) for x in e[1]))
    if kind == "pow":
        return power(atkin_lehner(e[1], D, M), e[2])
    # product: eta factors grouped into one monomial
    exps = {}
    rest = []
    for x in e[1]:
        if x[0] == "eta":
            exps[x[1]] = exps.get(x[1], 0) + 1
        elif x[0] == "pow" and x[1][0] == "eta":
            exps[x[1][1]] = exps.get(x[1][1], 0) + x[2]
        else:
            rest.append(atkin_lehner(x, D, M))
    exps = {t: r for t, r in exps.items() if r}
    if exps:
        c, new = _al_eta_monomial(exps, D, M)
        rest = [const(c), eta_quotient(new)] + rest
    return ("*", tuple(rest))


# -- numerical evaluation -------------------------------------------------------------------

def _reduce_eta(z):
    """Return ``(factor, w)`` with ``eta(z) = factor * eta(w)`` and ``w`` in the fundamental domain."""
    factor = mpmath.mpc(1)
    for _ in range(10000):
        n = int(mpmath.nint(z.real))
        if n:
            z = z - n
            factor *= mpmath.expjpi(mpmath.mpf(n) / 12)
        if abs(z) < 1 - mpmath.mpf(2) ** (-mpmath.mp.prec + 10):
            w = -1 / z
            # eta(z) = eta(-1/w) = sqrt(-i w) eta(w)
            factor *= mpmath.sqrt(-1j * w)
            z = w
            continue
        return factor, z
    raise PrecisionLoss("argument reduction did not terminate")


def _eta_series(z):
    q = mpmath.expjpi(2 * z)
    eps = mpmath.mpf(2) ** (-mpmath.mp.prec - 8)
    s = mpmath.mpc(1)
    k = 1
    while True:
        e1 = k * (3 * k - 1) // 2
        t = q ** e1 * (1 + q ** k)
        s += -t if k % 2 else t
        if abs(t) < eps:
            break
        k += 1
    return mpmath.expjpi(z / 12) * s


def eta_value(z):
    factor, w = _reduce_eta(z)
    return factor * _eta_series(w)


def _reduce_sl2(z):
    for _ in range(10000):
        n = int(mpmath.nint(z.real))
        z = z - n
        if abs(z) < 1 - mpmath.mpf(2) ** (-mpmath.mp.prec + 10):
            z = -1 / z
            continue
        return z
    raise PrecisionLoss("argument reduction did not terminate")


def j_value(z):
    w = _reduce_sl2(z)
    q = mpmath.expjpi(2 * w)
    eps = mpmath.mpf(2) ** (-mpmath.mp.prec - 8)
    e4 = mpmath.mpc(1)
    n = 1
    while True:
        t = 240 * sigma(n, 3) * q ** n
        e4 += t
        if abs(t) < eps:
            break
        n += 1
    delta = eta_value(w) ** 24
    return e4 ** 3 / delta


def _eval(e, tau):
    kind = e[0]
    if kind == "const":
        c = e[1]
        return mpmath.mpf(c.numerator) / c.denominator
    if kind == "eta":
        return eta_value(e[1] * tau)
    if kind == "j":
        return j_value(e[1] * tau)
    if kind == "+":
        s = mpmath.mpc(0)
        for x in e[1]:
            s += _eval(x, tau)
        return s
    if kind == "*":
        p = mpmath.mpc(1)
        for x in e[1]:
            p *= _eval(x, tau)
        return p
    return _eval(e[1], tau) ** e[2]


LOSS_BITS = 16


def eval_point(e, tau, prec_bits: int = 128):
    """Value of the tree at ``tau`` with relative accuracy ``2^(LOSS_BITS - prec_bits)``.

    Certified by evaluating at two working precisions; disagreement beyond the
    target raises :class:`PrecisionLoss`.
    """
    if mpmath.mpc(tau).imag <= 0:
        raise ValueError("tau must lie in the upper half plane")
    vals = []
    for guard in (24, 64):
        with mpmath.workprec(prec_bits + guard):
            vals.append(_eval(e, mpmath.mpc(tau)))
    with mpmath.workprec(prec_bits + 64):
        err = abs(vals[0] - vals[1])
        scale = max(mpmath.mpf(1), abs(vals[1]))
        if err > mpmath.mpf(2) ** (LOSS_BITS - prec_bits) * scale:
            raise PrecisionLoss(f"evaluation error {mpmath.nstr(err, 5)} exceeds target")
    with mpmath.workprec(prec_bits):
        return +vals[1]


# -- modular functions on Gamma_0(M) ----------------------------------------------------------

class ModFunc:
    """A weakly holomorphic modular function on ``Gamma_0(M)`` given by a tree."""

    def __init__(self, expr, M: int = 1, name: str | None = None):
        if not is_squarefree(M):
            raise ValueError(f"level {M} is not squarefree")
        if weight(expr) != 0:
            raise ValueError("a modular function must have weight 0")
        self.expr = expr
        self.M = M
        self.name = name or to_sexp(expr)
        self._cache = {}
        if self.expansion(1, 8).is_zero():
            raise ValueError("the zero function is not an admissible input")

    @classmethod
    def from_sexp(cls, text: str, M: int = 1, name=None):
        return cls(parse(text), M, name)

    def cusp_divisors(self):
        return divisors(self.M)

    def expansion(self, D: int = 1, trunc: int = 10) -> QSeries:
        """Expansion of ``F | W_D`` at infinity, i.e. of ``F`` at the cusp ``I_D``."""
        key = (D, trunc)
        if key not in self._cache:
            tree = self.expr if D == 1 else atkin_lehner(self.expr, D, self.M)
            self._cache[key] = expand(tree, trunc).normalized()
        s = self._cache[key]
        if s.den != 1:
            raise UnsupportedExpression(f"expansion at cusp {D} has fractional exponents")
        return s

    def principal_part(self, D: int = 1) -> dict:
        """``{n: c+(-n)}`` for ``n >= 1``."""
        s = self.expansion(D, 1)
        return {-e: c for e, c in s.items() if e < 0}

    def constant_term(self, D: int = 1) -> Fraction:
        return self.expansion(D, 1)[0]

    def order(self, D: int = 1) -> int:
        s = self.expansion(D, 1)
        return s.val if not s.is_zero() else 1

    def pole_orders(self) -> dict:
        return {D: -self.order(D) for D in self.cusp_divisors()}

    def value(self, tau, prec_bits: int = 128):
        return eval_point(self.expr, tau, prec_bits)

    def is_atkin_lehner_symmetric(self, trunc: int = 20) -> bool:
        base = self.expansion(1, trunc)
        return all(self.expansion(D, trunc) == base for D in self.cusp_divisors())

    def __repr__(self):
        return f"ModFunc({self.name}, M={self.M})"


J_EXPR = add(jfun(1), const(-744))

# eta quotients on Gamma_0(M) with a simple pole at infinity and holomorphic elsewhere
_HAUPT = {
    2: {1: 24, 2: -24},
    3: {1: 12, 3: -12},
    5: {1: 6, 5: -6},
    7: {1: 4, 7: -4},
    13: {1: 2, 13: -2},
    6: {1: 5, 2: -1, 3: 1, 6: -5},
    10: {1: -1, 2: 1, 5: 5, 10: -5},
}


def symmetrized(exps: dict, M: int):
    """``sum_{D | M} E | W_D`` minus its constant term, for an eta quotient ``E``."""
    E = eta_quotient(exps)
    terms = [atkin_lehner(E, D, M) for D in divisors(M)]
    tree = add(*terms)
    c0 = expand(tree, 1)[0]
    return add(*terms, const(-c0))


def catalog(name: str) -> ModFunc:
    """Built-in inputs: ``J`` (level 1) and ``m<M>`` for M in 2, 3, 5, 6, 7, 10, 13.

    ``m<M>`` is the Atkin-Lehner symmetrization of an eta-quotient hauptmodul of
    ``Gamma_0(M)``, shifted to vanishing constant term; its expansion is the same
    at every cusp.
    """
    return _catalog(name.removeprefix("catalog:"))


@lru_cache(maxsize=None)
def _catalog(name: str) -> ModFunc:
    if name == "J":
        return ModFunc(J_EXPR, 1, "J")
    if name.startswith("m") and name[1:].isdigit() and int(name[1:]) in _HAUPT:
        M = int(name[1:])
        return ModFunc(symmetrized(_HAUPT[M], M), M, name)
    raise KeyError(f"unknown catalog function {name!r}")


CATALOG_NAMES = ["J"] + [f"m{M}" for M in sorted(_HAUPT)]

"""Positive definite binary quadratic forms, Gamma_0(M)-classes, Heegner points."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .arith import is_squarefree, kronecker

Matrix = tuple  # ((p, q), (r, s))

IDENTITY = ((1, 0), (0, 1))


class NotPositiveDefinite(ValueError):
    pass


class InvalidDiscriminant(ValueError):
    pass


class NoRepresentableValue(RuntimeError):
    pass


def matmul(g, h):
    (a, b), (c, d) = g
    (e, f), (x, y) = h
    return ((a * e + b * x, a * f + b * y), (c * e + d * x, c * f + d * y))


def matinv(g):
    (a, b), (c, d) = g
    return ((d, -b), (-c, a))


@dataclass(frozen=True)
class QuadForm:
    """``a x^2 + b x y + c y^2`` considered at level ``M`` (``M | a``)."""

    a: int
    b: int
    c: int
    M: int = 1

    def __post_init__(self):
        if self.a % self.M:
            raise ValueError(f"level {self.M} does not divide a={self.a}")

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def content(self) -> int:
        return math.gcd(math.gcd(self.a, self.b), self.c)

    def __call__(self, x: int, y: int) -> int:
        return self.a * x * x + self.b * x * y + self.c * y * y

    def act(self, g) -> "QuadForm":
        """``Q o g``: the form ``(x, y) -> Q(g (x, y)^T)``; its root is ``g^{-1} alpha_Q``."""
        (p, q), (r, s) = g
        a, b, c = self.a, self.b, self.c
        na = a * p * p + b * p * r + c * r * r
        nb = 2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s
        nc = a * q * q + b * q * s + c * s * s
        return QuadForm(na, nb, nc, self.M)

    def at_level(self, M: int) -> "QuadForm":
        return QuadForm(self.a, self.b, self.c, M)

    def coeffs(self):
        return (self.a, self.b, self.c)


def reduce(Q: QuadForm):
    """Gauss reduction under SL_2(Z); returns ``(R, g)`` with ``R = Q.act(g)``."""
    if Q.disc >= 0 or Q.a <= 0:
        raise NotPositiveDefinite(f"{Q} is not positive definite")
    a, b, c = Q.a, Q.b, Q.c
    g = IDENTITY
    while True:
        # translate b into (-a, a]
        k = (a - b) // (2 * a)
        if k:
            c = a * k * k + b * k + c
            b = b + 2 * a * k
            g = matmul(g, ((1, k), (0, 1)))
        if a > c or (a == c and b < 0):
            a, b, c = c, -b, a
            g = matmul(g, ((0, -1), (1, 0)))
            continue
        break
    R = QuadForm(a, b, c)
    assert Q.at_level(1).act(g) == R
    return R, g


def reduced_forms(d: int):
    """All reduced positive definite forms of discriminant ``-d`` (primitive or not)."""
    if d <= 0 or (-d) % 4 not in (0, 1):
        raise InvalidDiscriminant(f"-{d} is not a negative discriminant")
    out = []
    a = 1
    while 3 * a * a <= d:
        for b in range(-a + 1, a + 1):
            if (b * b + d) % (4 * a):
                continue
            c = (b * b + d) // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            out.append(QuadForm(a, b, c))
        a += 1
    return out


def stabilizer(Q: QuadForm):
    """Stabilizer of ``Q`` in SL_2(Z), as a list of matrices (contains -1)."""
    k = Q.content
    a, b, c = Q.a // k, Q.b // k, Q.c // k
    D = b * b - 4 * a * c
    units = {-4: [(0, 1), (0, -1), (2, 0), (-2, 0)],
             -3: [(1, 1), (1, -1), (-1, 1), (-1, -1), (2, 0), (-2, 0)]}.get(D, [(2, 0), (-2, 0)])
    out = []
    for t, u in units:
        g = (((t - b * u) // 2, -c * u), (a * u, (t + b * u) // 2))
        if Q.at_level(1).act(g) != Q.at_level(1):
            g = matinv(g)
        assert Q.at_level(1).act(g) == Q.at_level(1)
        out.append(g)
    return out


def _p1_points(M: int):
    pts = {}
    units = [u for u in range(1, M + 1) if math.gcd(u, M) == 1] if M > 1 else [1]
    for x in range(M):
        for y in range(M):
            if math.gcd(math.gcd(x, y), M) != 1:
                continue
            key = min(((u * x) % M, (u * y) % M) for u in units)
            pts[key] = True
    return sorted(pts) if M > 1 else [(0, 0)]


def _p1_canon(x, y, M):
    if M == 1:
        return (0, 0)
    return min(((u * x) % M, (u * y) % M) for u in range(1, M) if math.gcd(u, M) == 1)


def _complete(x: int, y: int, M: int):
    """An SL_2(Z) matrix whose first column is congruent to ``(x, y)`` mod ``M``."""
    for i in range(0, 50):
        for j in range(0, 50):
            for sx in (1, -1):
                X, Y = x + sx * i * M, y + j * M
                if math.gcd(X, Y) == 1:
                    g, s, t = _egcd(X, Y)
                    # s X + t Y = 1  ->  [[X, -t], [Y, s]]
                    return ((X, -t), (Y, s))
    raise RuntimeError("no coprime lift found")


def _egcd(a, b):
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, x, y = _egcd(b, a % b)
    return g, y, x - (a // b) * y


@dataclass(frozen=True)
class ClassRep:
    form: QuadForm
    w: int

    def as_dict(self):
        return {"a": self.form.a, "b": self.form.b, "c": self.form.c, "w": self.w}


def class_reps(d: int, M: int = 1):
    """One representative per Gamma_0(M)-class of positive definite ``[a,b,c]``, ``M | a``,
    of discriminant ``-d``, with ``w`` the order of its stabilizer in ``Gamma_0(M)/{+-1}``.

    Gamma_0(M)-classes inside the SL_2(Z)-class of ``Q0`` correspond to orbits of
    ``Stab(Q0)`` on the points ``P`` of ``P^1(Z/M)`` with ``Q0(P) = 0 mod M``.
    """
    if d <= 0 or (-d) % 4 not in (0, 1):
        raise InvalidDiscriminant(f"-{d} is not a negative discriminant")
    if not is_squarefree(M):
        raise ValueError(f"level {M} is not squarefree")
    out = []
    for Q0 in reduced_forms(d):
        stab = stabilizer(Q0)
        pts = [p for p in _p1_points(M) if Q0(*p) % M == 0]
        seen = set()
        for p in pts:
            if p in seen:
                continue
            orbit = set()
            fix = 0
            for s in stab:
                (a, b), (c, e) = s
                img = _p1_canon(a * p[0] + b * p[1], c * p[0] + e * p[1], M)
                orbit.add(img)
                if img == p:
                    fix += 1
            seen |= orbit
            g = _complete(p[0], p[1], M) if M > 1 else IDENTITY
            Q = Q0.act(g)
            out.append(ClassRep(QuadForm(Q.a, Q.b, Q.c, M), fix // 2))
    return out


@dataclass(frozen=True)
class HeegnerPoint:
    form: QuadForm
    approx: mpmath.mpc
    prec_bits: int

    @property
    def surd(self):
        """``(b, a, disc)`` encoding ``(-b + sqrt(disc)) / (2a)``."""
        return (self.form.b, self.form.a, self.form.disc)


def heegner_point(Q: QuadForm, prec_bits: int = 128) -> HeegnerPoint:
    if Q.disc >= 0 or Q.a <= 0:
        raise NotPositiveDefinite(f"{Q} is not positive definite")
    with mpmath.workprec(prec_bits):
        z = mpmath.mpc(-Q.b, mpmath.sqrt(-Q.disc)) / (2 * Q.a)
    return HeegnerPoint(Q, z, prec_bits)


@dataclass(frozen=True)
class GenusCharData:
    delta: int
    r: int
    M: int = 1

    def __post_init__(self):
        if self.delta == 1 or self.delta % 4 not in (0, 1):
            raise ValueError(f"{self.delta} is not an admissible discriminant")
        if math.gcd(self.delta, 2 * self.M) != 1:
            raise ValueError("gcd(delta, 2M) must be 1")
        if (self.delta - self.r * self.r) % (4 * self.M):
            raise ValueError("delta must be r^2 mod 4M")

    @property
    def sign(self) -> int:
        return 1 if self.delta > 0 else -1


SEARCH_BOUND = 60


def genus_char(chi: GenusCharData, Q: QuadForm) -> int:
    """Generalized genus character of the lattice vector attached to ``Q = [M a, b, c]``."""
    M, delta = chi.M, chi.delta
    if Q.a % M:
        raise ValueError("form is not of level M")
    a, b, c = Q.a // M, Q.b, Q.c
    D = Q.disc  # = b^2 - 4 M a c
    if D % delta:
        return 0
    quot = D // delta
    if not any((x * x - quot) % (4 * M) == 0 for x in range(2 * M)):
        return 0
    if math.gcd(math.gcd(math.gcd(a, b), c), delta) != 1:
        return 0
    splits = [(m1, M // m1) for m1 in range(1, M + 1) if M % m1 == 0]
    for bound in range(1, SEARCH_BOUND + 1):
        for m1, m2 in splits:
            for x in range(-bound, bound + 1):
                for y in (-bound, bound) if abs(x) != bound else range(-bound, bound + 1):
                    n = m1 * a * x * x + b * x * y + m2 * c * y * y
                    if n and math.gcd(n, delta) == 1:
                        return kronecker(delta, n)
    raise NoRepresentableValue(f"no value prime to {delta} represented by {Q} below {SEARCH_BOUND}")


def represented_values(Q: QuadForm, bound: int, M: int = 1):
    """Values ``[M1 a, b, M2 c](x, y)`` for all splittings, with ``|x|, |y| <= bound``."""
    a, b, c = Q.a // M, Q.b, Q.c
    out = set()
    for m1 in range(1, M + 1):
        if M % m1:
            continue
        m2 = M // m1
        for x in range(-bound, bound + 1):
            for y in range(-bound, bound + 1):
                out.add(m1 * a * x * x + b * x * y + m2 * c * y * y)
    return out


def degree(d: int, M: int = 1) -> Fraction:
    """``sum 1/w`` over the Gamma_0(M)-classes of discriminant ``-d``."""
    return sum((Fraction(1, r.w) for r in class_reps(d, M)), Fraction(0))

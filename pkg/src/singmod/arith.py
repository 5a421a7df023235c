"""Exact arithmetic: truncated Laurent q-series, arithmetic functions, floats.

A :class:`QSeries` stores coefficients of ``q^(e/den)`` for integer ``e`` and
is known modulo ``q^(trunc/den)``.  ``trunc=None`` marks an exact (finite)
series.  Every operation propagates truncation; nothing is silently extended.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import mpmath

__all__ = [
    "QSeries",
    "NotInvertible",
    "sigma",
    "sigma1",
    "sigma1_ratio",
    "kronecker",
    "hurwitz",
    "divisors",
    "factorize",
    "is_squarefree",
    "BigComplex",
]

BigComplex = mpmath.mpc


class NotInvertible(ArithmeticError):
    pass


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def _min_trunc(*ts):
    ts = [t for t in ts if t is not None]
    return min(ts) if ts else None


class QSeries:
    """Laurent series in ``q^(1/den)`` with exact rational coefficients.

    Coefficients are held as integers over one common positive denominator.
    """

    __slots__ = ("den", "val", "num", "scale", "trunc")

    def __init__(self, coeffs=(), val: int = 0, den: int = 1, trunc: int | None = None):
        fr = [Fraction(c) for c in coeffs]
        nums, scale = _to_ints(fr)
        self._set(nums, scale, val, den, trunc)

    @classmethod
    def _raw(cls, nums, scale: int, val: int, den: int, trunc) -> "QSeries":
        obj = cls.__new__(cls)
        obj._set(nums, scale, val, den, trunc)
        return obj

    def _set(self, nums, scale, val, den, trunc):
        if den < 1:
            raise ValueError("den must be positive")
        if trunc is not None:
            nums = nums[: max(0, trunc - val)]
        lo = 0
        n = len(nums)
        while lo < n and not nums[lo]:
            lo += 1
        hi = n
        while hi > lo and not nums[hi - 1]:
            hi -= 1
        nums = nums[lo:hi]
        if scale < 0:
            scale = -scale
            nums = [-x for x in nums]
        g = math.gcd(scale, *nums) if nums else scale
        if g > 1:
            nums = [x // g for x in nums]
            scale //= g
        self.den = den
        self.num = tuple(nums)
        self.scale = scale if nums else 1
        self.trunc = trunc
        self.val = val + lo if nums else (trunc if trunc is not None else 0)

    # -- constructors ----------------------------------------------------
    @classmethod
    def from_dict(cls, terms: dict, den: int = 1, trunc: int | None = None) -> "QSeries":
        terms = {e: c for e, c in terms.items() if c != 0 and (trunc is None or e < trunc)}
        if not terms:
            return cls((), 0, den, trunc)
        lo, hi = min(terms), max(terms)
        return cls([terms.get(e, 0) for e in range(lo, hi + 1)], lo, den, trunc)

    @classmethod
    def constant(cls, c, trunc: int | None = None, den: int = 1) -> "QSeries":
        return cls([c], 0, den, trunc)

    @classmethod
    def monomial(cls, e, c=1, trunc: int | None = None) -> "QSeries":
        """``c * q^e`` for rational ``e``."""
        e = Fraction(e)
        return cls([c], e.numerator, e.denominator, trunc)

    # -- basic access ----------------------------------------------------
    @property
    def coeffs(self):
        return tuple(Fraction(x, self.scale) for x in self.num)

    def is_zero(self) -> bool:
        return not self.num

    @property
    def exact(self) -> bool:
        return self.trunc is None

    def __getitem__(self, e: int) -> Fraction:
        """Coefficient at exponent numerator ``e`` (exponent ``e/den``)."""
        if self.trunc is not None and e >= self.trunc:
            raise IndexError(f"exponent {e}/{self.den} beyond truncation {self.trunc}/{self.den}")
        i = e - self.val
        if 0 <= i < len(self.num):
            return Fraction(self.num[i], self.scale)
        return Fraction(0)

    def coeff(self, x) -> Fraction:
        """Coefficient of ``q^x`` for rational ``x``."""
        x = Fraction(x)
        num = x * self.den
        if num.denominator != 1:
            return Fraction(0)
        return self[int(num)]

    def items(self):
        for i, c in enumerate(self.num):
            if c:
                yield self.val + i, Fraction(c, self.scale)

    def trunc_exponent(self):
        return None if self.trunc is None else Fraction(self.trunc, self.den)

    def valuation(self):
        return Fraction(self.val, self.den)

    # -- den handling ----------------------------------------------------
    def lift(self, den: int) -> "QSeries":
        if den % self.den:
            raise ValueError(f"cannot lift den {self.den} to {den}")
        k = den // self.den
        if k == 1:
            return self
        nums = [0] * (max(0, (len(self.num) - 1) * k + 1))
        nums[::k] = self.num
        return QSeries._raw(nums, self.scale, self.val * k, den,
                            None if self.trunc is None else self.trunc * k)

    def normalized(self) -> "QSeries":
        """Smallest den compatible with the support and truncation."""
        g = self.den
        for e, _ in self._int_items():
            g = math.gcd(g, e)
            if g == 1:
                return self
        if self.trunc is not None:
            g = math.gcd(g, self.trunc)
        if g == 1:
            return self
        nums = list(self.num[::g]) if self.num else []
        return QSeries._raw(nums, self.scale, self.val // g, self.den // g,
                            None if self.trunc is None else self.trunc // g)

    def _int_items(self):
        for i, c in enumerate(self.num):
            if c:
                yield self.val + i, c

    def _common(self, other):
        d = _lcm(self.den, other.den)
        return self.lift(d), other.lift(d)

    def rescale(self, t: int) -> "QSeries":
        """Substitute ``q -> q^t`` (i.e. ``f(t*tau)``)."""
        if t < 1:
            raise ValueError("t must be positive")
        nums = [0] * (max(0, (len(self.num) - 1) * t + 1))
        nums[::t] = self.num
        return QSeries._raw(nums, self.scale, self.val * t, self.den,
                            None if self.trunc is None else self.trunc * t).normalized()

    def shift(self, x) -> "QSeries":
        """Multiply by ``q^x``."""
        return self * QSeries.monomial(x)

    def truncate(self, trunc: int) -> "QSeries":
        """Drop terms at exponents ``>= trunc/den``."""
        if self.trunc is not None and trunc > self.trunc:
            raise ValueError("cannot extend truncation")
        return QSeries._raw(list(self.num), self.scale, self.val, self.den, trunc)

    def truncate_at(self, x) -> "QSeries":
        """Truncate at rational exponent ``x``."""
        x = Fraction(x)
        d = _lcm(self.den, x.denominator)
        s = self.lift(d)
        return s.truncate(math.ceil(x * d)).normalized()

    # -- ring operations ---------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, QSeries):
            other = QSeries.constant(other)
        a, b = self._common(other)
        t = _min_trunc(a.trunc, b.trunc)
        if not a.num:
            return QSeries._raw(list(b.num), b.scale, b.val, a.den, t)
        if not b.num:
            return QSeries._raw(list(a.num), a.scale, a.val, a.den, t)
        lo = min(a.val, b.val)
        hi = max(a.val + len(a.num), b.val + len(b.num))
        if t is not None:
            hi = min(hi, t)
        scale = _lcm(a.scale, b.scale)
        fa, fb = scale // a.scale, scale // b.scale
        nums = [0] * max(0, hi - lo)
        for x, f in ((a, fa), (b, fb)):
            off = x.val - lo
            for i, c in enumerate(x.num[: max(0, hi - x.val)]):
                nums[off + i] += c * f
        return QSeries._raw(nums, scale, lo, a.den, t)

    __radd__ = __add__

    def __neg__(self):
        return QSeries._raw([-c for c in self.num], self.scale, self.val, self.den, self.trunc)

    def __sub__(self, other):
        if not isinstance(other, QSeries):
            other = QSeries.constant(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def _scalar_mul(self, c):
        c = Fraction(c)
        return QSeries._raw([x * c.numerator for x in self.num], self.scale * c.denominator,
                            self.val, self.den, self.trunc)

    def __mul__(self, other):
        if not isinstance(other, QSeries):
            return self._scalar_mul(other)
        a, b = self._common(other)
        # a known mod q^Ta with lowest term q^va: product known mod q^min(Ta+vb, Tb+va)
        ta = None if a.trunc is None else a.trunc + b.val
        tb = None if b.trunc is None else b.trunc + a.val
        t = _min_trunc(ta, tb)
        if not a.num or not b.num:
            return QSeries._raw([], 1, 0, a.den, t)
        n = len(a.num) + len(b.num) - 1
        if t is not None:
            n = max(0, min(n, t - a.val - b.val))
        out = _conv_int(a.num, b.num, n)
        return QSeries._raw(out, a.scale * b.scale, a.val + b.val, a.den, t)

    __rmul__ = __mul__

    def inverse(self) -> "QSeries":
        if not self.num:
            raise NotInvertible("series is O(q^trunc)")
        if self.trunc is None:
            if len(self.num) == 1:
                return QSeries([Fraction(self.scale, self.num[0])], -self.val, self.den, None)
            raise NotInvertible("exact non-monomial series needs a truncation before inversion")
        n = self.trunc - self.val  # relative precision
        A, sa = self.num, self.scale
        # b = B / sb; Newton step b <- b - b (a b - 1)
        a0 = A[0]
        B, sb = [sa], a0
        if sb < 0:
            B, sb = [-sa], -a0
        k = 1
        while k < n:
            k = min(2 * k, n)
            E = _conv_int(A[:k], B, k)
            E[0] -= sa * sb
            C = _conv_int(B, E, k)
            B = [(B[i] if i < len(B) else 0) * sa * sb - C[i] for i in range(k)]
            sb = sa * sb * sb
            g = math.gcd(sb, *B)
            if g > 1:
                B = [x // g for x in B]
                sb //= g
        return QSeries._raw(B, sb, -self.val, self.den, self.trunc - 2 * self.val)

    def __truediv__(self, other):
        if not isinstance(other, QSeries):
            return self._scalar_mul(1 / Fraction(other))
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, e: int):
        if not isinstance(e, int):
            raise TypeError("integer exponents only")
        if e < 0:
            return self.inverse() ** (-e)
        result = QSeries.constant(1, den=self.den)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def deriv(self) -> "QSeries":
        """``q d/dq``."""
        return QSeries._raw([c * (self.val + i) for i, c in enumerate(self.num)],
                            self.scale * self.den, self.val, self.den, self.trunc)

    # -- comparison / text -----------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, QSeries):
            if self.trunc is None and len(self.num) <= 1:
                return (self.coeffs[0] if self.num and self.val == 0 else 0) == other and (
                    not self.num or self.val == 0)
            return NotImplemented
        a, b = self._common(other)
        return (a.trunc == b.trunc and a.val == b.val and a.num == b.num
                and a.scale == b.scale)

    def __hash__(self):
        s = self.normalized()
        return hash((s.den, s.val, s.num, s.scale, s.trunc))

    def agrees_with(self, other, upto=None) -> bool:
        """Coefficientwise equality on the common known range (optionally capped)."""
        a, b = self._common(other)
        t = _min_trunc(a.trunc, b.trunc)
        if upto is not None:
            cap = Fraction(upto) * a.den
            cap = math.ceil(cap)
            t = cap if t is None else min(t, cap)
        if t is None:
            return a == b
        return a.truncate(t) == b.truncate(t)

    def first_mismatch(self, other):
        """Smallest rational exponent where the two differ within the common range."""
        a, b = self._common(other)
        t = _min_trunc(a.trunc, b.trunc)
        lo = min(a.val, b.val)
        hi = t if t is not None else max(a.val + len(a.num), b.val + len(b.num))
        for e in range(lo, hi):
            if a[e] != b[e]:
                return Fraction(e, a.den)
        return None

    def to_text(self) -> str:
        lines = [f"den={self.den} trunc={'inf' if self.trunc is None else self.trunc}"]
        for e, c in self.items():
            lines.append(f"{e} {c.numerator}/{c.denominator}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "QSeries":
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        head = dict(kv.split("=") for kv in lines[0].split())
        den = int(head["den"])
        trunc = None if head["trunc"] == "inf" else int(head["trunc"])
        terms = {}
        for ln in lines[1:]:
            e, c = ln.split()
            terms[int(e)] = Fraction(c)
        return cls.from_dict(terms, den, trunc)

    def __repr__(self):
        parts = []
        items = list(self.items())
        for e, c in items[:8]:
            x = Fraction(e, self.den)
            parts.append(f"{c}*q^{x}" if x else f"{c}")
        tail = "" if self.trunc is None else f" + O(q^{Fraction(self.trunc, self.den)})"
        more = " + ..." if len(items) > 8 else ""
        return "QSeries(" + (" + ".join(parts) or "0") + more + tail + ")"


def _to_ints(cs):
    d = 1
    for c in cs:
        d = _lcm(d, c.denominator)
    return [c.numerator * (d // c.denominator) for c in cs], d


try:  # GMP multiplication is much faster on the packed integers
    from gmpy2 import mpz as _bigint
except ImportError:  # pragma: no cover
    _bigint = int

_DENSE = 48


def _pack(xs, kb: int) -> int:
    pos = b"".join((x if x > 0 else 0).to_bytes(kb, "little") for x in xs)
    neg = b"".join((-x if x < 0 else 0).to_bytes(kb, "little") for x in xs)
    return int.from_bytes(pos, "little") - int.from_bytes(neg, "little")


def _kronecker_mul(ia, ib, n):
    """Integer convolution by packing both sequences into single big integers."""
    bound = max(map(abs, ia)) * max(map(abs, ib)) * min(len(ia), len(ib))
    kb = (bound.bit_length() + 2 + 7) // 8
    ia, ib = ia[:n], ib[:n]
    z = int(_bigint(_pack(ia, kb)) * _bigint(_pack(ib, kb)))
    m = min(n, len(ia) + len(ib) - 1)
    half = 1 << (8 * kb - 1)
    offset = int.from_bytes(half.to_bytes(kb, "little") * m, "little")
    z = (z & ((1 << (8 * kb * m)) - 1)) + offset
    raw = z.to_bytes(kb * m + kb + 1, "little")
    out = [int.from_bytes(raw[i * kb:(i + 1) * kb], "little") - half for i in range(m)]
    return out + [0] * (n - m)


def _conv_int(ia, ib, n):
    """First ``n`` terms of the Cauchy product of two integer sequences."""
    if n <= 0:
        return []
    nza = sum(1 for x in ia[:n] if x)
    nzb = sum(1 for x in ib[:n] if x)
    if min(nza, nzb) > _DENSE:
        return _kronecker_mul(list(ia), list(ib), n)
    out = [0] * n
    pb = [(j, y) for j, y in enumerate(ib[:n]) if y]
    for i, x in enumerate(ia[:n]):
        if not x:
            continue
        lim = n - i
        for j, y in pb:
            if j >= lim:
                break
            out[i + j] += x * y
    return out


def _convolve(a, b, n):
    """Truncated Cauchy product of Fraction sequences (n terms, or full if None)."""
    ia, da = _to_ints(a)
    ib, db = _to_ints(b)
    full = len(ia) + len(ib) - 1
    n = full if n is None else max(0, min(n, full))
    d = da * db
    return [Fraction(v, d) for v in _conv_int(ia, ib, n)]


# -- arithmetic functions -------------------------------------------------------

def factorize(n: int) -> dict:
    n = abs(n)
    f = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            f[p] = f.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        f[n] = f.get(n, 0) + 1
    return f


def divisors(n: int) -> list:
    ds = [1]
    for p, k in factorize(n).items():
        ds = [d * p**i for d in ds for i in range(k + 1)]
    return sorted(ds)


def is_squarefree(n: int) -> bool:
    return n >= 1 and all(k == 1 for k in factorize(n).values())


@lru_cache(maxsize=None)
def sigma(n: int, k: int = 1) -> int:
    if n < 1:
        raise ValueError("sigma needs n >= 1")
    s = 1
    for p, e in factorize(n).items():
        s *= sum(p ** (k * i) for i in range(e + 1))
    return s


def sigma1(n: int) -> int:
    return sigma(n, 1)


def sigma1_ratio(n: int, d: int) -> int:
    """``sigma1(n/d)``, zero when ``d`` does not divide ``n``."""
    return sigma1(n // d) if n % d == 0 else 0


def _jacobi(a: int, n: int) -> int:
    # n odd positive
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol ``(a|n)``."""
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if a % 2 == 0:
            return 0
        if v % 2 and a % 8 in (3, 5):
            result = -result
    return result * _jacobi(a, n) if n > 1 else result


def hurwitz(n: int) -> Fraction:
    """Hurwitz class number ``H(n)`` by enumerating reduced forms of discriminant ``-n``.

    Forms equivalent to multiples of ``x^2+y^2`` count 1/2, of ``x^2+xy+y^2`` count 1/3.
    """
    if n == 0:
        return Fraction(-1, 12)
    if n < 0 or n % 4 in (1, 2):
        return Fraction(0)
    total = Fraction(0)
    a = 1
    while 3 * a * a <= n:
        for b in range(-a + 1, a + 1):
            if (b * b + n) % (4 * a):
                continue
            c = (b * b + n) // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if b == 0 and a == c:
                total += Fraction(1, 2)
            elif a == b == c:
                total += Fraction(1, 3)
            else:
                total += 1
        a += 1
    return total

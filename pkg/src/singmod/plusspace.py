"""Weakly holomorphic forms in the Kohnen plus space and the pairing criterion.

Weight 1/2 forms on ``Gamma_0(4M)`` in the plus space have exponents ``n`` with
``n = r^2 mod 4M``; weight 3/2 forms have ``n = -r^2 mod 4M``.  For every
admissible pole order ``delta`` there is a unique weight 1/2 form

    f_delta = q^(-delta) + O(q)

with vanishing coefficients at all other non-positive exponents (``f_0 = theta``).
A weight 3/2 series ``g = sum a(n) q^n`` is modular exactly when

    sum_n a(n) c_f(-n) / mu(n) = 0

for every such ``f``, where ``mu(n)`` counts ``r mod 2M`` with ``r^2 = -n mod 4M``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .arith import QSeries, is_squarefree, sigma
from .modform import delta_qexp, j_qexp, level_one_basis, theta_qexp

__all__ = [
    "SpanDeficient", "InsufficientTruncation", "PlusSupportError", "PlusForm", "PairingReport",
    "half_basis", "three_halves_basis", "verify_modularity", "solve_constant", "mu",
    "admissible_poles", "export_basis", "import_basis", "rankin_cohen",
]

HALF = Fraction(1, 2)
THREE_HALVES = Fraction(3, 2)
MAX_WINDOW_M = 4


class SpanDeficient(RuntimeError):
    """The generating pool does not realize a required principal part."""


class InsufficientTruncation(ValueError):
    pass


class PlusSupportError(ValueError):
    pass


def _squares(M: int) -> set:
    return {(r * r) % (4 * M) for r in range(2 * M)}


def mu(n: int, M: int = 1) -> int:
    """Number of ``r mod 2M`` with ``r^2 = -n mod 4M`` (``n`` a weight 3/2 exponent)."""
    return sum(1 for r in range(2 * M) if (r * r + n) % (4 * M) == 0)


def in_plus(n: int, weight: Fraction, M: int = 1) -> bool:
    sign = 1 if weight == HALF else -1
    return (sign * n) % (4 * M) in _squares(M)


def admissible_poles(weight: Fraction, M: int, max_pole: int):
    """Pole orders ``delta >= 0`` with ``q^(-delta)`` plus-admissible (weight 3/2 excludes 0)."""
    lo = 0 if weight == HALF else 1
    return [d for d in range(lo, max_pole + 1) if in_plus(-d, weight, M)]


@dataclass
class PlusForm:
    weight: Fraction
    level: int
    pole: int
    series: QSeries
    witness: tuple = ()

    @property
    def M(self) -> int:
        return self.level // 4

    @property
    def principal_part(self) -> dict:
        return {e: c for e, c in self.series.items() if e < 0}

    def check_support(self):
        for e, c in self.series.items():
            if c and not in_plus(e, self.weight, self.M):
                raise PlusSupportError(f"coefficient at q^{e} violates the plus condition")


# -- exact linear algebra ---------------------------------------------------------------

def _rref(rows, ncols):
    """Reduced row echelon form of Fraction rows (lists); returns (rows, pivots)."""
    rows = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def _nullspace(matrix, ncols):
    """Basis of ``{x : matrix x = 0}``."""
    red, piv = _rref(matrix, ncols) if matrix else ([], [])
    free = [c for c in range(ncols) if c not in piv]
    out = []
    for f in free:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for row, p in zip(red, piv):
            x[p] = -row[f]
        out.append(x)
    return out


def _combine(coeffs, series):
    out = None
    for c, s in zip(coeffs, series):
        if c:
            out = s * c if out is None else out + s * c
    return out


# -- generating pools ------------------------------------------------------------------------

def _sturm_16(weight: Fraction) -> int:
    """Sturm bound for weight ``k`` on ``Gamma_0(16)``: ``k [SL_2(Z):Gamma_0(16)] / 12 = 2k``."""
    return math.ceil(2 * weight)


def _f2(trunc: int) -> QSeries:
    """``sum_{n odd} sigma_1(n) q^n = eta(4 tau)^8 / eta(2 tau)^4``, weight 2 on Gamma_0(4)."""
    return QSeries.from_dict({n: sigma(n, 1) for n in range(1, trunc, 2)}, 1, trunc)


def _monomial_pool(weight: Fraction, m: int, H: int):
    """``theta^a F2^b`` of weight ``weight + 12 m`` on ``Gamma_0(4)``, to ``q^H``."""
    k2 = int(2 * (weight + 12 * m))  # a + 4 b
    th = theta_qexp(H)
    f2 = _f2(H)
    th4 = (th ** 4).truncate(H)
    bmax = k2 // 4
    # theta^(k2 - 4b) for b = bmax, ..., 0 by repeated multiplication with theta^4
    thpow = {bmax: (th ** (k2 - 4 * bmax)).truncate(H)}
    for b in range(bmax - 1, -1, -1):
        thpow[b] = (thpow[b + 1] * th4).truncate(H)
    out = []
    f2pow = QSeries.constant(1)
    for b in range(bmax + 1):
        out.append((("theta", k2 - 4 * b, "F2", b), (thpow[b] * f2pow).truncate(H)))
        f2pow = (f2pow * f2).truncate(H)
    return out


def _binom(x: Fraction, n: int) -> Fraction:
    out = Fraction(1)
    for i in range(n):
        out = out * (x - i) / (i + 1)
    return out


def rankin_cohen(f: QSeries, kf: Fraction, g: QSeries, kg: Fraction, nu: int) -> QSeries:
    """``[f, g]_nu = sum_{r+s=nu} (-1)^r C(nu+kf-1, s) C(nu+kg-1, r) D^r f D^s g`` with ``D = q d/dq``."""
    out = None
    df = [f]
    dg = [g]
    for _ in range(nu):
        df.append(df[-1].deriv())
        dg.append(dg[-1].deriv())
    for r in range(nu + 1):
        s = nu - r
        c = (-1) ** r * _binom(Fraction(nu) + kf - 1, s) * _binom(Fraction(nu) + kg - 1, r)
        if c:
            term = (df[r] * dg[s]) * c
            out = term if out is None else out + term
    return out if out is not None else QSeries.constant(0, trunc=f.trunc)


def _bracket_pool(M: int, m: int, H: int):
    """Brackets ``[theta, G(4M tau)]_nu`` of weight ``1/2 + 12 m``, ``G = E4^a E6^b``, to ``q^H``."""
    th = theta_qexp(H)
    out = []
    n1 = H // (4 * M) + 2
    for nu in range(6 * m + 1):
        kg = 12 * m - 2 * nu
        for idx, G in enumerate(level_one_basis(kg, n1)):
            Gs = G.rescale(4 * M)
            br = rankin_cohen(th, HALF, Gs, Fraction(kg), nu)
            if not br.is_zero():
                out.append((("bracket", nu, kg, idx), br.truncate(H)))
    return out


def _delta_power_inverse(M: int, m: int, trunc: int) -> QSeries:
    """``Delta(4M tau)^(-m)`` known at least modulo ``q^trunc``."""
    n = trunc // (4 * M) + 2 * m + 2
    return (delta_qexp(n) ** m).inverse().rescale(4 * M)


def _window(weight, M, m, T, pool):
    """Plus forms ``P / Delta(4M tau)^m`` from a pool; returns ``{delta: (series, witness)}``."""
    shift = 4 * M * m
    H = T + shift
    if pool == "monomial":
        H = max(H, _sturm_16(weight + 12 * m) + 1)
        gens = _monomial_pool(weight, m, H)
        labels = [g[0] for g in gens]
        cols = [g[1] for g in gens]
        bad = [n for n in range(H) if not in_plus(n, weight, M)]
        bad = [n for n in bad if n <= _sturm_16(weight + 12 * m)]
        matrix = [[s[n] for s in cols] for n in bad]
        combos = _nullspace(matrix, len(cols))
    else:
        gens = _bracket_pool(M, m, H)
        labels = [g[0] for g in gens]
        cols = [g[1] for g in gens]
        combos = [[Fraction(int(i == j)) for j in range(len(cols))] for i in range(len(cols))]
    if not combos:
        return {}
    inv = _delta_power_inverse(M, m, H + 1)
    divided = [(_combine(x, cols) * inv).truncate(T) for x in combos]
    # echelon on the non-positive exponents -shift..0
    exps = list(range(-shift, 1))
    k = len(combos)
    rows = [[d[e] for e in exps] + [Fraction(int(i == j)) for j in range(k)]
            for i, d in enumerate(divided)]
    red, piv = _rref(rows, len(exps))
    out = {}
    for row, p in zip(red, piv):
        delta = -exps[p]
        y = row[len(exps):]
        series = _combine(y, divided)
        x = [sum((yj * cj[i] for yj, cj in zip(y, combos)), Fraction(0)) for i in range(len(cols))]
        witness = ("pool", pool, m, tuple((c, lab) for c, lab in zip(x, labels) if c))
        out[delta] = (series, witness)
    return out


def _j4(M: int, trunc: int) -> QSeries:
    n = trunc // (4 * M) + 2
    return (j_qexp(n) - 744).rescale(4 * M)


def _build(weight, M, max_pole, trunc, pool):
    if not is_squarefree(M):
        raise ValueError(f"level {M} is not squarefree")
    if max_pole < 0:
        raise ValueError("max_pole must be >= 0")
    W = 4 * M
    poles = admissible_poles(weight, M, max_pole)
    window = [d for d in admissible_poles(weight, M, W) if d < W]
    steps = max(0, max_pole - W) // W + 1
    T0 = trunc + W * steps
    base = {}
    for m in range(1, MAX_WINDOW_M + 1):
        base = _window(weight, M, m, T0, pool)
        if all(d in base for d in window):
            break
    else:
        missing = [d for d in window if d not in base]
        raise SpanDeficient(f"pool {pool!r} does not realize poles {missing} at level {4 * M}")
    forms = {}
    for d in sorted(set(window) | {d for d in base if d <= max_pole}):
        if d in base:
            forms[d] = base[d]
    normalize_zero = weight == HALF
    for d in admissible_poles(weight, M, max_pole):
        if d in forms:
            continue
        parent = d - W
        if parent not in forms:
            raise SpanDeficient(f"no form with pole {parent} to extend to pole {d}")
        ps = forms[parent][0]
        s = ps * _j4(M, ps.trunc + parent + W + 1)
        corr = []
        for e, c in list(s.items()):
            if e > 0 or e == -d or not c:
                continue
            if e == 0 and not normalize_zero:
                continue
            if -e not in forms:
                raise SpanDeficient(f"missing form with pole {-e}")
            s = s - forms[-e][0] * c
            corr.append((c, -e))
        forms[d] = (s, ("jmul", parent, tuple(corr)))
    out = []
    for d in poles:
        s, wit = forms[d]
        te = s.trunc_exponent()
        if te is not None and te < trunc:
            raise InsufficientTruncation(f"form with pole {d} known only to q^{te}")
        f = PlusForm(weight, 4 * M, d, s.truncate(trunc), wit)
        out.append(f)
    for f in out:
        _check_normalized(f)
    return out


def _check_normalized(f: PlusForm):
    f.check_support()
    s = f.series
    for e in range(min(s.val, -f.pole), 1):
        want = 1 if e == -f.pole else 0
        if e == 0 and f.weight != HALF and f.pole:
            continue
        if s[e] != want:
            raise SpanDeficient(f"form with pole {f.pole} is not normalized at q^{e}")


def half_basis(M: int = 1, max_pole: int = 20, trunc: int = 10, pool: str | None = None):
    """``[f_delta]`` for admissible ``0 <= delta <= max_pole``, known modulo ``q^trunc``.

    ``pool`` is ``"monomial"`` (theta^a F2^b with plus conditions imposed up to the
    Sturm bound, M = 1 only) or ``"bracket"`` (Rankin-Cohen brackets of theta with
    level one forms at ``4M tau``).  Pole orders beyond ``4M`` come from multiplying
    by ``J(4M tau)`` and reducing.
    """
    pool = pool or ("monomial" if M == 1 else "bracket")
    if pool == "monomial" and M != 1:
        raise ValueError("the monomial pool lives on Gamma_0(4)")
    return _build(HALF, M, max_pole, trunc, pool)


def three_halves_basis(M: int = 1, max_pole: int = 20, trunc: int = 10):
    """``[g_d]`` with ``g_d = q^(-d) + O(1)`` for admissible ``1 <= d <= max_pole`` (M = 1)."""
    if M != 1:
        raise ValueError("weight 3/2 bases are constructed at level 4 only")
    return _build(THREE_HALVES, M, max_pole, trunc, "monomial")


def rebuild(form: PlusForm, basis, trunc: int) -> QSeries:
    """Re-expand a form from its construction witness (``basis`` holds lower pole forms)."""
    by_pole = {f.pole: f for f in basis}
    kind = form.witness[0]
    M = form.M
    if kind == "pool":
        _, pool, m, terms = form.witness
        H = trunc + 4 * M * m
        if pool == "monomial":
            gens = dict(_monomial_pool(form.weight, m, max(H, _sturm_16(form.weight + 12 * m) + 1)))
        else:
            gens = dict(_bracket_pool(M, m, H))
        inv = _delta_power_inverse(M, m, H + 1)
        total = _combine([c for c, _ in terms], [gens[lab] for _, lab in terms])
        return (total * inv).truncate(trunc)
    _, parent, corr = form.witness
    p = rebuild(by_pole[parent], basis, trunc + 4 * M)
    s = p * _j4(M, trunc + parent + 4 * M + 1)
    for c, d in corr:
        s = s - rebuild(by_pole[d], basis, trunc) * c
    return s.truncate(trunc)


# -- the pairing criterion --------------------------------------------------------------------

@dataclass
class PairingReport:
    residuals: dict
    certified_pole_bound: int
    M: int = 1

    @property
    def verdict(self) -> bool:
        return all(r == 0 for r in self.residuals.values())

    def nonzero(self) -> dict:
        return {k: v for k, v in self.residuals.items() if v}

    def as_dict(self):
        return {
            "verdict": "pass" if self.verdict else "fail",
            "certified_pole_bound": self.certified_pole_bound,
            "nonzero_residuals": {str(k): str(v) for k, v in self.nonzero().items()},
            "checked": len(self.residuals),
        }


def _residual(g: QSeries, f: PlusForm, M: int) -> Fraction:
    total = Fraction(0)
    for n, a in g.items():
        if not a:
            continue
        try:
            c = f.series[-n]
        except IndexError:
            raise InsufficientTruncation(
                f"basis form with pole {f.pole} is known only below q^{f.series.trunc_exponent()}"
                f", need q^{-n}") from None
        if c:
            total += a * c / mu(n, M)
    return total


def verify_modularity(g: QSeries, basis, M: int | None = None) -> PairingReport:
    """Pair ``g`` against every basis form whose pole order is below ``g``'s truncation."""
    if g.den != 1:
        g = g.normalized()
        if g.den != 1:
            raise ValueError("g must have integral exponents")
    if M is None:
        M = basis[0].M if basis else 1
    for n, a in g.items():
        if a and mu(n, M) == 0:
            raise PlusSupportError(f"g has a coefficient at q^{n}, outside the plus space")
    T = g.trunc
    if T is None:
        raise InsufficientTruncation("g must carry a truncation")
    have = {f.pole for f in basis}
    need = admissible_poles(HALF, M, T - 1)
    missing = [d for d in need if d not in have]
    if missing:
        raise InsufficientTruncation(f"basis lacks poles {missing[:5]} required up to q^{T - 1}")
    residuals = {}
    for f in basis:
        if f.pole < T:
            residuals[f.pole] = _residual(g, f, M)
    return PairingReport(residuals, T - 1, M)


def solve_constant(g: QSeries, basis, M: int = 1) -> Fraction:
    """The constant term making the pairing of ``g`` with ``f_0`` vanish."""
    f0 = next(f for f in basis if f.pole == 0)
    g0 = g - QSeries.constant(g[0])
    return -_residual(g0, f0, M) * mu(0, M) / f0.series[0]


# -- basis files ----------------------------------------------------------------------------------

def export_basis(forms, path) -> None:
    forms = list(forms)
    w = forms[0].weight
    lines = [f"weight={w.numerator}/{w.denominator} level={forms[0].level} forms={len(forms)}"]
    for f in forms:
        lines.append(f"pole={f.pole}")
        lines.append(f.series.to_text().rstrip("\n"))
        lines.append("")
    Path(path).write_text("\n".join(lines))


def import_basis(path):
    """Read a basis file, validating plus support and principal part normalization."""
    text = Path(path).read_text()
    blocks = text.split("\n\n")
    head, _, first = blocks[0].partition("\n")
    fields = dict(kv.split("=") for kv in head.split())
    weight = Fraction(fields["weight"])
    level = int(fields["level"])
    if weight not in (HALF, THREE_HALVES) or level % 4:
        raise ValueError(f"bad basis header {head!r}")
    blocks[0] = first
    forms = []
    for blk in blocks:
        blk = blk.strip()
        if not blk:
            continue
        tag, _, body = blk.partition("\n")
        if not tag.startswith("pole="):
            raise ValueError(f"expected 'pole=' line, got {tag!r}")
        f = PlusForm(weight, level, int(tag[5:]), QSeries.from_text(body), ("file", str(path)))
        if f.series.den != 1:
            raise ValueError("basis series must have integral exponents")
        try:
            _check_normalized(f)
        except SpanDeficient as exc:
            raise ValueError(f"{path}: {exc}") from None
        forms.append(f)
    if "forms" in fields and int(fields["forms"]) != len(forms):
        raise ValueError("form count does not match header")
    return forms


def shipped_basis(M: int):
    """The weight 1/2 basis shipped with the package for level ``4M``."""
    path = Path(__file__).parent / "data" / "bases" / f"half_M{M}.qs"
    if not path.exists():
        raise FileNotFoundError(f"no shipped basis for M={M}")
    return import_basis(path)

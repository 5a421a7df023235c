"""Command line front end: ``singmod trace|basis|borcherds|classdata``.

Exit codes: 0 success, 2 configuration error, 3 precision failure,
4 certification failure.  Reports are deterministic JSON (schema
``singmod.report/1``) unless ``--timings`` is given.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .arith import QSeries, hurwitz, is_squarefree
from .modform import ModFunc, PrecisionLoss, catalog
from .plusspace import (
    HALF, THREE_HALVES, InsufficientTruncation, PlusSupportError, SpanDeficient,
    half_basis, import_basis, shipped_basis, three_halves_basis, verify_modularity,
    export_basis,
)
from .qf import GenusCharData, InvalidDiscriminant, class_reps
from .traces import HypothesisError, RoundingFailure, assemble, twisted_assemble
from . import borcherds as bp

SCHEMA = "singmod.report/1"
EXIT_OK, EXIT_CONFIG, EXIT_PRECISION, EXIT_CERT = 0, 2, 3, 4
PREC_ENV = "SINGMOD_PREC"
DEFAULT_PREC = 512
MAX_PREC = 4096


class ConfigError(ValueError):
    pass


class CertificationFailure(RuntimeError):
    def __init__(self, msg, report):
        super().__init__(msg)
        self.report = report


@dataclass
class RunConfig:
    subcommand: str
    M: int = 1
    N: int = 100
    prec_bits: int = DEFAULT_PREC
    F: str = "J"
    twist: tuple | None = None
    out: str = "json"
    output: str | None = None
    extra: dict = field(default_factory=dict)

    def validate(self):
        if self.N < 1:
            raise ConfigError("N must be >= 1")
        if self.prec_bits < 64:
            raise ConfigError("prec_bits must be >= 64")
        if self.M < 1 or not is_squarefree(self.M):
            raise ConfigError(f"M={self.M} must be a positive squarefree integer")

    def echo(self):
        out = {"subcommand": self.subcommand, "M": self.M}
        if self.subcommand == "trace":
            out.update(N=self.N, prec_bits=self.prec_bits, F=self.F)
        if self.twist:
            out["twist"] = list(self.twist)
        out.update({k: v for k, v in sorted(self.extra.items()) if v is not None})
        return out


def _default_prec() -> int:
    raw = os.environ.get(PREC_ENV)
    if raw is None:
        return DEFAULT_PREC
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{PREC_ENV}={raw!r} is not an integer") from None


# -- input resolution ------------------------------------------------------------------------

def resolve_function(desc: str, M: int) -> ModFunc:
    """A catalog name (``J``, ``m6``, ``catalog:m6``) or a path to an s-expression file."""
    path = Path(desc)
    if desc.endswith(".sexp") or (path.exists() and path.is_file()):
        if not path.exists():
            raise ConfigError(f"no such file {desc}")
        return ModFunc.from_sexp(path.read_text(), M, name=path.name)
    try:
        F = catalog(desc)
    except KeyError as exc:
        raise ConfigError(str(exc)) from None
    if F.M != M:
        raise ConfigError(f"{F.name} lives on Gamma_0({F.M}), not level {M}")
    return F


def _parse_twist(text):
    if text is None:
        return None
    try:
        delta, r = (int(x) for x in text.split(","))
    except ValueError:
        raise ConfigError(f"--twist expects 'Delta,r', got {text!r}") from None
    return delta, r


def _default_basis(M: int, N: int, need: int):
    """A weight 1/2 basis covering poles up to ``N`` with coefficients up to ``q^need``."""
    if M == 1:
        return half_basis(1, N, need + 1)
    return shipped_basis(M)


def _with_retry(fn, prec: int, cap: int):
    """Run ``fn(prec)``, doubling ``prec`` on rounding or precision failures."""
    while True:
        try:
            return fn(prec), prec
        except (RoundingFailure, PrecisionLoss):
            if prec * 2 > cap:
                raise
            prec *= 2


# -- subcommands -----------------------------------------------------------------------------

def run_trace(cfg: RunConfig) -> dict:
    cfg.validate()
    F = resolve_function(cfg.F, cfg.M)
    cap = cfg.extra.get("max_prec") or MAX_PREC
    basis = None
    if cfg.extra.get("basis"):
        basis = import_basis(cfg.extra["basis"])
        if basis[0].M != cfg.M:
            raise ConfigError(f"basis has level {basis[0].level}, expected {4 * cfg.M}")
    verify = cfg.extra.get("verify")
    if cfg.twist:
        chi = GenusCharData(cfg.twist[0], cfg.twist[1], cfg.M)
        need = abs(chi.delta) * max([1] + list(F.pole_orders().values())) ** 2
        if verify and basis is None:
            basis = _default_basis(cfg.M, cfg.N, need)
        ts, prec = _with_retry(
            lambda p: twisted_assemble(F, chi, cfg.N, p, basis if verify else None),
            cfg.prec_bits, cap)
    else:
        need = max([1] + list(F.pole_orders().values())) ** 2
        if verify and basis is None:
            basis = _default_basis(cfg.M, cfg.N, need)
        ts, prec = _with_retry(lambda p: assemble(F, cfg.N, p), cfg.prec_bits, cap)
    report = {"result": ts.as_dict()}
    report["result"]["prec_bits"] = prec
    if verify:
        pr = verify_modularity(ts.series, basis, cfg.M)
        report["pairing"] = pr.as_dict()
        if not pr.verdict:
            raise CertificationFailure("pairing residuals are not all zero", report)
    return report


def run_basis(cfg: RunConfig) -> dict:
    w = Fraction(cfg.extra["weight"])
    max_pole, trunc = cfg.extra["max_pole"], cfg.extra["trunc"]
    if max_pole < 0 or trunc < 1:
        raise ConfigError("max-pole must be >= 0 and trunc >= 1")
    if w == HALF:
        forms = half_basis(cfg.M, max_pole, trunc)
    elif w == THREE_HALVES:
        if cfg.M != 1:
            raise ConfigError("weight 3/2 bases are available for M = 1 only")
        forms = three_halves_basis(1, max_pole, trunc)
    else:
        raise ConfigError(f"weight must be 1/2 or 3/2, got {w}")
    if cfg.extra.get("save"):
        export_basis(forms, cfg.extra["save"])
    return {"result": {
        "weight": str(w), "level": 4 * cfg.M, "count": len(forms),
        "poles": [f.pole for f in forms],
        "forms": {str(f.pole): f.series.to_text() for f in forms},
    }}


def _read_series(path: str) -> QSeries:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"no such file {path}")
    return QSeries.from_text(p.read_text())


def run_borcherds(cfg: RunConfig) -> dict:
    T = cfg.extra["trunc"]
    if T < 1:
        raise ConfigError("trunc must be >= 1")
    name = cfg.extra["f"]
    try:
        inp = bp.catalog_input(name, T)
    except KeyError:
        if not Path(name).exists():
            raise ConfigError(f"unknown Borcherds input {name!r}") from None
        inp = bp.BorcherdsInput(_read_series(name), T, Path(name).name)
    prod = bp.lift(inp)
    report = {"result": prod.as_dict()}
    ref = cfg.extra.get("reference")
    if ref:
        try:
            rs = bp.reference(ref, T)
        except KeyError:
            rs = _read_series(ref)
        ok, bad = bp.certify(prod, rs)
        report["certification"] = {"reference": ref, "match": ok,
                                   "first_mismatch": None if bad is None else str(bad)}
        if not ok:
            raise CertificationFailure(f"product differs from {ref} at q^{bad}", report)
    return report


def run_classdata(cfg: RunConfig) -> dict:
    d = cfg.extra["d"]
    reps = class_reps(d, cfg.M)
    total = sum((Fraction(1, r.w) for r in reps), Fraction(0))
    out = {"d": d, "M": cfg.M, "count": len(reps),
           "classes": [r.as_dict() for r in reps], "degree": str(total)}
    if cfg.M == 1:
        out["hurwitz"] = str(hurwitz(d))
    return {"result": out}


RUNNERS = {"trace": run_trace, "basis": run_basis, "borcherds": run_borcherds,
           "classdata": run_classdata}


# -- argument handling -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="singmod", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--M", type=int, default=1)
        p.add_argument("--out", choices=["json", "text"], default="json")
        p.add_argument("--output", default=None, help="write the report here instead of stdout")
        p.add_argument("--timings", action="store_true", help="include wall times in the report")

    p = sub.add_parser("trace", help="assemble a trace generating series")
    common(p)
    p.add_argument("--F", default="J", help="catalog name, catalog:<name> or a .sexp file")
    p.add_argument("--N", type=int, default=100)
    p.add_argument("--prec", type=int, default=None, help=f"bits (default ${PREC_ENV} or {DEFAULT_PREC})")
    p.add_argument("--max-prec", type=int, default=MAX_PREC)
    p.add_argument("--twist", default=None, help="Delta,r")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--basis", default=None, help="weight 1/2 basis file")

    p = sub.add_parser("basis", help="construct a plus space basis")
    common(p)
    p.add_argument("--weight", default="1/2")
    p.add_argument("--max-pole", type=int, default=20)
    p.add_argument("--trunc", type=int, default=10)
    p.add_argument("--save", default=None, help="also export the basis file here")

    p = sub.add_parser("borcherds", help="Borcherds lift of a weight 1/2 form")
    common(p)
    p.add_argument("--f", default="12theta")
    p.add_argument("--trunc", type=int, default=50)
    p.add_argument("--reference", default=None)

    p = sub.add_parser("classdata", help="Gamma_0(M)-classes of discriminant -d")
    common(p)
    p.add_argument("--d", type=int, required=True)
    return ap


def config_from_args(args) -> RunConfig:
    cfg = RunConfig(args.subcommand, M=args.M, out=args.out, output=args.output)
    if args.subcommand == "trace":
        cfg.F, cfg.N = args.F, args.N
        cfg.prec_bits = args.prec if args.prec is not None else _default_prec()
        cfg.twist = _parse_twist(args.twist)
        cfg.extra = {"verify": args.verify, "basis": args.basis, "max_prec": args.max_prec}
    elif args.subcommand == "basis":
        cfg.extra = {"weight": args.weight, "max_pole": args.max_pole, "trunc": args.trunc,
                     "save": args.save}
    elif args.subcommand == "borcherds":
        cfg.extra = {"f": args.f, "trunc": args.trunc, "reference": args.reference}
    else:
        cfg.extra = {"d": args.d}
    if args.subcommand != "trace" and (cfg.M < 1 or not is_squarefree(cfg.M)):
        raise ConfigError(f"M={cfg.M} must be a positive squarefree integer")
    return cfg


def _render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    lines = []

    def walk(obj, prefix=""):
        if isinstance(obj, dict):
            for k in sorted(obj):
                walk(obj[k], f"{prefix}{k}.")
        elif isinstance(obj, str) and "\n" in obj:
            lines.append(f"{prefix[:-1]}:")
            lines.extend("  " + ln for ln in obj.rstrip("\n").splitlines())
        else:
            lines.append(f"{prefix[:-1]}: {obj}")

    walk(report)
    return "\n".join(lines) + "\n"


def _emit(report: dict, cfg_out: str, path: str | None):
    text = _render(report, cfg_out)
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    report = {"schema": SCHEMA}
    status, err = EXIT_OK, None
    t0 = time.perf_counter()
    try:
        cfg = config_from_args(args)
        report["inputs"] = cfg.echo()
        report.update(RUNNERS[cfg.subcommand](cfg))
    except CertificationFailure as exc:
        report.update(exc.report)
        status, err = EXIT_CERT, str(exc)
    except (RoundingFailure, PrecisionLoss) as exc:
        status, err = EXIT_PRECISION, str(exc)
    except (ConfigError, HypothesisError, InvalidDiscriminant, PlusSupportError,
            InsufficientTruncation, SpanDeficient, bp.NonIntegralExponent,
            FileNotFoundError, KeyError, ValueError) as exc:
        status, err = EXIT_CONFIG, str(exc)
    report["status"] = {0: "ok", 2: "config_error", 3: "precision_error", 4: "certification_failed"}[status]
    if err:
        report["error"] = err
        print(f"singmod: {err}", file=sys.stderr)
    if getattr(args, "timings", False):
        report["timings"] = {"total_seconds": round(time.perf_counter() - t0, 3)}
    _emit(report, args.out, args.output)
    return status


def main_entry():
    sys.exit(main())


if __name__ == "__main__":
    main_entry()

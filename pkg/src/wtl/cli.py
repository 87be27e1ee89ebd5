"""Command-line front end: tables of Omega and theta, stabilization sweeps, verification and data export."""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

from . import even as ev
from . import hurwitz as hz
from . import openwdvv as ow
from . import verify as vf
from . import whitham as wt
from .fields import FloatField, RationalField, RootUnavailable, value_of
from .serialize import (
    InputError,
    dumps,
    even_to_json,
    hurwitz_to_json,
    load_document,
    omega_to_str,
    point_to_json,
    to_csv,
    u_to_json,
)
from .series import SeriesError, TruncationError

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
DEFAULT_PRECISION = 64


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    backend: str = "rational"
    precision: int = DEFAULT_PRECISION
    trunc: int | None = None
    seed: int = 0
    tol: str | None = None
    out: str | None = None
    fmt: str = "csv"

    def __post_init__(self) -> None:
        if self.backend not in ("rational", "float"):
            raise UsageError("backend must be rational or float")
        if self.backend == "float" and self.precision < 16:
            raise UsageError("float precision must be at least 16 digits")
        if self.fmt not in ("csv", "json"):
            raise UsageError("format must be csv or json")
        if self.tol is not None:
            try:
                ok = Fraction(self.tol) > 0
            except (ValueError, ZeroDivisionError):
                ok = False
            if not ok:
                raise UsageError("tolerance must be a positive number")

    def field(self) -> Any:
        return RationalField() if self.backend == "rational" else FloatField(self.precision)

    def tolerance(self, field: Any) -> Any:
        if self.tol is not None:
            return field.coerce(Fraction(self.tol)) if field.exact else field.coerce(self.tol)
        if field.exact:
            return field.zero
        return field.coerce(10) ** (30 - self.precision)


def _precision_default() -> int:
    raw = os.environ.get("WTL_DEFAULT_PRECISION")
    if raw is None:
        return DEFAULT_PRECISION
    try:
        return int(raw)
    except ValueError:
        return DEFAULT_PRECISION


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _table(cfg: RunConfig, header: Sequence[str], rows: list[list[Any]]) -> str:
    if cfg.fmt == "json":
        return dumps([dict(zip(header, r)) for r in rows])
    return to_csv(header, rows)


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _num(field: Any, x: Any) -> str:
    return field.to_str(value_of(x))


# -- omega / theta ------------------------------------------------------------------
def cmd_omega(cfg: RunConfig, args: argparse.Namespace) -> int:
    field = cfg.field()
    doc = load_document(_read(args.input), field, cfg.trunc)
    rows, failed = [], []
    if isinstance(doc, wt.WhithamPoint):
        levels = wt.sector_levels(doc.m, args.pmax)
        for x, (a, p) in enumerate(levels):
            for b, q in levels[x:]:
                if q > args.qmax and p > args.qmax:
                    continue
                try:
                    rows.append([str(a), p, str(b), q, omega_to_str(wt.omega(doc, a, p, b, q), field)])
                except TruncationError:
                    failed.append(f"({a},{p};{b},{q})")
        header = ["alpha", "p", "beta", "q", "omega"]
    else:
        data = ev.expand_even(doc) if isinstance(doc, ev.EvenHurwitzData) else doc
        idx = data.indices()
        for x, a in enumerate(idx):
            for b in idx[x:]:
                try:
                    rows.append([f"v{a[0]},{a[1]}", f"v{b[0]},{b[1]}", omega_to_str(hz.omega_H(data, a, b), field)])
                except TruncationError:
                    failed.append(f"(v{a};v{b})")
        header = ["index1", "index2", "omega"]
    _emit(cfg, _table(cfg, header, rows))
    if failed:
        print("truncation too small for: " + ", ".join(failed), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_theta(cfg: RunConfig, args: argparse.Namespace) -> int:
    field = cfg.field()
    doc = load_document(_read(args.input), field, cfg.trunc)
    rows, failed = [], []
    if isinstance(doc, wt.WhithamPoint):
        for a, p in wt.sector_levels(doc.m, args.pmax):
            try:
                rows.append([str(a), p, _num(field, wt.theta(doc, a, p))])
            except TruncationError:
                failed.append(f"({a},{p})")
        header = ["alpha", "p", "theta"]
    else:
        data = ev.expand_even(doc) if isinstance(doc, ev.EvenHurwitzData) else doc
        for i, j in data.indices():
            top = 0 if (i and j == data.n[i]) else args.pmax
            for p in range(0, top + 1):
                try:
                    rows.append([f"v{i},{j}", p, _num(field, hz.theta_H(data, (i, j), p))])
                except TruncationError:
                    failed.append(f"(v{i},{j};{p})")
        header = ["index", "p", "theta"]
    _emit(cfg, _table(cfg, header, rows))
    if failed:
        print("truncation too small for: " + ", ".join(failed), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# -- stabilize ------------------------------------------------------------------------
def _profiles(specs: Sequence[str]) -> list[tuple[int, ...]]:
    out = []
    for s in specs:
        try:
            prof = tuple(int(x) for x in s.split(","))
        except ValueError as exc:
            raise UsageError(f"bad profile {s!r}") from exc
        if not prof or any(x < 1 for x in prof):
            raise UsageError(f"bad profile {s!r}")
        out.append(prof)
    return out


def _sweep(spec: str) -> list[tuple[int, ...]]:
    """``A:2..8`` (A-family n0 range) or ``2,1,1..6,5,5`` (componentwise steps of one)."""
    try:
        if spec.startswith("A:"):
            lo, hi = (int(x) for x in spec[2:].split(".."))
            return [(n,) for n in range(lo, hi + 1)]
        lo_s, hi_s = spec.split("..")
        lo, hi = [int(x) for x in lo_s.split(",")], [int(x) for x in hi_s.split(",")]
    except ValueError as exc:
        raise UsageError(f"bad sweep {spec!r}") from exc
    if len(lo) != len(hi):
        raise UsageError("sweep ends have different lengths")
    steps = max(h - l for l, h in zip(lo, hi))
    if any(h - l != steps for l, h in zip(lo, hi)):
        raise UsageError("sweep ends must differ by the same amount in every slot")
    return [tuple(l + k for l in lo) for k in range(steps + 1)]


def family_coefficients(rng: random.Random, exact: bool, depth: int, poles: int) -> dict:
    """A top-aligned coefficient family; leading coefficients are 1 on the exact backend."""

    def q() -> Fraction:
        return Fraction(rng.randint(-9, 9), rng.randint(1, 9))

    top0 = [q() for _ in range(depth)]
    tops, roots = [], []
    locs = rng.sample(range(-6, 7), poles)
    for _ in range(poles):
        lead = Fraction(1) if exact else Fraction(rng.randint(1, 9), rng.randint(1, 9))
        tops.append([lead] + [q() for _ in range(depth)])
        roots.append(Fraction(1) if exact else None)
    return {"top0": top0, "tops": tops, "locs": locs, "roots": roots}


def _build_family(prof: tuple[int, ...], fam: dict, field: Any) -> hz.HurwitzData:
    roots = fam["roots"][: len(prof) - 1]
    return hz.family_data(prof, fam["top0"], fam["tops"], fam["locs"], roots, field)


def _status(guaranteed: bool, ok: bool) -> str:
    if not guaranteed:
        return "not guaranteed"
    return "pass" if ok else "FAIL"


def cmd_stabilize(cfg: RunConfig, args: argparse.Namespace) -> int:
    field = cfg.field()
    tol = cfg.tolerance(field)
    rng = random.Random(cfg.seed)
    jobs: list[tuple[str, Any]] = []
    if args.input:
        doc = load_document(_read(args.input), field)
        if args.even and isinstance(doc, hz.HurwitzData):
            ev.check_even(doc)
        if isinstance(doc, wt.WhithamPoint):
            raise UsageError("stabilize needs Hurwitz data, not a point")
        jobs.append(("input", doc))
    profiles = _profiles(args.profile or [])
    if args.sweep:
        profiles += _sweep(args.sweep)
    if profiles:
        if args.even:
            for prof in profiles:
                if len(prof) < 2:
                    raise UsageError("even profiles list n0', n1', ...")
            seed_rng = random.Random(cfg.seed)
            for prof in profiles:
                jobs.append((",".join(map(str, prof)), ev.random_even(random.Random(seed_rng.random()), prof, field)))
        else:
            depth = max(max(p) for p in profiles) + 1
            poles = max(len(p) for p in profiles) - 1
            fam = family_coefficients(rng, field.exact, depth, poles)
            for prof in profiles:
                jobs.append((",".join(map(str, prof)), _build_family(prof, fam, field)))
    if not jobs:
        raise UsageError("give an input file, --profile or --sweep")
    rows, failed = [], 0
    for label, data in jobs:
        if args.even:
            h = ev.expand_even(data) if isinstance(data, ev.EvenHurwitzData) else data
            if args.open:
                for r in ev.even_open_report(h, args.pmax):
                    ok = (not r.threshold_ok) or (r.exact_logs and r.max_coeff_dev <= tol)
                    failed += not ok
                    dev = "log-mismatch" if not r.exact_logs else _num(field, r.max_coeff_dev)
                    rows.append([label, "even-open", r.slot.i, r.slot.p, "", "", r.threshold_ok, dev, _status(r.threshold_ok, ok)])
            else:
                for r in ev.even_stabilization_report(h, args.pmax, args.qmax):
                    ok = (not r.threshold_ok) or (r.deviation <= tol and r.dual_deviation <= tol)
                    failed += not ok
                    rows.append([label, "even", r.a.i, r.a.p, r.b.i, r.b.p, r.threshold_ok, _num(field, r.deviation), _status(r.threshold_ok, ok)])
        elif args.open:
            for r in ow.open_stabilization_report(data, args.pmax):
                ok = ow.open_row_passes(r, tol)
                failed += not ok
                dev = "log-mismatch" if not r.exact_logs else _num(field, r.max_coeff_dev)
                rows.append([label, r.family, r.i, r.p, "", "", r.threshold_ok, dev, _status(r.threshold_ok, ok)])
        else:
            for r in hz.stabilization_report(data, args.pmax, args.qmax):
                ok = hz.row_passes(r, tol)
                failed += not ok
                rows.append([label, r.family, r.i, r.p, r.j, r.q, r.threshold_ok, _num(field, r.deviation), _status(r.threshold_ok, ok)])
    header = ["profile", "family", "i", "p", "j", "q", "threshold_ok", "deviation", "status"]
    _emit(cfg, _table(cfg, header, rows))
    if failed:
        print(f"{failed} guaranteed row(s) exceed the tolerance", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# -- verify ----------------------------------------------------------------------------
def cmd_verify(cfg: RunConfig, args: argparse.Namespace) -> int:
    field = cfg.field()
    if args.replay:
        try:
            dump = json.loads(_read(args.replay))
            results = [vf.replay(dump, field)]
        except (json.JSONDecodeError, KeyError, StopIteration) as exc:
            raise InputError(f"not a failure dump: {exc}") from exc
    else:
        if args.suite not in vf.SUITES + ("all",):
            raise UsageError(f"unknown suite {args.suite!r}")
        results = vf.run_suite(args.suite, cfg.seed, field, args.scale)
    for r in results:
        print(r.line())
    failures = [r for r in results if not r.passed]
    if failures:
        dump = failures[0].first_failure
        path = cfg.out or f"wtl-failure-{dump['suite']}-{dump['invariant']}.json"
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(dumps(dump))
        print(f"first failing case written to {path}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# -- export ----------------------------------------------------------------------------
def cmd_export(cfg: RunConfig, args: argparse.Namespace) -> int:
    field = cfg.field()
    rng = random.Random(cfg.seed)
    T = cfg.trunc or 10
    if args.kind == "point":
        doc = point_to_json(wt.random_point(rng, args.m, T, field))
    elif args.kind == "u":
        doc = u_to_json(wt.random_u(rng, args.m, T), field, T)
    elif args.kind == "hurwitz":
        prof = _profiles([args.profile or "3,2"])[0]
        doc = hurwitz_to_json(hz.random_data(rng, prof, field))
    else:
        prof = _profiles([args.profile or "2,1,1"])[0]
        if len(prof) < 2:
            raise UsageError("even profiles list n0', n1', ...")
        doc = even_to_json(ev.random_even(rng, prof, field))
    _emit(cfg, dumps(doc))
    return EXIT_OK


# -- parser ----------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--backend", choices=("rational", "float"), default="rational")
    common.add_argument("--precision", type=int, default=None, help="digits for the float backend (env WTL_DEFAULT_PRECISION)")
    common.add_argument("--trunc", type=int, default=None, help="number of known terms for generated or rebuilt series")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", default=None, help="relative tolerance (default 0 exact, 10^(30-precision) float)")
    common.add_argument("--out", default=None)
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    common.add_argument("--even", action="store_true", help="use the parity-symmetric reduction")
    common.add_argument("--open", action="store_true", help="use the open sector")

    p = argparse.ArgumentParser(prog="wtl", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    o = sub.add_parser("omega", parents=[common], help="table of tau-structure entries")
    o.add_argument("input")
    o.add_argument("--pmax", type=int, default=2)
    o.add_argument("--qmax", type=int, default=2)
    o.set_defaults(func=cmd_omega)

    t = sub.add_parser("theta", parents=[common], help="table of densities")
    t.add_argument("input")
    t.add_argument("--pmax", type=int, default=2)
    t.set_defaults(func=cmd_theta)

    s = sub.add_parser("stabilize", parents=[common], help="stabilization reports")
    s.add_argument("input", nargs="?")
    s.add_argument("--profile", action="append", help="comma-separated profile; repeatable")
    s.add_argument("--sweep", help="A:2..8 or 2,1,1..6,5,5")
    s.add_argument("--pmax", type=int, default=3)
    s.add_argument("--qmax", type=int, default=3)
    s.set_defaults(func=cmd_stabilize)

    v = sub.add_parser("verify", parents=[common], help="seeded invariant suites")
    v.add_argument("suite", nargs="?", default="all")
    v.add_argument("--replay", default=None, help="re-run the case stored in a failure dump")
    v.add_argument("--scale", type=float, default=1.0, help="multiply the number of cases")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("export", parents=[common], help="write random input documents")
    e.add_argument("kind", choices=("point", "u", "hurwitz", "even"))
    e.add_argument("--m", type=int, default=2)
    e.add_argument("--profile", default=None)
    e.set_defaults(func=cmd_export)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        cfg = RunConfig(
            backend=args.backend,
            precision=args.precision if args.precision is not None else _precision_default(),
            trunc=args.trunc,
            seed=args.seed,
            tol=args.tol,
            out=args.out,
            fmt=args.fmt,
        )
        return args.func(cfg, args)
    except (InputError, UsageError, ev.ParityError, hz.HurwitzError, RootUnavailable, wt.PointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SeriesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

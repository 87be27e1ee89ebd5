"""Seeded invariant suites for every module.

Each invariant receives its own generator seeded from
``"{seed}/{suite}/{invariant}/{case}"`` so any single case can be replayed.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import factorial
from typing import Any, Callable

from . import even as ev
from . import hurwitz as hz
from . import openwdvv as ow
from . import whitham as wt
from .fields import Jet, JetField, RationalField, part_of, value_of
from .ratfun import GlobalRational, expand_at, polynomial_part, principal_part_at
from .series import (
    INF,
    Center,
    LaurentSeries,
    compose,
    derive,
    invert,
    mul,
    pow_rational,
    residue,
    revert,
)
from .serialize import even_to_json, hurwitz_to_json, point_to_json, series_to_json, u_to_json
from .values import same

SUITES = ("series", "ratfun", "whitham", "hurwitz", "open", "even")


@dataclass
class Outcome:
    ok: bool
    case: dict = dc_field(default_factory=dict)
    detail: str = ""


@dataclass
class InvariantResult:
    suite: str
    name: str
    cases: int
    failures: int
    seconds: float
    first_failure: dict | None = None

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.suite}.{self.name} cases={self.cases} failures={self.failures}"


def case_rng(seed: int, suite: str, name: str, case: int) -> random.Random:
    return random.Random(f"{seed}/{suite}/{name}/{case}")


def _q(rng: random.Random, nonzero: bool = False) -> Fraction:
    while True:
        v = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        if v or not nonzero:
            return v


def agree(a: LaurentSeries, b: LaurentSeries, field: Any) -> bool:
    """Equality on the range where both series are known."""
    if not a.center.same(b.center, field):
        return False
    d = max(a.denom, b.denom)
    if d % a.denom or d % b.denom:
        d = a.denom * b.denom
    a, b = a.rescale(d), b.rescale(d)
    top = min(a.order, b.order)
    for k in range(min(a.low, b.low), top):
        if not field.close(a.at(k), b.at(k)):
            return False
    return True


def _random_series(rng: random.Random, field: Any, center: Any = None, low: int | None = None, terms: int = 8, lead: Any = None) -> LaurentSeries:
    c = center if center is not None else (INF if rng.random() < 0.5 else Center(field.coerce(rng.randint(-4, 4))))
    lo = low if low is not None else rng.randint(-3, 3)
    cs = [field.coerce(lead if lead is not None else _q(rng, nonzero=True))] + [field.coerce(_q(rng)) for _ in range(terms - 1)]
    return LaurentSeries(c, 1, lo, tuple(cs), lo + terms, field)


def _random_gr(rng: random.Random, field: Any, locs: list) -> GlobalRational:
    poly = [field.coerce(_q(rng)) for _ in range(rng.randint(0, 4))]
    parts = []
    for loc in locs:
        parts.append((field.coerce(loc), tuple(field.coerce(_q(rng)) for _ in range(rng.randint(1, 3)))))
    return GlobalRational(tuple(poly), tuple(parts), field)


# -- series ----------------------------------------------------------------------------
def _ring_laws(rng: random.Random, field: Any) -> Outcome:
    c = INF if rng.random() < 0.5 else Center(field.coerce(rng.randint(-4, 4)))
    f, g, h = (_random_series(rng, field, c) for _ in range(3))
    checks = [
        agree((f + g) + h, f + (g + h), field),
        agree(f + g, g + f, field),
        agree(mul(f, g), mul(g, f), field),
        agree(mul(mul(f, g), h), mul(f, mul(g, h)), field),
        agree(mul(f, g + h), mul(f, g) + mul(f, h), field),
    ]
    return Outcome(all(checks), {"f": series_to_json(f), "g": series_to_json(g), "h": series_to_json(h)})


def _inverse(rng: random.Random, field: Any) -> Outcome:
    f = _random_series(rng, field)
    one = LaurentSeries.const(f.center, 1, field, 10)
    return Outcome(agree(mul(f, invert(f)), one, field), {"f": series_to_json(f)})


def _power_laws(rng: random.Random, field: Any) -> Outcome:
    lead = Fraction(rng.randint(1, 3), rng.randint(1, 3)) ** 6
    f = _random_series(rng, field, low=0, lead=lead)
    r = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.choice([1, 2, 3]))
    s = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.choice([1, 2, 3]))
    lhs = mul(pow_rational(f, r), pow_rational(f, s))
    rhs = pow_rational(f, r + s) if r + s else LaurentSeries.const(f.center, 1, field, 8)
    n = rng.choice([2, 3])
    back = pow_rational(pow_rational(f, Fraction(1, n)), n)
    return Outcome(agree(lhs, rhs, field) and agree(back, f, field), {"f": series_to_json(f), "r": str(r), "s": str(s)})


def _reversion(rng: random.Random, field: Any) -> Outcome:
    at_inf = rng.random() < 0.5
    center = INF if at_inf else Center(field.coerce(rng.randint(-4, 4)))
    f = _random_series(rng, field, center, low=-1, terms=8)
    g = revert(f)  # z as a series in w at infinity
    w = LaurentSeries.variable(INF, field, 6)
    ok = agree(compose(f, g), w, field)
    ok = ok and agree(compose(g, f), LaurentSeries.variable(center, field, 6), field)
    if not at_inf:
        ok = ok and agree(revert(g), f, field)
    return Outcome(ok, {"f": series_to_json(f)})


def _leibniz(rng: random.Random, field: Any) -> Outcome:
    c = INF if rng.random() < 0.5 else Center(field.coerce(rng.randint(-4, 4)))
    f, g = _random_series(rng, field, c), _random_series(rng, field, c)
    lhs = derive(mul(f, g))
    rhs = mul(derive(f), g) + mul(f, derive(g))
    exact = residue(derive(f)) == 0
    return Outcome(agree(lhs, rhs, field) and exact, {"f": series_to_json(f), "g": series_to_json(g)})


def _jet_leibniz(rng: random.Random, field: Any) -> Outcome:
    jf = JetField(field)
    c = INF if rng.random() < 0.5 else Center(field.coerce(rng.randint(-4, 4)))

    def jet_series(lead: Any = None, low: int = 0) -> LaurentSeries:
        cs = []
        for i in range(8):
            v = field.coerce(lead if (i == 0 and lead is not None) else _q(rng, nonzero=(i == 0)))
            cs.append(Jet(v, {"t": field.coerce(_q(rng))}))
        return LaurentSeries(c, 1, low, tuple(cs), low + 8, jf)

    f, g = jet_series(low=rng.randint(-2, 2)), jet_series(low=rng.randint(-2, 2))
    val = lambda s: s.map(value_of, field)  # noqa: E731
    der = lambda s: s.map(lambda x: part_of(x, "t"), field)  # noqa: E731
    prod = mul(f, g)
    ok = agree(der(prod), mul(der(f), val(g)) + mul(val(f), der(g)), field)
    h = jet_series(lead=Fraction(4), low=0)
    r = Fraction(rng.choice([-1, 1, 3]), 2)
    hp = pow_rational(h, r)
    ok = ok and agree(der(hp), mul(pow_rational(val(h), r - 1), der(h)).scale(field.coerce(r)), field)
    return Outcome(ok, {"f": series_to_json(val(f)), "g": series_to_json(val(g))})


# -- ratfun ------------------------------------------------------------------------------
def _gr_pair(rng: random.Random, field: Any) -> tuple:
    locs = rng.sample(range(-5, 6), rng.randint(1, 3))
    A = _random_gr(rng, field, rng.sample(locs, rng.randint(1, len(locs))))
    B = _random_gr(rng, field, locs)
    return A, B, locs


def _gr_json(R: GlobalRational) -> dict:
    f = R.field
    return {"poly": [f.to_str(c) for c in R.poly], "parts": [[f.to_str(l), [f.to_str(c) for c in cs]] for l, cs in R.parts]}


def _additivity(rng: random.Random, field: Any) -> Outcome:
    A, B, locs = _gr_pair(rng, field)
    ok = True
    for c in [INF] + [Center(field.coerce(l)) for l in locs] + [Center(field.coerce(Fraction(1, 7)))]:
        ok = ok and agree(expand_at(A + B, c, 6), expand_at(A, c, 6) + expand_at(B, c, 6), field)
        ok = ok and agree(expand_at(A.derive(), c, 5), derive(expand_at(A, c, 6)), field)
    return Outcome(ok, {"A": _gr_json(A), "B": _gr_json(B)})


def _residue_sum_zero(rng: random.Random, field: Any) -> Outcome:
    A, B, locs = _gr_pair(rng, field)
    total = field.zero
    for c in [INF] + [Center(field.coerce(l)) for l in locs]:
        total = total + residue(mul(expand_at(A, c, 8), expand_at(B, c, 8)))
    return Outcome(field.close(total, field.zero), {"A": _gr_json(A), "B": _gr_json(B)})


def _projections(rng: random.Random, field: Any) -> Outcome:
    A, _, locs = _gr_pair(rng, field)
    ok = polynomial_part(expand_at(A, INF, 3)).equals(GlobalRational(A.poly, (), field))
    for l in A.locations():
        pp = principal_part_at(expand_at(A, Center(l), 2))
        ok = ok and pp.equals(GlobalRational((), ((l, A.part_at(l)),), field))
    x0 = field.coerce(Fraction(1, 7))
    ok = ok and field.close(expand_at(A, Center(x0), 2).at(0), A.evaluate(x0))
    return Outcome(ok, {"A": _gr_json(A)})


# -- whitham -----------------------------------------------------------------------------
def _tau_symmetry(rng: random.Random, field: Any, pmax: int = 3) -> Outcome:
    m = rng.randint(1, 3)
    pt = wt.random_point(rng, m, 2 * pmax + 6, field)
    for a, p in wt.sector_levels(m, pmax):
        for b, q in wt.sector_levels(m, pmax):
            x = wt.omega(pt, a, p, b, q)
            if not same(x, wt.omega(pt, b, q, a, p), field):
                return Outcome(False, {"point": point_to_json(pt)}, f"asymmetric at {a},{p};{b},{q}")
            if not same(x, wt.omega_transfer(pt, a, p, b, q), field):
                return Outcome(False, {"point": point_to_json(pt)}, f"transfer mismatch at {a},{p};{b},{q}")
    return Outcome(True)


def _dependence(rng: random.Random, field: Any) -> Outcome:
    m = rng.randint(1, 3)
    count, order = 12, 13
    u = wt.random_u(rng, m, count)
    levels = wt.sector_levels(m, 3)
    (a, p), (b, q) = rng.choice(levels), rng.choice(levels)
    base = wt.omega(wt.point_of_u(u, order, field), a, p, b, q)
    keep = wt.dependence_indices(a, p, b, q)
    k = rng.randint(0, m)
    j = rng.randint(1 if k == 0 else 0, count - 1)
    if (k, j) in keep:
        return Outcome(True)
    old = u.get(k, j)
    shift = Fraction(rng.choice([1, 2, 3]), 7) if (k and j == 0) else _q(rng, nonzero=True)
    if k and j == 0 and any(Fraction(old + shift) == x for x in [u.get(i, 0) for i in range(1, m + 1)]):
        shift += Fraction(1, 3)
    new = u.replace(k, j, old + shift)
    try:
        val = wt.omega(wt.point_of_u(new, order, field), a, p, b, q)
    except ValueError:
        return Outcome(True)
    ok = val.scalar == base.scalar and val.logs == base.logs
    return Outcome(ok, {"u": u_to_json(u, field, order), "entry": [str(a), p, str(b), q], "perturbed": [k, j]})


def _flow_compat(rng: random.Random, field: Any) -> Outcome:
    m = rng.randint(1, 2)
    pt = wt.random_point(rng, m, 12, field, jets="x")
    for a, p in wt.sector_levels(m, 2):
        for b, q in wt.sector_levels(m, 2):
            r = wt.tau_flow_residual(pt, a, p, b, q)
            if not field.close(value_of(r), field.zero):
                return Outcome(False, {"point": point_to_json(pt.values())}, f"{a},{p};{b},{q}")
    return Outcome(True)


# -- hurwitz -----------------------------------------------------------------------------
PROFILES = [(2,), (3,), (4,), (2, 1), (3, 2), (2, 2), (1, 1, 1), (2, 1, 2)]


def _h_metric(rng: random.Random, field: Any) -> Outcome:
    n0 = rng.randint(2, 5)
    d1, d2 = hz.random_data(rng, (n0,), field), hz.random_data(rng, (n0,), field)
    for a in d1.indices():
        for b in d1.indices():
            want = field.coerce(n0 if a[1] + b[1] == n0 else 0)
            if not (field.close(hz.metric_H(d1, a, b), want) and field.close(hz.metric_H(d2, a, b), want)):
                return Outcome(False, {"data": hurwitz_to_json(d1)})
    return Outcome(True)


def _h_wdvv(rng: random.Random, field: Any) -> Outcome:
    d = hz.random_data(rng, rng.choice(PROFILES[:6]), field)
    r = hz.wdvv_residual(d)
    ok = field.close(r["residual"], field.zero) and field.close(r["asymmetry"], field.zero)
    a, b, c = (rng.choice(d.indices()) for _ in range(3))
    ok = ok and field.close(r["c"][(a, b, c)], hz.structure_constant_residue(d, a, b, c))
    return Outcome(ok, {"data": hurwitz_to_json(d)})


def _h_embed(rng: random.Random, field: Any) -> Outcome:
    d = hz.random_data(rng, rng.choice(PROFILES), field)
    pt = hz.embed(d)
    u = wt.u_coords(pt, max(d.n) + 1)
    v = hz.flat_coords(d)
    ok = all(field.close(u.get(0, j), v.get(0, j)) for j in range(1, d.n0))
    for i in range(1, d.m + 1):
        ok = ok and all(field.close(u.get(i, j), v.get(i, j)) for j in range(0, d.n[i] + 1))
    return Outcome(ok, {"data": hurwitz_to_json(d)})


def _h_stabilization(rng: random.Random, field: Any) -> Outcome:
    d = hz.random_data(rng, rng.choice(PROFILES), field)
    tol = field.zero if field.exact else field.tol
    bad = [r for r in hz.stabilization_report(d, 3, 3) if not hz.row_passes(r, tol)]
    return Outcome(not bad, {"data": hurwitz_to_json(d)}, "; ".join(f"{r.family} {r.i},{r.p};{r.j},{r.q}" for r in bad))


# -- open --------------------------------------------------------------------------------
def _open_rows(rng: random.Random, field: Any) -> Outcome:
    d = hz.random_data(rng, rng.choice(PROFILES), field)
    tol = field.zero if field.exact else field.tol
    bad = [r for r in ow.open_stabilization_report(d, 4) if not ow.open_row_passes(r, tol)]
    return Outcome(not bad, {"data": hurwitz_to_json(d)})


def _open_wdvv(rng: random.Random, field: Any) -> Outcome:
    d = hz.random_data(rng, rng.choice([(2,), (3,), (2, 1)]), field)
    r = ow.open_wdvv_residual(d, Fraction(10))
    ok = all(field.close(r[k], field.zero) for k in ("first", "second", "mixed", "symmetry"))
    return Outcome(ok, {"data": hurwitz_to_json(d)})


def _open_s_powers(rng: random.Random, field: Any) -> Outcome:
    pt = wt.random_point(rng, 1, 20, field)
    s0 = ow.theta_tilde_M(pt, "s", 0).series
    ok = True
    acc = s0
    for p in range(1, 5):
        acc = mul(acc, s0)
        sp = ow.theta_tilde_M(pt, "s", p).series.scale(field.coerce(factorial(p + 1)))
        ok = ok and agree(sp, acc, field)
    return Outcome(ok, {"point": point_to_json(pt)})


# -- even --------------------------------------------------------------------------------
EVEN_PROFILES = [(1, 1), (2, 1), (2, 2), (1, 1, 1), (2, 1, 2), (2, 1, 1, 1)]


def _even_parity(rng: random.Random, field: Any) -> Outcome:
    d = ev.random_even(rng, rng.choice(EVEN_PROFILES), field)
    h = ev.expand_even(d)
    defects = [ev.parity_defect(h), ev.constraint_defect(h), ev.point_parity_defect(hz.u_point(h, 10))]
    ok = all(field.close(x, 0) for x in defects)
    return Outcome(ok, {"data": even_to_json(d)})


def _even_rows(rng: random.Random, field: Any) -> Outcome:
    d = ev.random_even(rng, rng.choice(EVEN_PROFILES), field)
    tol = field.zero if field.exact else field.tol
    rows = ev.even_stabilization_report(d, 3, 3)
    ok = all((not r.threshold_ok or r.deviation <= tol) and r.dual_deviation <= tol for r in rows)
    orows = ev.even_open_report(d, 4)
    ok = ok and all((not r.threshold_ok) or (r.exact_logs and r.max_coeff_dev <= tol) for r in orows)
    return Outcome(ok, {"data": even_to_json(d)})


Invariant = Callable[[random.Random, Any], Outcome]

REGISTRY: dict[str, list[tuple[str, Invariant, int]]] = {
    "series": [
        ("ring_laws", _ring_laws, 200),
        ("inverse", _inverse, 200),
        ("power_laws", _power_laws, 200),
        ("reversion_round_trip", _reversion, 200),
        ("leibniz_and_exact_residue", _leibniz, 200),
        ("jet_leibniz", _jet_leibniz, 200),
    ],
    "ratfun": [
        ("expansion_linear_and_derivative", _additivity, 200),
        ("residue_sum_zero", _residue_sum_zero, 200),
        ("projections", _projections, 200),
    ],
    "whitham": [
        ("symmetry_and_transfer", _tau_symmetry, 10),
        ("dependence", _dependence, 50),
        ("flow_compatibility", _flow_compat, 3),
    ],
    "hurwitz": [
        ("metric_constant", _h_metric, 10),
        ("wdvv", _h_wdvv, 5),
        ("embed_round_trip", _h_embed, 10),
        ("stabilization", _h_stabilization, 5),
    ],
    "open": [
        ("stabilization", _open_rows, 5),
        ("open_wdvv", _open_wdvv, 3),
        ("s_powers", _open_s_powers, 5),
    ],
    "even": [
        ("parity_and_constraints", _even_parity, 10),
        ("stabilization", _even_rows, 10),
    ],
}


def run_invariant(suite: str, name: str, seed: int, field: Any = None, cases: int | None = None, start: int = 0) -> InvariantResult:
    field = field or RationalField()
    fn, default = next((f, n) for nm, f, n in REGISTRY[suite] if nm == name)
    count = default if cases is None else cases
    t0 = time.perf_counter()
    failures = 0
    first = None
    for i in range(start, start + count):
        try:
            out = fn(case_rng(seed, suite, name, i), field)
        except Exception as exc:  # a crash is a failure of the invariant, reported with its case
            out = Outcome(False, {}, f"{type(exc).__name__}: {exc}")
        if not out.ok:
            failures += 1
            if first is None:
                first = {"suite": suite, "invariant": name, "seed": seed, "case": i, "backend": getattr(field, "name", "rational"), "input": out.case, "detail": out.detail}
    return InvariantResult(suite, name, count, failures, time.perf_counter() - t0, first)


def run_suite(suite: str, seed: int, field: Any = None, scale: float = 1.0) -> list[InvariantResult]:
    names = SUITES if suite == "all" else (suite,)
    out = []
    for s in names:
        if s not in REGISTRY:
            raise KeyError(s)
        for name, _, n in REGISTRY[s]:
            out.append(run_invariant(s, name, seed, field, max(1, int(n * scale))))
    return out


def replay(dump: dict, field: Any = None) -> InvariantResult:
    """Re-run the single case recorded in a failure dump."""
    return run_invariant(dump["suite"], dump["invariant"], int(dump["seed"]), field, cases=1, start=int(dump["case"]))

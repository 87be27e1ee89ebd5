"""Open sector: the functions theta-tilde on both sides, open stabilization and the open WDVV residual."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Any, Sequence

from .fields import JetField, part_of, value_of
from .hurwitz import (
    HurwitzData,
    _adaptive,
    _q,
    dlambda_dv,
    lift,
    structure_constants,
    metric_matrix,
    u_point,
)
from .ratfun import GlobalRational, expand_at, polynomial_part, principal_part_at
from .series import INF, LaurentSeries, TruncationError, add
from .whitham import Sector, WhithamPoint

S_TRUNC = 12
LIMITATION = "sigma flows pair the e and s sectors; separate s-flows are not represented"


@dataclass(frozen=True, eq=False)
class OpenSeries:
    """A function of the open variable s.

    ``rational`` is exact, ``series`` is a truncated expansion at s = infinity
    and ``logs`` holds terms ``coef * log(s - loc)``.
    """

    rational: GlobalRational
    series: LaurentSeries | None = None
    logs: tuple = ()

    @property
    def field(self) -> Any:
        return self.rational.field

    def __add__(self, other: "OpenSeries") -> "OpenSeries":
        if self.series is None:
            ser = other.series
        elif other.series is None:
            ser = self.series
        else:
            ser = add(self.series, other.series)
        return OpenSeries(self.rational + other.rational, ser, self.logs + other.logs)

    def scale(self, c: Fraction | int) -> "OpenSeries":
        c = Fraction(c)
        ser = None if self.series is None else self.series.scale(_q(self.field, c))
        return OpenSeries(self.rational.scale(c), ser, tuple((k * c, l) for k, l in self.logs))

    def __neg__(self) -> "OpenSeries":
        return self.scale(-1)

    def __sub__(self, other: "OpenSeries") -> "OpenSeries":
        return self + (-other)

    def merged_logs(self) -> list:
        f = self.field
        out: list = []
        for c, loc in self.logs:
            for i, (c2, l2) in enumerate(out):
                if f.close(value_of(l2), value_of(loc)):
                    out[i] = (c2 + c, l2)
                    break
            else:
                out.append((Fraction(c), loc))
        return [(c, l) for c, l in out if c != 0]

    def at_infinity(self, strunc: int = S_TRUNC) -> LaurentSeries:
        """Everything except logs expanded at s = infinity through s^{-strunc}."""
        s = expand_at(self.rational, INF, strunc)
        if self.series is not None:
            if self.series.order <= strunc:
                raise TruncationError(f"series part is not known down to s^-{strunc}")
            s = add(s, self.series.truncate(strunc + 1))
        return s

    def coefficients(self, strunc: int = S_TRUNC) -> list:
        """All coefficients that determine the function: expansion at infinity and principal parts."""
        out = [c for c in self.at_infinity(strunc).coeffs]
        for _, cs in self.rational.compact().parts:
            out.extend(cs)
        return out

    def evaluate(self, s: Any) -> Any:
        f = self.field
        val = self.rational.evaluate(s)
        if self.series is not None:
            ser = self.series
            inv = 1 / s
            for i, c in enumerate(ser.coeffs):
                k = ser.low + i
                val = val + c * inv**k if k >= 0 else val + c * s ** (-k)
        if self.logs:
            ctx = _float_ctx(f)
            for c, loc in self.logs:
                val = val + ctx.log(s - loc) * ctx.mpf(c.numerator) / c.denominator
        return val


def _float_ctx(field: Any) -> Any:
    base = field.base if isinstance(field, JetField) else field
    if not hasattr(base, "ctx"):
        raise TypeError("numeric evaluation of logarithms needs the float backend")
    return base.ctx


def open_deviation(a: OpenSeries, b: OpenSeries, strunc: int = S_TRUNC) -> Any:
    """Largest coefficient difference relative to max(1, largest coefficient of ``a``); logs must match exactly."""
    d = a - b
    logs = d.merged_logs()
    if logs:
        return None
    diff = [abs(value_of(c)) for c in d.coefficients(strunc)]
    ref = [abs(value_of(c)) for c in a.coefficients(strunc)]
    scale = max([1] + ref)
    return max([0] + diff) / scale


# -- theta-tilde on the formal side ---------------------------------------------
def theta_tilde_M(pt: WhithamPoint, a: Sector | str, p: int, strunc: int = S_TRUNC) -> OpenSeries:
    f = pt.field
    zero = GlobalRational.zero(f)
    c = _q(f, Fraction(1, factorial(p + 1)))
    if a == "s" or (isinstance(a, Sector) and a.kind == "e"):
        ap = pt.power(0, p + 1)
        if ap.order <= strunc:
            raise TruncationError(f"a(s)^{p + 1} is not known down to s^-{strunc}")
        if a == "s":
            return OpenSeries(zero, ap.scale(c))
        neg = ap.keep(lambda e: e < 0)
        return OpenSeries(zero, neg.scale(-c))
    if a.kind == "h0":
        return OpenSeries(principal_part_at(pt.power(a.k, p + 1)).scale(-c))
    if p != 0:
        raise ValueError("the logarithmic family exists only at level 0")
    return OpenSeries(zero, None, ((Fraction(1), pt.phi[a.k - 1]),))


# -- theta-tilde on the Hurwitz side --------------------------------------------
def theta_tilde_H(data: HurwitzData, idx: tuple[int, int] | str) -> OpenSeries:
    f = data.field
    if idx == "s":
        return OpenSeries(data.lam())
    i, j = idx
    n = data.n[i]
    zero = GlobalRational.zero(f)
    if i == 0:
        P = _adaptive(lambda R: polynomial_part(data.wpow(0, n - j, R)), n + 4)
        return OpenSeries(P.scale(Fraction(n, n - j)))
    if j == n:
        return OpenSeries(zero, None, ((Fraction(n), data.poles[i - 1].loc),))
    P = _adaptive(lambda R: principal_part_at(data.wpow(i, n - j, R)), n + 4)
    return OpenSeries(P.scale(Fraction(-n, n - j)))


@dataclass(frozen=True)
class OpenRow:
    family: str
    i: int
    p: int
    threshold_ok: bool
    max_coeff_dev: Any
    s_trunc_order: int
    exact_logs: bool
    note: str
    lhs: OpenSeries
    rhs: OpenSeries


def open_rows(data: HurwitzData, pmax: int) -> list[tuple[int, int]]:
    out = [(0, p) for p in range(1, min(pmax, data.n0 - 1) + 1)]
    for i in range(1, data.m + 1):
        out += [(i, p) for p in range(0, min(pmax, data.n[i]) + 1)]
    return out


def open_pair(data: HurwitzData, pt: WhithamPoint, i: int, p: int, strunc: int) -> tuple[str, OpenSeries, OpenSeries, bool]:
    n = data.n[i]
    lhs = theta_tilde_H(data, (i, n - p)).scale(Fraction(1, n))
    if i == 0:
        rhs = (theta_tilde_M(pt, "s", p - 1, strunc) + theta_tilde_M(pt, Sector("e"), p - 1, strunc)).scale(factorial(p - 1))
        return "e+s", lhs, rhs, n >= p
    if p == 0:
        return "log", lhs, theta_tilde_M(pt, Sector("h1", i), 0, strunc), True
    rhs = theta_tilde_M(pt, Sector("h0", i), p - 1, strunc).scale(factorial(p - 1))
    return "h0", lhs, rhs, n >= p


def open_stabilization_report(data: HurwitzData, pmax: int, strunc: int = S_TRUNC) -> list[OpenRow]:
    pt = u_point(data, pmax + strunc + 6)
    rows = []
    for i, p in open_rows(data, pmax):
        fam, lhs, rhs, ok = open_pair(data, pt, i, p, strunc)
        dev = open_deviation(lhs, rhs, strunc)
        exact_logs = dev is not None
        rows.append(
            OpenRow(fam, i, p, ok, dev, strunc, exact_logs, LIMITATION if fam == "e+s" else "", lhs, rhs)
        )
    return rows


def open_row_passes(row: OpenRow, tol: Any) -> bool:
    if not row.threshold_ok:
        return True
    return row.exact_logs and row.max_coeff_dev <= tol


# -- open WDVV --------------------------------------------------------------------
def _dv_part(F: OpenSeries, s: Any, tag: str) -> Any:
    """First-order part of F(s) along ``tag`` at fixed s; d log(s - loc) = -d loc / (s - loc)."""
    val = part_of(F.rational.evaluate(s), tag)
    for c, loc in F.logs:
        val = val - part_of(loc, tag) / (s - value_of(loc)) * _q(F.field, c)
    return val


def _lift_eval(data: HurwitzData, idx: tuple[int, int], targets: Sequence[tuple[int, int]], s: Any) -> list:
    """d/dv_idx of theta-tilde^H_target(s) for every target."""
    jd = lift(data, dlambda_dv(data, idx), "g")
    return [_dv_part(theta_tilde_H(jd, t), s, "g") for t in targets]


def _d_ds(F: OpenSeries, s: Any) -> Any:
    val = F.rational.derive().evaluate(s)
    for c, loc in F.logs:
        val = val + (1 / (s - loc)) * _q(F.field, c)
    return val


def open_wdvv_residual(data: HurwitzData, s: Any) -> dict:
    """Residuals of both open WDVV equations at the given numeric s.

    F^o has first derivatives theta-tilde^H along v and lambda(s) along s.
    """
    f = data.field
    idx = data.indices()
    N = len(idx)
    s = f.coerce(s)
    c = structure_constants(data)
    _, inv = metric_matrix(data)
    up = {}
    for a in idx:
        for b in idx:
            for e in range(N):
                acc = f.zero
                for g in range(N):
                    acc = acc + c[(a, b, idx[g])] * inv[g][e]
                up[(a, b, e)] = acc
    th = {a: theta_tilde_H(data, a) for a in idx}
    F2 = {}
    for b in idx:
        col = _lift_eval(data, b, idx, s)
        for a, val in zip(idx, col):
            F2[(a, b)] = val
    Fs = {a: _d_ds(th[a], s) for a in idx}
    Fss = data.lam().derive().evaluate(s)
    mixed = max([abs(Fs[a] - dlambda_dv(data, a).evaluate(s)) for a in idx] + [f.zero])
    sym = max([abs(F2[(a, b)] - F2[(b, a)]) for a in idx for b in idx] + [f.zero])
    r1 = f.zero
    for a in idx:
        for b in idx:
            for g in idx:
                lhs = F2[(a, b)] * Fs[g]
                rhs = F2[(b, g)] * Fs[a]
                for e in range(N):
                    lhs = lhs + up[(a, b, e)] * F2[(idx[e], g)]
                    rhs = rhs + up[(b, g, e)] * F2[(idx[e], a)]
                r1 = max(r1, abs(lhs - rhs))
    r2 = f.zero
    for a in idx:
        for b in idx:
            lhs = F2[(a, b)] * Fss
            for e in range(N):
                lhs = lhs + up[(a, b, e)] * Fs[idx[e]]
            r2 = max(r2, abs(lhs - Fs[a] * Fs[b]))
    scale = max([1] + [abs(v) for v in F2.values()] + [abs(v) for v in Fs.values()] + [abs(Fss)])
    bound = f.zero if f.exact else f.tol * scale**3
    return {"first": r1, "second": r2, "mixed": mixed, "symmetry": sym, "bound": bound}

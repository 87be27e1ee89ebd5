"""Hurwitz spaces of rational superpotentials: flat coordinates, densities, tau-structure and stabilization."""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import factorial
from typing import Any, Callable, Sequence

from .fields import Jet, JetField, RationalField, value_of
from .ratfun import GlobalRational, expand_at, polynomial_part, principal_part_at
from .series import (
    INF,
    Center,
    LaurentSeries,
    TruncationError,
    derive,
    invert,
    mul,
    pow_rational,
    residue,
    residue_of_product,
    revert,
)
from .values import OmegaValue, deviation
from .whitham import E, Sector, UCoords, WhithamPoint, h0, h1, omega, point_of_u


class HurwitzError(ValueError):
    pass


@dataclass(frozen=True)
class Pole:
    loc: Any
    coeffs: tuple  # a_{i,1}, ..., a_{i,n_i}
    root: Any = None  # a chosen value of a_{i,n_i}^{1/n_i}

    @property
    def n(self) -> int:
        return len(self.coeffs)


@dataclass(frozen=True, eq=False)
class HurwitzData:
    """lambda = z^{n0} + sum_{j<=n0-2} a0[j] z^j + sum_i sum_j a_{i,j} (z - a_{i,0})^{-j}."""

    n0: int
    a0: tuple
    poles: tuple
    field: Any
    cache: dict = dc_field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        f = self.field
        if self.n0 < 1:
            raise HurwitzError("n0 must be positive")
        if len(self.a0) != max(self.n0 - 1, 0):
            raise HurwitzError(f"expected {self.n0 - 1} coefficients a_(0,0..n0-2)")
        for i, P in enumerate(self.poles, start=1):
            if P.n < 1:
                raise HurwitzError(f"pole {i} needs at least one coefficient")
            if value_of(P.coeffs[-1]) == 0:
                raise HurwitzError(f"a_({i},n_{i}) must be nonzero")
            if P.root is not None and not f.close(P.root ** P.n, P.coeffs[-1]):
                raise HurwitzError(f"supplied root for pole {i} is not an n_{i}-th root of a_({i},n_{i})")
        for i in range(len(self.poles)):
            for j in range(i):
                gap = value_of(self.poles[i].loc) - value_of(self.poles[j].loc)
                if gap == 0 or (not f.exact and f.negligible(gap)):
                    raise HurwitzError("pole locations must be distinct")

    @classmethod
    def build(cls, n0: int, a0: Sequence[Any], poles: Sequence[tuple], field: Any) -> "HurwitzData":
        """``poles`` holds ``(loc, [a_1..a_n])`` or ``(loc, [a_1..a_n], root)``."""
        ps = []
        for P in poles:
            loc, cs = P[0], P[1]
            root = field.coerce(P[2]) if len(P) > 2 and P[2] is not None else None
            ps.append(Pole(field.coerce(loc), tuple(field.coerce(c) for c in cs), root))
        if n0 == 1 and not a0:
            a0 = ()
        return cls(n0, tuple(field.coerce(c) for c in a0), tuple(ps), field)

    @property
    def m(self) -> int:
        return len(self.poles)

    @property
    def n(self) -> tuple:
        return (self.n0,) + tuple(P.n for P in self.poles)

    def center(self, i: int) -> Center:
        return INF if i == 0 else Center(self.poles[i - 1].loc)

    def lam(self) -> GlobalRational:
        f = self.field
        poly = tuple(self.a0) + ((f.zero,) if self.n0 >= 2 else ()) + (f.one,)
        if self.n0 == 1:
            poly = (f.zero, f.one)
        parts = tuple((P.loc, tuple(P.coeffs)) for P in self.poles)
        return GlobalRational(poly, parts, f)

    def indices(self) -> list[tuple[int, int]]:
        out = [(0, j) for j in range(1, self.n0)]
        for i, P in enumerate(self.poles, start=1):
            out += [(i, j) for j in range(0, P.n + 1)]
        return out

    # -- local roots -------------------------------------------------------
    def default_terms(self) -> int:
        return 2 * max(self.n) + 8

    def local(self, i: int, R: int) -> LaurentSeries:
        """lambda expanded at center i with R known relative terms."""
        key = ("lam", i, R)
        if key not in self.cache:
            n = self.n[i]
            N = -n + R - 1 if i == 0 else n + R - 1 - 2 * n
            self.cache[key] = expand_at(self.lam(), self.center(i), N)
        return self.cache[key]

    def dlocal(self, i: int, R: int) -> LaurentSeries:
        key = ("dlam", i, R)
        if key not in self.cache:
            self.cache[key] = derive(self.local(i, R))
        return self.cache[key]

    def w(self, i: int, R: int) -> LaurentSeries:
        """lambda^{1/n_i} at center i (branch fixed by the pole's root)."""
        key = ("w", i, R)
        if key not in self.cache:
            s = self.local(i, R)
            lead = None if i == 0 else self.poles[i - 1].root
            self.cache[key] = pow_rational(s, Fraction(1, self.n[i]), lead_root=lead)
        return self.cache[key]

    def wpow(self, i: int, a: int, R: int) -> LaurentSeries:
        key = ("wp", i, a, R)
        if key not in self.cache:
            w = self.w(i, R)
            if a == 1:
                val = w
            elif a == 0:
                val = LaurentSeries.const(w.center, 1, self.field, w.order - w.low)
            elif a > 1:
                val = mul(self.wpow(i, a - 1, R), w)
            elif a == -1:
                val = invert(w)
            else:
                val = mul(self.wpow(i, a + 1, R), self.wpow(i, -1, R))
            self.cache[key] = val
        return self.cache[key]


def _adaptive(fn: Callable[[int], Any], R0: int, tries: int = 4) -> Any:
    R = R0
    for attempt in range(tries):
        try:
            return fn(R)
        except TruncationError:
            if attempt == tries - 1:
                raise
            R *= 2


def _ring(field: Any) -> Any:
    return field.base if isinstance(field, JetField) else field


def _q(field: Any, x: Fraction | int) -> Any:
    return _ring(field).coerce(Fraction(x))


def superpotential(data: HurwitzData, c: Center, N: int) -> LaurentSeries:
    """lambda expanded at ``c`` through local exponent ``N``."""
    return expand_at(data.lam(), c, N)


@dataclass(frozen=True)
class FlatCoordsH:
    n: tuple
    v0: tuple  # v_{0,1..n0-1}
    v: tuple  # per pole: v_{i,0..n_i}

    def get(self, i: int, j: int) -> Any:
        return self.v0[j - 1] if i == 0 else self.v[i - 1][j]

    def hat(self, i: int, p: int) -> Any:
        """Rescaled coordinate n_i * v_{i, n_i - p}."""
        return self.get(i, self.n[i] - p) * self.n[i]


def flat_coords(data: HurwitzData, extra: int = 0) -> FlatCoordsH:
    """v_{0,j} from z = w - sum v_{0,j} w^{-j} at infinity; v_{i,j} from z = sum v_{i,j} w^{-j} at a_{i,0}.

    ``extra`` additional coefficients beyond the flat range are returned in
    ``v0``/``v`` (used to compare with the embedded point's u-coordinates).
    """

    def run(R: int) -> FlatCoordsH:
        za = revert(data.w(0, R))
        v0 = tuple(-za.at(j) for j in range(1, data.n0 + extra))
        vs = []
        for i, P in enumerate(data.poles, start=1):
            zi = revert(data.w(i, R))
            vs.append(tuple(zi.at(j) for j in range(0, P.n + 1 + extra)))
        return FlatCoordsH(data.n, v0, tuple(vs))

    return _adaptive(run, max(data.n) + extra + 4)


def dlambda_dv(data: HurwitzData, idx: tuple[int, int]) -> GlobalRational:
    i, j = idx
    if (i, j) not in data.indices():
        raise HurwitzError(f"no flat coordinate v_{idx}")

    def run(R: int) -> GlobalRational:
        prod = mul(data.wpow(i, -j, R), data.dlocal(i, R))
        if i == 0:
            return polynomial_part(prod)
        return -principal_part_at(prod)

    return _adaptive(run, max(data.n) + 4)


def _gamma_ratio(j: int, n: int, p: int) -> Fraction:
    """Gamma(1 - j/n) / Gamma(2 + p - j/n) as a finite product."""
    x = Fraction(j, n)
    out = Fraction(1)
    for s in range(p + 1):
        out /= 1 + s - x
    return out


def theta_H(data: HurwitzData, idx: tuple[int, int], p: int) -> Any:
    i, j = idx
    f = data.field
    if i == 0:
        a = data.n0 * (1 + p) - j
        return _adaptive(lambda R: -residue(data.wpow(0, a, R)), a + 4) * _q(f, _gamma_ratio(j, data.n0, p))
    n = data.n[i]
    if j < n:
        a = n * (1 + p) - j
        return _adaptive(lambda R: residue(data.wpow(i, a, R)), a + 4) * _q(f, _gamma_ratio(j, n, p))
    if p != 0:
        raise HurwitzError("logarithmic densities are only available at level 0")
    # level 0: the pole residues vanish and only -n Res_inf log(w_0/(z - a_{i,0})) survives.
    loc = data.poles[i - 1].loc

    def run(R: int) -> Any:
        w0 = data.w(0, R)
        g = mul(w0, expand_at(GlobalRational.pole(loc, [1], f), INF, R)) - 1
        g = g.trim()
        if g.low < 1:
            raise HurwitzError("unexpected shape of w0/(z - a)")
        total = f.zero
        gk = g
        k = 1
        while gk.low <= 1:
            total = total + residue(gk) * _q(f, Fraction((-1) ** (k + 1), k))
            k += 1
            gk = mul(gk, g)
        return total

    return -_adaptive(run, 6) * _q(f, n)


def _is_log(data: HurwitzData, idx: tuple[int, int]) -> bool:
    return idx[0] >= 1 and idx[1] == data.n[idx[0]]


def _res_at(A: GlobalRational, D: LaurentSeries) -> Any:
    Dt = D.trim()
    target = 1 if D.center.is_inf else -1
    return residue_of_product(expand_at(A, D.center, target - Dt.low), Dt)


def omega_H(data: HurwitzData, idx1: tuple[int, int], idx2: tuple[int, int]) -> OmegaValue:
    """Second derivatives of the prepotential in flat coordinates."""
    for idx in (idx1, idx2):
        if idx not in data.indices():
            raise HurwitzError(f"no flat coordinate v_{idx}")
    f = data.field
    (i, j), (k, l) = idx1, idx2
    n = data.n
    log1, log2 = _is_log(data, idx1), _is_log(data, idx2)
    if log1 and not log2:
        return omega_H(data, idx2, idx1)
    if i >= 1 and k == 0:
        return omega_H(data, idx2, idx1)
    if log1 and log2:
        if i != k:
            lo, hi = sorted((i, k))
            arg = data.poles[lo - 1].loc - data.poles[hi - 1].loc
            return OmegaValue(f.zero, ((Fraction(n[i] * n[k]), arg),))
        v1 = flat_coords(data).get(i, 1)
        return OmegaValue(f.zero, ((Fraction(n[i] ** 2), v1),))
    R0 = 2 * max(n) + 6
    if log2:
        inv = GlobalRational.pole(data.poles[k - 1].loc, [1], f)
        a = n[i] - j
        if i == 0:
            val = _adaptive(lambda R: _res_at(inv, data.wpow(0, a, R)), R0)
            return OmegaValue(-val * _q(f, Fraction(n[0] * n[k], a)))
        val = _adaptive(lambda R: _res_at(inv, data.wpow(i, a, R)), R0)
        return OmegaValue(val * _q(f, Fraction(n[i] * n[k], a)))
    a, b = n[i] - j, n[k] - l
    C = _q(f, Fraction(n[i] * n[k], a * b))

    def run(R: int) -> Any:
        dB = derive(data.wpow(k, b, R))
        if i == 0:
            P = polynomial_part(data.wpow(0, a, R))
            val = _res_at(P, dB)
            return val if k == 0 else -val
        Pm = principal_part_at(data.wpow(i, a, R))
        return _res_at(Pm, dB)

    return OmegaValue(_adaptive(run, R0) * C)


def metric_H(data: HurwitzData, idx1: tuple[int, int], idx2: tuple[int, int]) -> Any:
    """Sum over critical points of Res d'lambda d''lambda / lambda', via the poles and infinity."""
    A = dlambda_dv(data, idx1)
    B = dlambda_dv(data, idx2)
    return _crit_sum(data, [A, B])


def _crit_sum(data: HurwitzData, factors: Sequence[GlobalRational]) -> Any:
    f = data.field
    dl = data.lam().derive()
    total = f.zero
    depth = 4 * max(data.n) + 8
    for i in range(data.m + 1):
        c = data.center(i)
        prod = None
        for F in factors:
            s = expand_at(F, c, depth)
            prod = s if prod is None else mul(prod, s)
        den = expand_at(dl, c, depth).trim()
        if den.coeffs and value_of(den.coeffs[0]) == 0:
            raise HurwitzError("lambda' degenerates at a pole")
        total = total + residue(mul(prod, invert(den)))
    return -total


def structure_constant_residue(data: HurwitzData, a: tuple, b: tuple, c: tuple) -> Any:
    """c(d_a, d_b, d_c) from the residue formula (independent of the jet route)."""
    return _crit_sum(data, [dlambda_dv(data, a), dlambda_dv(data, b), dlambda_dv(data, c)])


# -- tangent vectors ----------------------------------------------------------
def lift(data: HurwitzData, delta: GlobalRational, tag: str) -> HurwitzData:
    """Move the superpotential coefficients along d(lambda) = delta (at fixed z)."""
    f = data.field
    if isinstance(f, JetField):
        raise HurwitzError("lift expects data without jets")
    d = delta.compact()
    poly = list(d.poly)
    if len(poly) > max(data.n0 - 1, 0):
        if any(not f.negligible(c) for c in poly[max(data.n0 - 1, 0):]):
            raise HurwitzError("direction changes the leading part at infinity")
    jf = JetField(f)
    a0 = tuple(Jet(c, {tag: poly[k] if k < len(poly) else f.zero}) for k, c in enumerate(data.a0))
    poles = []
    for i, P in enumerate(data.poles, start=1):
        g = list(d.part_at(P.loc))
        n = P.n
        if len(g) > n + 1 and any(not f.negligible(x) for x in g[n + 1 :]):
            raise HurwitzError("direction has a pole of too high order")
        g += [f.zero] * (n + 1 - len(g))
        da0 = g[n] / (P.coeffs[-1] * n)
        da = [g[0]]
        for mm in range(2, n + 1):
            da.append(g[mm - 1] - P.coeffs[mm - 2] * da0 * (mm - 1))
        coeffs = tuple(Jet(c, {tag: dc}) for c, dc in zip(P.coeffs, da))
        root = None
        if P.root is not None:
            droot = da[-1] / (P.root ** (n - 1) * n)
            root = Jet(P.root, {tag: droot})
        poles.append(Pole(Jet(P.loc, {tag: da0}), coeffs, root))
    return HurwitzData(data.n0, a0, tuple(poles), jf)


def values(data: HurwitzData) -> HurwitzData:
    f = data.field
    if not isinstance(f, JetField):
        return data
    poles = tuple(
        Pole(value_of(P.loc), tuple(value_of(c) for c in P.coeffs), None if P.root is None else value_of(P.root))
        for P in data.poles
    )
    return HurwitzData(data.n0, tuple(value_of(c) for c in data.a0), poles, f.base)


def structure_constants(data: HurwitzData) -> dict:
    """c_{abc} = d_c Omega_{a,b} obtained by jets along d lambda / d v_c."""
    idx = data.indices()
    out = {}
    for c in idx:
        jd = lift(data, dlambda_dv(data, c), "g")
        for ai, a in enumerate(idx):
            for b in idx[ai:]:
                val = omega_H(jd, a, b).part("g")
                out[(a, b, c)] = val
                out[(b, a, c)] = val
    return out


def _solve_inverse(M: list, field: Any) -> list:
    n = len(M)
    A = [list(row) + [field.one if i == j else field.zero for j in range(n)] for i, row in enumerate(M)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(A[r][col]))
        if A[piv][col] == 0 or (not field.exact and field.negligible(A[piv][col])):
            raise HurwitzError("singular metric")
        A[col], A[piv] = A[piv], A[col]
        inv = 1 / A[col][col]
        A[col] = [x * inv for x in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                fac = A[r][col]
                A[r] = [x - fac * y for x, y in zip(A[r], A[col])]
    return [row[n:] for row in A]


def metric_matrix(data: HurwitzData) -> tuple[list, list]:
    idx = data.indices()
    eta = [[metric_H(data, a, b) for b in idx] for a in idx]
    return eta, _solve_inverse(eta, data.field)


def wdvv_residual(data: HurwitzData) -> dict:
    """Maximal WDVV associativity residual and maximal asymmetry of c."""
    f = data.field
    idx = data.indices()
    c = structure_constants(data)
    eta, inv = metric_matrix(data)
    N = len(idx)
    # c_{ab}^e = sum_g c_{abg} eta^{ge}
    up = {}
    for a in idx:
        for b in idx:
            for e in range(N):
                s = f.zero
                for g in range(N):
                    s = s + c[(a, b, idx[g])] * inv[g][e]
                up[(a, b, e)] = s
    worst = f.zero
    for a in idx:
        for b in idx:
            for s_ in idx:
                for mu in idx:
                    lhs = f.zero
                    rhs = f.zero
                    for e in range(N):
                        lhs = lhs + up[(a, b, e)] * c[(idx[e], s_, mu)]
                        rhs = rhs + up[(a, s_, e)] * c[(idx[e], b, mu)]
                    worst = max(worst, abs(lhs - rhs))
    asym = f.zero
    for a in idx:
        for b in idx:
            for g in idx:
                asym = max(asym, abs(c[(a, b, g)] - c[(a, g, b)]), abs(c[(a, b, g)] - c[(g, b, a)]))
    return {"residual": worst, "asymmetry": asym, "c": c, "eta": eta}


# -- embedding and stabilization ------------------------------------------------
def embed(data: HurwitzData, terms: int | None = None) -> WhithamPoint:
    """lambda_0 = lambda^{1/n0} at infinity and lambda_k = lambda^{1/n_k} at a_{k,0}."""
    R = terms or data.default_terms()
    lam0 = data.w(0, R)
    lams = tuple(data.w(i, R) for i in range(1, data.m + 1))
    return WhithamPoint(tuple(P.loc for P in data.poles), lam0, lams, data.field)


def identified_u(data: HurwitzData) -> UCoords:
    v = flat_coords(data)
    return UCoords(tuple(v.v0), tuple(tuple(s) for s in v.v))


def v_index(data: HurwitzData, i: int, p: int) -> tuple[int, int] | None:
    """Flat index behind the rescaled coordinate hat v_{i,p}, or None if absent."""
    n = data.n[i]
    j = n - p
    if i == 0:
        return (0, j) if 1 <= j <= n - 1 else None
    return (i, j) if 0 <= j <= n else None


def m_sector(i: int, p: int) -> tuple[Sector, int]:
    if i == 0:
        return E, p - 1
    if p >= 1:
        return h0(i), p - 1
    return h1(i), 0


def family(i: int, p: int, j: int, q: int) -> str:
    if i == 0 and j == 0:
        return "e-e"
    if i == 0 or j == 0:
        other = q if i == 0 else p
        return "e-h1" if other == 0 else "e-h0"
    if p == 0 and q == 0:
        return "h1-h1"
    if i == j:
        return "h0-h1 same" if (p == 0 or q == 0) else "h0-h0 same"
    return "h0-h1 cross" if (p == 0 or q == 0) else "h0-h0 cross"


def threshold(n: Sequence[int], i: int, p: int, j: int, q: int) -> bool:
    if j == 0 and i != 0:
        i, p, j, q = j, q, i, p
    if i == 0 and j == 0:
        return n[0] >= p + q
    if i == 0:
        if q == 0:
            return n[0] >= p + 1
        return n[0] >= p and n[j] >= q
    if p == 0 and q == 0:
        return True
    if i == j:
        if p == 0 or q == 0:
            return n[i] >= max(p, q) + 1
        return n[i] >= p + q + 1
    if q == 0:
        return n[i] >= p
    if p == 0:
        return n[j] >= q
    return n[i] >= p and n[j] >= q


def _fact(p: int) -> int:
    return factorial(p - 1) if p >= 1 else 1


@dataclass(frozen=True)
class StabRow:
    family: str
    i: int
    p: int
    j: int
    q: int
    threshold_ok: bool
    deviation: Any
    lhs: OmegaValue
    rhs: OmegaValue


def stabilization_grid(data: HurwitzData, pmax: int, qmax: int) -> list[tuple[int, int, int, int]]:
    slots = []
    for i in range(data.m + 1):
        for p in range(0 if i else 1, pmax + 1):
            if v_index(data, i, p) is not None:
                slots.append((i, p))
    out = []
    for a, (i, p) in enumerate(slots):
        for (j, q) in slots[a:]:
            if q > qmax and p > qmax:
                continue
            out.append((i, p, j, q))
    return out


def u_point(data: HurwitzData, terms: int) -> WhithamPoint:
    """The formal point with u = v on the identified range and zero beyond."""
    return point_of_u(identified_u(data), terms, data.field)


def stabilization_report(data: HurwitzData, pmax: int, qmax: int, terms: int | None = None) -> list[StabRow]:
    f = data.field
    pt = u_point(data, terms or (pmax + qmax + 8))
    rows = []
    for i, p, j, q in stabilization_grid(data, pmax, qmax):
        a, b = v_index(data, i, p), v_index(data, j, q)
        lhs = omega_H(data, a, b).scale(Fraction(1, data.n[i] * data.n[j]))
        (A, pa), (B, qb) = m_sector(i, p), m_sector(j, q)
        rhs = omega(pt, A, pa, B, qb).scale(_fact(p) * _fact(q))
        dev = deviation(lhs, rhs, f)
        rows.append(StabRow(family(i, p, j, q), i, p, j, q, threshold(data.n, i, p, j, q), dev, lhs, rhs))
    return rows


def row_passes(row: Any, tol: Any) -> bool:
    return (not row.threshold_ok) or row.deviation <= tol


# -- random data ---------------------------------------------------------------
def _rand(rng: random.Random, nonzero: bool = False) -> Fraction:
    while True:
        v = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        if v or not nonzero:
            return v


def random_data(rng: random.Random, n: Sequence[int], field: Any = None, exact_roots: bool = True) -> HurwitzData:
    """Random rational superpotential; leading pole coefficients are perfect powers when ``exact_roots``."""
    field = field or RationalField()
    n0, ns = n[0], list(n[1:])
    a0 = [_rand(rng) for _ in range(max(n0 - 1, 0))]
    locs = rng.sample(range(-6, 7), len(ns))
    poles = []
    for loc, ni in zip(locs, ns):
        cs = [_rand(rng) for _ in range(ni - 1)]
        if exact_roots:
            c = Fraction(rng.choice([1, 2, 3, -1, -2, -3]), rng.choice([1, 2, 3]))
            if ni % 2 == 0:
                c = abs(c)
            cs.append(c**ni)
            poles.append((loc, cs, c))
        else:
            cs.append(_rand(rng, nonzero=True))
            poles.append((loc, cs))
    return HurwitzData.build(n0, a0, poles, field)


def family_data(n: Sequence[int], top0: Sequence[Any], tops: Sequence[Sequence[Any]], locs: Sequence[Any], roots: Sequence[Any], field: Any) -> HurwitzData:
    """Top-aligned, zero-extended coefficient family.

    ``a_{0,n0-2-i} = top0[i]`` and ``a_{k,n_k-i} = tops[k][i]`` with
    ``tops[k][0]`` the leading coefficient; everything else is zero.
    """
    n0 = n[0]
    a0 = [0] * max(n0 - 1, 0)
    for i, c in enumerate(top0):
        if n0 - 2 - i >= 0:
            a0[n0 - 2 - i] = c
    poles = []
    for k, nk in enumerate(n[1:]):
        cs = [0] * nk
        for i, c in enumerate(tops[k]):
            if nk - i >= 1:
                cs[nk - i - 1] = c
        root = roots[k] if roots is not None else None
        poles.append((locs[k], cs, root))
    return HurwitzData.build(n0, a0, poles, field)

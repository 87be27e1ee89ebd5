"""Points of the formal manifold, u-coordinates, densities, the tau-structure and Lax flows."""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import factorial
from typing import Any, Sequence

from .fields import Jet, JetField, RationalField, part_of, value_of
from .ratfun import GlobalRational, expand_at, polynomial_part, principal_part_at
from .series import (
    INF,
    Center,
    LaurentSeries,
    TruncationError,
    derive,
    mul,
    pow_rational,
    residue,
    residue_of_product,
    revert,
)
from .values import OmegaValue


class UnsupportedSector(ValueError):
    pass


class PointError(ValueError):
    """The data does not describe a point of the formal manifold."""


@dataclass(frozen=True)
class Sector:
    kind: str  # "e", "h0" or "h1"
    k: int = 0

    def __post_init__(self) -> None:
        if self.kind not in ("e", "h0", "h1"):
            raise UnsupportedSector(f"unknown sector kind {self.kind!r}")
        if self.kind == "e" and self.k != 0:
            raise UnsupportedSector("the e sector has no pole index")
        if self.kind != "e" and self.k < 1:
            raise UnsupportedSector("pole sectors are numbered from 1")

    def __str__(self) -> str:
        return "e" if self.kind == "e" else f"{self.kind}_{self.k}"

    @classmethod
    def parse(cls, s: str) -> "Sector":
        s = s.strip()
        if s == "e":
            return cls("e")
        kind, _, k = s.partition("_")
        return cls(kind, int(k))


E = Sector("e")


def h0(k: int) -> Sector:
    return Sector("h0", k)


def h1(k: int) -> Sector:
    return Sector("h1", k)


def sectors(m: int) -> list[Sector]:
    out = [E]
    for k in range(1, m + 1):
        out += [h0(k), h1(k)]
    return out


def sector_levels(m: int, pmax: int) -> list[tuple[Sector, int]]:
    """All supported (sector, level) pairs up to ``pmax``."""
    out = []
    for s in sectors(m):
        if s.kind == "h1":
            out.append((s, 0))
        else:
            out += [(s, p) for p in range(pmax + 1)]
    return out


@dataclass(frozen=True)
class UCoords:
    u0: tuple  # u_{0,1}, u_{0,2}, ...
    u: tuple  # per pole: (u_{k,0}, u_{k,1}, ...)

    @property
    def m(self) -> int:
        return len(self.u)

    def get(self, k: int, j: int, zero: Any = 0) -> Any:
        if k == 0:
            return self.u0[j - 1] if 1 <= j <= len(self.u0) else zero
        seq = self.u[k - 1]
        return seq[j] if 0 <= j < len(seq) else zero

    def replace(self, k: int, j: int, value: Any, zero: Any = 0) -> "UCoords":
        if k == 0:
            u0 = list(self.u0) + [zero] * max(0, j - len(self.u0))
            u0[j - 1] = value
            return UCoords(tuple(u0), self.u)
        u = [list(s) for s in self.u]
        seq = u[k - 1]
        seq += [zero] * max(0, j + 1 - len(seq))
        seq[j] = value
        return UCoords(self.u0, tuple(tuple(s) for s in u))


@dataclass(frozen=True, eq=False)
class WhithamPoint:
    phi: tuple
    lambda0: LaurentSeries
    lam: tuple
    field: Any
    cache: dict = dc_field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.validate()

    @property
    def m(self) -> int:
        return len(self.phi)

    def series(self, i: int) -> LaurentSeries:
        return self.lambda0 if i == 0 else self.lam[i - 1]

    def center(self, i: int) -> Center:
        return INF if i == 0 else Center(self.phi[i - 1])

    def validate(self) -> None:
        f = self.field
        if len(self.lam) != len(self.phi):
            raise PointError("one series per pole is required")
        a = self.lambda0
        if not a.center.is_inf or a.field != f:
            raise PointError("lambda0 must be a series at infinity over the point's backend")
        if a.normalize().denom != 1:
            raise PointError("lambda0 must have integer exponents")
        if a.order <= 0 or a.low > -1:
            raise PointError("lambda0 must determine its z and z^0 terms")
        if any(not f.is_zero(a.at(k)) for k in range(a.low, -1)) or not f.close(a.at(-1), 1):
            raise PointError("lambda0 must start with z")
        if not f.negligible(a.at(0)):
            raise PointError("lambda0 must have no z^0 term")
        for i, (phi, s) in enumerate(zip(self.phi, self.lam), start=1):
            if s.field != f or s.center.is_inf or not f.close(s.center.loc, phi):
                raise PointError(f"lambda{i} must be a series at phi_{i}")
            st = s.normalize()
            if st.denom != 1 or st.low != -1:
                raise PointError(f"lambda{i} must have a simple pole at phi_{i}")
            if value_of(st.coeffs[0]) == 0:
                raise PointError(f"lambda{i} has a vanishing residue coefficient")
        for i in range(len(self.phi)):
            for j in range(i):
                gap = value_of(self.phi[i]) - value_of(self.phi[j])
                if gap == 0 or (not f.exact and f.negligible(gap)):
                    raise PointError("pole locations must be distinct")

    # cached derived objects ----------------------------------------------
    def power(self, i: int, p: int) -> LaurentSeries:
        key = ("pow", i, p)
        if key not in self.cache:
            s = self.series(i)
            if p == 1:
                val = s
            elif p > 1 and ("pow", i, p - 1) in self.cache:
                val = mul(self.cache[("pow", i, p - 1)], s)
            else:
                val = pow_rational(s, p)
            self.cache[key] = val
        return self.cache[key]

    def dpower(self, i: int, p: int) -> LaurentSeries:
        key = ("dpow", i, p)
        if key not in self.cache:
            self.cache[key] = derive(self.power(i, p))
        return self.cache[key]

    def plus(self, p: int) -> GlobalRational:
        """(lambda0^{p+1})_{inf, >= 0}."""
        key = ("plus", p)
        if key not in self.cache:
            self.cache[key] = polynomial_part(self.power(0, p + 1))
        return self.cache[key]

    def minus(self, k: int, p: int) -> GlobalRational:
        """(lambda_k^{p+1})_{phi_k, <= -1}."""
        key = ("minus", k, p)
        if key not in self.cache:
            self.cache[key] = principal_part_at(self.power(k, p + 1))
        return self.cache[key]

    def values(self) -> "WhithamPoint":
        """The same point with jet parts removed."""
        if not isinstance(self.field, JetField):
            return self
        base = self.field.base
        strip = lambda s: LaurentSeries(
            Center(None) if s.center.is_inf else Center(value_of(s.center.loc)),
            s.denom,
            s.low,
            tuple(value_of(c) for c in s.coeffs),
            s.order,
            base,
        )
        return WhithamPoint(tuple(value_of(p) for p in self.phi), strip(self.lambda0), tuple(strip(s) for s in self.lam), base)


def _res_pair(R: GlobalRational, D: LaurentSeries) -> Any:
    """Residue at D's center of expand(R) * D."""
    Dt = D.trim()
    target = 1 if D.center.is_inf else -1
    N = target - Dt.low
    E = expand_at(R, D.center, N)
    return residue_of_product(E, Dt)


def _const(field: Any, q: Fraction) -> Any:
    ring = field.base if isinstance(field, JetField) else field
    return ring.coerce(q)


# -- coordinates -----------------------------------------------------------
def u_coords(pt: WhithamPoint, count: int | None = None) -> UCoords:
    """u_{0,j} from z = a - sum u_{0,j} a^{-j}; u_{k,j} from z = sum u_{k,j} a_k^{-j}."""
    za = revert(pt.lambda0)
    n0 = za.order - 1
    if count is not None:
        if n0 < count:
            raise TruncationError(f"lambda0 only determines {n0} u-coordinates")
        n0 = count
    u0 = tuple(-za.at(j) for j in range(1, n0 + 1))
    us = []
    for k in range(1, pt.m + 1):
        zk = revert(pt.series(k))
        nk = zk.order
        if count is not None:
            if nk < count + 1:
                raise TruncationError(f"lambda{k} only determines {nk} u-coordinates")
            nk = count + 1
        us.append(tuple(zk.at(j) for j in range(nk)))
    return UCoords(u0, tuple(us))


def point_of_u(u: UCoords, order: int, field: Any) -> WhithamPoint:
    """Rebuild a point from u-coordinates (missing ones are zero).

    ``order`` is the number of known terms of every reconstructed series.
    """
    if order < 2:
        raise ValueError("order must be at least 2")
    z = field.zero
    za = [field.one, z] + [-field.coerce(u.get(0, j, 0)) for j in range(1, order - 1)]
    a = revert(LaurentSeries(INF, 1, -1, tuple(za), order - 1, field))
    lam = []
    phis = []
    for k in range(1, u.m + 1):
        if field.is_zero(field.coerce(u.get(k, 1, 0))):
            raise PointError(f"u_{{{k},1}} must be nonzero")
        zk = [field.coerce(u.get(k, j, 0)) for j in range(0, order + 1)]
        s = revert(LaurentSeries(INF, 1, 0, tuple(zk), order + 1, field))
        phis.append(zk[0])
        lam.append(s)
    return WhithamPoint(tuple(phis), a, tuple(lam), field)


# -- densities and tau-structure ---------------------------------------------
def theta(pt: WhithamPoint, a: Sector, p: int) -> Any:
    if a.kind == "e":
        return -residue(pt.power(0, p + 1)) * _const(pt.field, Fraction(1, factorial(p + 1)))
    if a.k > pt.m:
        raise UnsupportedSector(f"pole {a.k} does not exist")
    if a.kind == "h0":
        return residue(pt.power(a.k, p + 1)) * _const(pt.field, Fraction(1, factorial(p + 1)))
    if p != 0:
        raise UnsupportedSector("h1 densities are only available at level 0")
    return pt.phi[a.k - 1]


def _check(pt: WhithamPoint, *secs: Sector) -> None:
    for s in secs:
        if s.kind != "e" and s.k > pt.m:
            raise UnsupportedSector(f"pole {s.k} does not exist")


def omega(pt: WhithamPoint, a: Sector, p: int, b: Sector, q: int) -> OmegaValue:
    """Tau-structure entry, evaluated by residues at the poles of the second factor."""
    _check(pt, a, b)
    if (a.kind == "h1" and p) or (b.kind == "h1" and q):
        raise UnsupportedSector("h1 entries exist only at level 0")
    f = pt.field
    if a.kind == "h1" and b.kind != "h1":
        return omega(pt, b, q, a, p)
    if a.kind == "h1" and b.kind == "h1":
        if a.k != b.k:
            # branch convention: the smaller pole label comes first in the argument
            lo, hi = sorted((a.k, b.k))
            return OmegaValue(f.zero, ((Fraction(1), pt.phi[lo - 1] - pt.phi[hi - 1]),))
        return OmegaValue(f.zero, ((Fraction(1), pt.series(a.k).at(-1)),))
    if b.kind == "h1":
        c = _const(f, Fraction(1, factorial(p + 1)))
        k = b.k
        inv = GlobalRational.pole(pt.phi[k - 1], [1], f)
        if a.kind == "e":
            val = -_res_pair(inv, pt.power(0, p + 1)) * c
        else:
            val = _res_pair(inv, pt.power(a.k, p + 1)) * c
        return OmegaValue(val)
    C = _const(f, Fraction(1, factorial(p + 1) * factorial(q + 1)))
    if a.kind == "h0" and b.kind == "h0":
        val = _res_pair(pt.minus(a.k, p), pt.dpower(b.k, q + 1)) * C
    elif a.kind == "e" and b.kind == "h0":
        val = -_res_pair(pt.plus(p), pt.dpower(b.k, q + 1)) * C
    elif a.kind == "h0" and b.kind == "e":
        val = -_res_pair(pt.minus(a.k, p), pt.dpower(0, q + 1)) * C
    else:
        val = _res_pair(pt.plus(p), pt.dpower(0, q + 1)) * C
    return OmegaValue(val)


def omega_transfer(pt: WhithamPoint, a: Sector, p: int, b: Sector, q: int) -> OmegaValue:
    """Independent evaluation of :func:`omega`.

    Terms that cannot contribute are dropped and the remaining residues are
    moved to the other poles with the residue theorem.
    """
    _check(pt, a, b)
    f = pt.field
    if a.kind == "h1" and b.kind != "h1":
        return omega_transfer(pt, b, q, a, p)
    if a.kind == "h1" and b.kind == "h1":
        u = u_coords(pt, 1)
        if a.k != b.k:
            lo, hi = sorted((a.k, b.k))
            return OmegaValue(f.zero, ((Fraction(1), u.get(lo, 0) - u.get(hi, 0)),))
        return OmegaValue(f.zero, ((Fraction(1), u.get(a.k, 1)),))
    if b.kind == "h1":
        c = _const(f, Fraction(1, factorial(p + 1)))
        k = b.k
        phik = pt.phi[k - 1]
        if a.kind == "e":
            return OmegaValue(pt.plus(p).evaluate(phik) * c)
        if a.k != k:
            return OmegaValue(-pt.minus(a.k, p).evaluate(phik) * c)
        # boundary law: derivative of theta_{h_k,0},p+1 along the flat field d/dh_{k,1}
        jp = lift(pt, [expand_at(GlobalRational.pole(phik, [1], f), pt.center(i), pt.series(i).order + 2) for i in range(pt.m + 1)], "h")
        return OmegaValue(part_of(theta(jp, a, p + 1), "h"))
    C = _const(f, Fraction(1, factorial(p + 1) * factorial(q + 1)))
    if a.kind == "h0" and b.kind == "h0":
        A = pt.minus(a.k, p)
        B = pt.minus(b.k, q).derive()
        if a.k != b.k:
            at_a = _expand_product(A, B, Center(pt.phi[a.k - 1]))
            at_inf = _expand_product(A, B, INF)
            return OmegaValue(-(at_a + at_inf) * C)
        reg = pt.dpower(b.k, q + 1) - expand_at(B, pt.center(b.k), pt.dpower(b.k, q + 1).order - 1)
        return OmegaValue((_res_pair(A, reg) - _expand_product(A, B, INF)) * C)
    if a.kind == "e" and b.kind == "h0":
        B = pt.minus(b.k, q).derive()
        return OmegaValue(_expand_product(pt.plus(p), B, INF) * C)
    if a.kind == "h0" and b.kind == "e":
        B = pt.plus(q).derive()
        return OmegaValue(_expand_product(pt.minus(a.k, p), B, Center(pt.phi[a.k - 1])) * C)
    # e, e: Res(P_p dA_q) = -Res(N_p dP_q) with N_p the negative part of lambda0^{p+1}
    full = pt.power(0, p + 1)
    neg = full - expand_at(pt.plus(p), INF, full.order - 1)
    dq = expand_at(pt.plus(q).derive(), INF, 2 * (q + 2))
    return OmegaValue(-residue_of_product(neg.trim(), dq) * C)


def _expand_product(A: GlobalRational, B: GlobalRational, c: Center) -> Any:
    """Residue at ``c`` of the product of two exact rational functions."""
    depth = sum(len(cs) for _, cs in A.parts) + sum(len(cs) for _, cs in B.parts) + len(A.poly) + len(B.poly) + 4
    EA = expand_at(A, c, depth)
    EB = expand_at(B, c, depth)
    return residue_of_product(EA, EB)


def dependence_indices(a: Sector, p: int, b: Sector, q: int) -> set[tuple[int, int]]:
    """u-coordinates an entry can depend on."""
    if a.kind == "h1" and b.kind != "h1":
        return dependence_indices(b, q, a, p)
    if b.kind == "h1" and a.kind != "h1":
        k = b.k
        if a.kind == "e":
            # the pole location enters through 1/(z - phi_k)
            return {(0, j) for j in range(1, p + 1)} | {(k, 0)}
        if a.k == k:
            return {(k, j) for j in range(0, p + 3)}
        return {(k, 0)} | {(a.k, j) for j in range(0, p + 2)}
    if a.kind == "h1" and b.kind == "h1":
        if a.k == b.k:
            return {(a.k, 1)}
        return {(a.k, 0), (b.k, 0)}
    if a.kind == "e" and b.kind == "e":
        return {(0, j) for j in range(1, p + q + 2)}
    if a.kind == "e":
        return {(0, j) for j in range(1, p + 1)} | {(b.k, j) for j in range(0, q + 2)}
    if b.kind == "e":
        return {(0, j) for j in range(1, q + 1)} | {(a.k, j) for j in range(0, p + 2)}
    if a.k == b.k:
        return {(a.k, j) for j in range(0, p + q + 4)}
    return {(a.k, j) for j in range(0, p + 2)} | {(b.k, j) for j in range(0, q + 2)}


# -- tangent vectors and flows ----------------------------------------------
def lift(pt: WhithamPoint, deltas: Sequence[LaurentSeries], tag: str) -> WhithamPoint:
    """Attach a tangent vector given by d(lambda_i)/d(eps) at fixed z.

    Returns a jet point whose coefficients and pole locations carry the
    first-order parts along ``tag``.
    """
    base = pt.field
    if isinstance(base, JetField):
        raise PointError("lift expects a point without jets")
    jf = JetField(base)
    new = []
    phis = []
    for i in range(pt.m + 1):
        s = pt.series(i)
        D = deltas[i]
        if i == 0:
            for k in range(D.low, min(1, D.order)):
                if not base.is_zero(D.at(k)):
                    raise PointError("direction leaves the shape z + O(1/z) at infinity")
            dco = D
            dphi = base.zero
        else:
            if D.low < -2 and any(not base.is_zero(D.at(k)) for k in range(D.low, -2)):
                raise PointError("direction has a pole of order above two")
            c1 = s.at(-1)
            dphi = D.at(-2) / c1 if D.order > -2 else base.zero
            dco = D + derive(s).scale(dphi)
        order = min(s.order, dco.order)
        coeffs = []
        for k in range(s.low, order):
            dv = dco.at(k) if k >= dco.low else base.zero
            coeffs.append(Jet(s.at(k), {tag: dv}))
        center = INF if i == 0 else Center(Jet(pt.phi[i - 1], {tag: dphi}))
        if i > 0:
            phis.append(center.loc)
        new.append(LaurentSeries(center, 1, s.low, tuple(coeffs), order, jf))
    return WhithamPoint(tuple(phis), new[0], tuple(new[1:]), jf)


def flat_direction(pt: WhithamPoint, a: Sector) -> list[LaurentSeries]:
    """d(lambda_i) for the flat fields d/dh_{k,0} and d/dh_{k,1}."""
    f = pt.field
    if a.kind == "h1":
        R = GlobalRational.pole(pt.phi[a.k - 1], [1], f)
    elif a.kind == "h0":
        R = -principal_part_at(derive(pt.series(a.k)))
    else:
        raise UnsupportedSector("only pole flat fields are represented")
    return [expand_at(R, pt.center(i), pt.series(i).order + 2) for i in range(pt.m + 1)]


def _strip_gr(G: GlobalRational, base: Any) -> GlobalRational:
    return G.map(value_of, base)


def _dx_gr(G: GlobalRational, base: Any, tag: str) -> GlobalRational:
    return G.map(lambda c: base.coerce(part_of(c, tag)), base, loc_fn=value_of)


def lax_rhs(pt: WhithamPoint, flow: tuple[int, int], tag: str = "x") -> list[LaurentSeries]:
    """d(lambda_i)/d(sigma^{flow}) = {f, lambda_i} evaluated on an x-jet point."""
    jf = pt.field
    if not isinstance(jf, JetField):
        raise PointError("lax_rhs needs a point carrying x-jets")
    base = jf.base
    vp = pt.values()
    j, k = flow
    if j < 0 or j > pt.m or k < 0 or (j == 0 and k == 0):
        raise ValueError(f"unsupported flow {flow}")
    if j == 0:
        G = polynomial_part(pt.power(0, k))
        fz = _strip_gr(G, base).derive()
        fx = _dx_gr(G, base, tag)
    elif k > 0:
        G = -principal_part_at(pt.power(j, k))
        Gv = _strip_gr(G, base)
        dphi = base.coerce(part_of(pt.phi[j - 1], tag))
        fz = Gv.derive()
        fx = _dx_gr(G, base, tag) - Gv.derive().scale(dphi)
    else:
        phi = vp.phi[j - 1]
        dphi = base.coerce(part_of(pt.phi[j - 1], tag))
        fz = GlobalRational.pole(phi, [1], base)
        fx = GlobalRational.pole(phi, [-dphi], base)
    out = []
    for i, dx in enumerate(x_derivative(pt, tag)):
        sv = vp.series(i)
        dz = derive(sv)
        N = pt.series(i).order + 2 * k + 4
        Ez = expand_at(fz, sv.center, N)
        Ex = expand_at(fx, sv.center, N)
        out.append(mul(Ez, dx) - mul(Ex, dz))
    return out


def x_derivative(pt: WhithamPoint, tag: str = "x") -> list[LaurentSeries]:
    """d(lambda_i)/dx at fixed z, read off an x-jet point."""
    jf = pt.field
    if not isinstance(jf, JetField):
        raise PointError("x_derivative needs a point carrying x-jets")
    base = jf.base
    vp = pt.values()
    out = []
    for i in range(pt.m + 1):
        s = pt.series(i)
        sv = vp.series(i)
        D = LaurentSeries(sv.center, s.denom, s.low, tuple(base.coerce(part_of(c, tag)) for c in s.coeffs), s.order, base)
        if i == 0:
            out.append(D)
        else:
            out.append(D - derive(sv).scale(base.coerce(part_of(pt.phi[i - 1], tag))))
    return out


def flow_for(a: Sector, p: int) -> tuple[tuple[int, int], Fraction]:
    """Lax flow and factor realising d/dT^{a,p}."""
    if a.kind == "e":
        return (0, p + 1), Fraction(1, factorial(p + 1))
    if a.kind == "h0":
        return (a.k, p + 1), Fraction(1, factorial(p + 1))
    if p:
        raise UnsupportedSector("h1 flows exist only at level 0")
    return (a.k, 0), Fraction(1)


def tau_flow_residual(pt: WhithamPoint, a: Sector, p: int, b: Sector, q: int, tag: str = "x") -> Any:
    """d theta_{b,q} / dT^{a,p} minus d_x Omega_{a,p;b,q}; zero when the structure is a tau-structure."""
    flow, fac = flow_for(a, p)
    rhs = lax_rhs(pt, flow, tag)
    vp = pt.values()
    base = vp.field
    moved = lift(vp, [r.scale(base.coerce(fac)) for r in rhs], "T")
    lhs = part_of(theta(moved, b, q), "T")
    return lhs - omega(pt, a, p, b, q).part(tag)


# -- random points ------------------------------------------------------------
def random_rational(rng: random.Random, nonzero: bool = False) -> Fraction:
    while True:
        v = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        if v or not nonzero:
            return v


def random_u(rng: random.Random, m: int, count: int) -> UCoords:
    locs = rng.sample(range(-6, 7), m)
    u0 = tuple(random_rational(rng) for _ in range(count))
    us = []
    for k in range(m):
        seq = [Fraction(locs[k]), random_rational(rng, nonzero=True)] + [random_rational(rng) for _ in range(count - 1)]
        us.append(tuple(seq))
    return UCoords(u0, tuple(us))


def random_point(rng: random.Random, m: int, order: int, field: Any = None, jets: str | None = None) -> WhithamPoint:
    """A point with random rational coefficients; optional random first-order parts along ``jets``."""
    field = field or RationalField()
    locs = rng.sample(range(-6, 7), m)

    def mk(v: Fraction, free: bool = True) -> Any:
        v = field.coerce(v)
        if jets is None:
            return v
        return Jet(v, {jets: field.coerce(random_rational(rng)) if free else field.zero})

    tf = JetField(field) if jets else field
    a = [mk(Fraction(1), False), mk(Fraction(0), False)] + [mk(random_rational(rng)) for _ in range(order - 1)]
    lam0 = LaurentSeries(INF, 1, -1, tuple(a), order, tf)
    phis = []
    lams = []
    for k in range(m):
        phi = mk(Fraction(locs[k]))
        cs = [mk(random_rational(rng, nonzero=True))] + [mk(random_rational(rng)) for _ in range(order)]
        phis.append(phi)
        lams.append(LaurentSeries(Center(phi), 1, -1, tuple(cs), order, tf))
    return WhithamPoint(tuple(phis), lam0, tuple(lams), tf)

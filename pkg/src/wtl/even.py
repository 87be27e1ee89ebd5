"""Parity-symmetric superpotentials and the reduction of the tau-structure to them."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Any, Sequence

from .fields import RationalField, value_of
from .hurwitz import (
    HurwitzData,
    Pole,
    flat_coords,
    omega_H,
    threshold,
    u_point,
    v_index,
)
from .openwdvv import OpenSeries, S_TRUNC, open_deviation, theta_tilde_H, theta_tilde_M
from .values import OmegaValue, deviation
from .whitham import E, Sector, WhithamPoint, h0, h1, omega


class ParityError(ValueError):
    pass


@dataclass(frozen=True)
class EvenPair:
    """A factor sum_j b_j (z^2 - r^2)^{-j}; ``root`` fixes the branch at z = +r."""

    r: Any
    coeffs: tuple  # b_{i,1..n_i'}
    root: Any = None


@dataclass(frozen=True, eq=False)
class EvenHurwitzData:
    """lambda = z^{2 n0'} + sum b0[j] z^{2j} + sum b1[j-1] z^{-2j} + sum_i sum_j b_{i,j} (z^2 - b_{i,0})^{-j}."""

    n0p: int
    b0: tuple  # b_{0,0..n0'-1}
    b1: tuple  # b_{1,1..n1'}
    pairs: tuple
    field: Any
    root1: Any = None  # a chosen (2 n1')-th root of b_{1,n1'}

    def __post_init__(self) -> None:
        f = self.field
        if self.n0p < 1 or len(self.b0) != self.n0p:
            raise ParityError("need n0' >= 1 and coefficients b_{0,0..n0'-1}")
        if not self.b1 or value_of(self.b1[-1]) == 0:
            raise ParityError("the pole at z = 0 needs a nonzero leading coefficient")
        rs = []
        for P in self.pairs:
            if value_of(P.r) == 0:
                raise ParityError("b_{i,0} = 0 collides with the pole at z = 0")
            if not P.coeffs or value_of(P.coeffs[-1]) == 0:
                raise ParityError("paired poles need a nonzero leading coefficient")
            for r in rs:
                if f.close(r, P.r) or f.close(r, -P.r):
                    raise ParityError("paired pole locations must be distinct")
            rs.append(P.r)

    @property
    def m_prime(self) -> int:
        return 1 + len(self.pairs)

    @property
    def n_prime(self) -> tuple:
        return (self.n0p, len(self.b1)) + tuple(len(P.coeffs) for P in self.pairs)

    @classmethod
    def build(cls, b0: Sequence, b1: Sequence, pairs: Sequence[tuple], field: Any, root1: Any = None) -> "EvenHurwitzData":
        """``pairs`` holds ``(r, [b_1..b_n])`` or ``(r, [b_1..b_n], root)`` with b_{i,0} = r^2."""
        ps = []
        for P in pairs:
            root = field.coerce(P[2]) if len(P) > 2 and P[2] is not None else None
            ps.append(EvenPair(field.coerce(P[0]), tuple(field.coerce(c) for c in P[1]), root))
        return cls(
            len(b0),
            tuple(field.coerce(c) for c in b0),
            tuple(field.coerce(c) for c in b1),
            tuple(ps),
            field,
            None if root1 is None else field.coerce(root1),
        )


def _pair_parts(r: Any, coeffs: Sequence[Any], field: Any) -> tuple[tuple, tuple]:
    """Principal parts of sum_j b_j (z - r)^{-j} (z + r)^{-j} at +r and at -r."""
    n = len(coeffs)

    def at(rho: Any) -> tuple:
        out = [field.zero] * n
        inv = 1 / (rho * 2)
        for j, b in enumerate(coeffs, start=1):
            # (z + rho)^{-j} = sum_k C(j+k-1, k) (-1)^k (2 rho)^{-j-k} t^k, t = z - rho
            for k in range(0, j):
                c = b * inv ** (j + k) * field.coerce(comb(j + k - 1, k) * (-1) ** k)
                out[j - k - 1] = out[j - k - 1] + c
        return tuple(out)

    return at(r), at(-r)


def expand_even(data: EvenHurwitzData) -> HurwitzData:
    """The same superpotential as generic Hurwitz data with profile (2n0'; 2n1', n2', n2', ...)."""
    f = data.field
    n0 = 2 * data.n0p
    a0 = [f.zero] * (n0 - 1)
    for j, b in enumerate(data.b0):
        a0[2 * j] = b
    n1 = 2 * len(data.b1)
    c1 = [f.zero] * n1
    for j, b in enumerate(data.b1, start=1):
        c1[2 * j - 1] = b
    poles = [Pole(f.zero, tuple(c1), data.root1)]
    for P in data.pairs:
        plus, minus = _pair_parts(P.r, P.coeffs, f)
        root_minus = None if P.root is None else -P.root
        poles.append(Pole(P.r, plus, P.root))
        poles.append(Pole(-P.r, minus, root_minus))
    return HurwitzData(n0, tuple(a0), tuple(poles), f)


# -- parity checks ------------------------------------------------------------------
def parity_defect(h: HurwitzData) -> Any:
    """Largest coefficient of lambda(z) - lambda(-z), read off from the partial fractions."""
    f = h.field
    worst = 0
    for k, c in enumerate(h.lam().poly):
        if k % 2:
            worst = max(worst, abs(value_of(c)))
    for P in h.poles:
        mirror = None
        for Q in h.poles:
            if f.close(Q.loc, -P.loc):
                mirror = Q
        if mirror is None or mirror.n != P.n:
            return float("inf")
        for j, (a, b) in enumerate(zip(P.coeffs, mirror.coeffs), start=1):
            worst = max(worst, abs(value_of(a) - value_of(b) * (-1) ** j))
    return worst


def constraint_defect(h: HurwitzData) -> Any:
    """Largest violation of v_{0,even} = 0, v_{1,even} = 0 and v_{2i-2,j} = -v_{2i-1,j}."""
    v = flat_coords(h)
    worst = 0
    for j in range(2, h.n0, 2):
        worst = max(worst, abs(value_of(v.get(0, j))))
    for j in range(0, h.n[1] + 1, 2):
        worst = max(worst, abs(value_of(v.get(1, j))))
    for i in range(2, h.m + 1, 2):
        for j in range(0, h.n[i] + 1):
            worst = max(worst, abs(value_of(v.get(i, j)) + value_of(v.get(i + 1, j))))
    return worst


def point_parity_defect(pt: WhithamPoint) -> Any:
    """Largest violation of -l0(z) = l0(-z), -l1(z) = l1(-z), l_{2j-2}(-z) = l_{2j-1}(z)."""
    worst = 0
    s0 = pt.lambda0
    for i, c in enumerate(s0.coeffs):
        k = s0.low + i
        if k % 2 == 0:
            worst = max(worst, abs(value_of(c)))
    s1 = pt.lam[0]
    worst = max(worst, abs(value_of(pt.phi[0])))
    for i, c in enumerate(s1.coeffs):
        k = s1.low + i
        if k % 2 == 0:
            worst = max(worst, abs(value_of(c)))
    for a in range(1, pt.m - 1, 2):
        P, M = pt.lam[a], pt.lam[a + 1]
        worst = max(worst, abs(value_of(pt.phi[a]) + value_of(pt.phi[a + 1])))
        top = min(P.order, M.order)
        for k in range(min(P.low, M.low), top):
            worst = max(worst, abs(value_of(M.at(k)) - value_of(P.at(k)) * (-1) ** k))
    return worst


def check_even(h: HurwitzData, field: Any = None) -> None:
    f = field or h.field
    d = parity_defect(h)
    if not (d == 0 if f.exact else d <= f.tol):
        raise ParityError(f"superpotential is not even (defect {d})")


# -- even slots -------------------------------------------------------------------
@dataclass(frozen=True)
class EvenSlot:
    """Rescaled even coordinate hat v_{i,p}; ``i`` is 0, 1 or an even pair index 2k-2."""

    i: int
    p: int


def even_slots(h: HurwitzData, pmax: int) -> list[EvenSlot]:
    out = []
    for p in range(1, pmax + 1, 2):
        if v_index(h, 0, p) is not None:
            out.append(EvenSlot(0, p))
    for p in range(1, pmax + 1, 2):
        if v_index(h, 1, p) is not None:
            out.append(EvenSlot(1, p))
    for i in range(2, h.m + 1, 2):
        for p in range(0, pmax + 1):
            if v_index(h, i, p) is not None:
                out.append(EvenSlot(i, p))
    return out


def _terms(s: EvenSlot) -> list[tuple[int, int]]:
    """(sign, pole index) pairs making up the slot."""
    if s.i in (0, 1):
        return [(1, s.i)]
    return [(1, s.i), (-1, s.i + 1)]


def omega_even_H(h: HurwitzData, a: tuple[int, int], b: tuple[int, int], path: str = "combine") -> OmegaValue:
    """Omega^even on flat indices of the even coordinate set.

    ``combine`` forms the signed sums of full entries; ``mirror`` uses the
    z -> -z symmetry so that only entries at the + poles are evaluated.
    """
    (i, j), (k, l) = a, b
    ta = [(1, i)] if i in (0, 1) else [(1, i), (-1, i + 1)]
    tb = [(1, k)] if k in (0, 1) else [(1, k), (-1, k + 1)]
    if path == "combine":
        out = OmegaValue(h.field.zero)
        for sa, ia in ta:
            for sb, ib in tb:
                out = out + omega_H(h, (ia, j), (ib, l)).scale(sa * sb)
        return out
    if path != "mirror":
        raise ValueError(f"unknown path {path!r}")
    if len(ta) == 1 and len(tb) == 1:
        return omega_H(h, a, b)
    if len(ta) == 1:
        return omega_H(h, a, b).scale(2)
    if len(tb) == 1:
        return omega_H(h, a, b).scale(2)
    return (omega_H(h, (i, j), (k, l)) - omega_H(h, (i, j), (k + 1, l))).scale(2)


def even_indices(h: HurwitzData) -> list[tuple[int, int]]:
    out = [(0, j) for j in range(1, h.n0, 2)]
    out += [(1, j) for j in range(1, h.n[1], 2)]
    for i in range(2, h.m + 1, 2):
        out += [(i, j) for j in range(0, h.n[i] + 1)]
    return out


def omega_even_M(pt: WhithamPoint, a: EvenSlot, b: EvenSlot) -> OmegaValue:
    """The reduced tau-structure entry matching the rescaled slots (flow normalizations included)."""
    out = OmegaValue(pt.field.zero)
    for sa, A, pa, fa in _m_terms(a):
        for sb, B, qb, fb in _m_terms(b):
            out = out + omega(pt, A, pa, B, qb).scale(sa * sb * fa * fb)
    return out


def _m_terms(s: EvenSlot) -> list[tuple[int, Sector, int, int]]:
    fac = factorial(s.p - 1) if s.p >= 1 else 1
    if s.i == 0:
        return [(1, E, s.p - 1, fac)]
    if s.i == 1:
        return [(1, h0(1), s.p - 1, fac)]
    if s.p == 0:
        return [(1, h1(s.i), 0, 1), (-1, h1(s.i + 1), 0, 1)]
    return [(1, h0(s.i), s.p - 1, fac), (-1, h0(s.i + 1), s.p - 1, fac)]


@dataclass(frozen=True)
class EvenRow:
    a: EvenSlot
    b: EvenSlot
    threshold_ok: bool
    deviation: Any
    dual_deviation: Any
    lhs: OmegaValue
    rhs: OmegaValue


def _slot_threshold(h: HurwitzData, a: EvenSlot, b: EvenSlot) -> bool:
    return all(threshold(h.n, ia, a.p, ib, b.p) for _, ia in _terms(a) for _, ib in _terms(b))


def even_stabilization_report(data: EvenHurwitzData | HurwitzData, pmax: int, qmax: int, terms: int | None = None) -> list[EvenRow]:
    h = expand_even(data) if isinstance(data, EvenHurwitzData) else data
    check_even(h)
    f = h.field
    pt = u_point(h, terms or (pmax + qmax + 8))
    slots = even_slots(h, max(pmax, qmax))
    rows = []
    for x, a in enumerate(slots):
        for b in slots[x:]:
            if a.p > pmax and b.p > pmax:
                continue
            ia, ib = v_index(h, a.i, a.p), v_index(h, b.i, b.p)
            scale = Fraction(1, h.n[a.i] * h.n[b.i])
            lhs = omega_even_H(h, ia, ib, "combine").scale(scale)
            alt = omega_even_H(h, ia, ib, "mirror").scale(scale)
            rhs = omega_even_M(pt, a, b)
            rows.append(
                EvenRow(
                    a,
                    b,
                    _slot_threshold(h, a, b),
                    deviation(lhs, rhs, f),
                    deviation(lhs, alt, f, up_to_sign=True),
                    lhs,
                    rhs,
                )
            )
    return rows


# -- even open sector -----------------------------------------------------------------
@dataclass(frozen=True)
class EvenOpenRow:
    slot: EvenSlot
    threshold_ok: bool
    max_coeff_dev: Any
    s_trunc_order: int
    exact_logs: bool


def theta_tilde_even_H(h: HurwitzData, idx: tuple[int, int] | str) -> OpenSeries:
    if idx == "s":
        return theta_tilde_H(h, "s")
    i, j = idx
    if i in (0, 1):
        return theta_tilde_H(h, idx)
    return theta_tilde_H(h, (i, j)) - theta_tilde_H(h, (i + 1, j))


def theta_tilde_even_M(pt: WhithamPoint, slot: EvenSlot, strunc: int = S_TRUNC) -> OpenSeries:
    """The reduced open densities in the combination matching ``slot`` (pair labels follow the right-hand side)."""
    p = slot.p
    if slot.i == 0:
        return (theta_tilde_M(pt, "s", p - 1, strunc) + theta_tilde_M(pt, E, p - 1, strunc)).scale(factorial(p - 1))
    if slot.i == 1:
        return theta_tilde_M(pt, h0(1), p - 1, strunc).scale(factorial(p - 1))
    if p == 0:
        return theta_tilde_M(pt, h1(slot.i), 0, strunc) - theta_tilde_M(pt, h1(slot.i + 1), 0, strunc)
    return (theta_tilde_M(pt, h0(slot.i), p - 1, strunc) - theta_tilde_M(pt, h0(slot.i + 1), p - 1, strunc)).scale(
        factorial(p - 1)
    )


def even_open_report(data: EvenHurwitzData | HurwitzData, pmax: int, strunc: int = S_TRUNC) -> list[EvenOpenRow]:
    h = expand_even(data) if isinstance(data, EvenHurwitzData) else data
    check_even(h)
    pt = u_point(h, pmax + strunc + 6)
    rows = []
    for s in even_slots(h, pmax):
        lhs = theta_tilde_even_H(h, v_index(h, s.i, s.p)).scale(Fraction(1, h.n[s.i]))
        rhs = theta_tilde_even_M(pt, s, strunc)
        dev = open_deviation(lhs, rhs, strunc)
        ok = all(h.n[i] >= s.p for _, i in _terms(s))
        rows.append(EvenOpenRow(s, ok, dev, strunc, dev is not None))
    return rows


# -- random data --------------------------------------------------------------------
def random_even(rng: random.Random, n_prime: Sequence[int], field: Any = None) -> EvenHurwitzData:
    """Exact even data: rational r = sqrt(b_{i,0}) and leading coefficients that are perfect powers."""
    field = field or RationalField()

    def q(nonzero: bool = False) -> Fraction:
        while True:
            v = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
            if v or not nonzero:
                return v

    n0p, n1p = n_prime[0], n_prime[1]
    b0 = [q() for _ in range(n0p)]
    c1 = Fraction(rng.choice([1, 2, 3]), rng.choice([1, 2]))
    b1 = [q() for _ in range(n1p - 1)] + [c1 ** (2 * n1p)]
    rs = rng.sample([Fraction(k, 2) for k in range(1, 9)], len(n_prime) - 2)
    pairs = []
    for r, npr in zip(rs, n_prime[2:]):
        c = Fraction(rng.choice([1, 2, 3, -1, -2]), rng.choice([1, 2]))
        # the leading coefficient at +r is b_n / (2r)^n; make it c^n
        lead = c**npr * (2 * r) ** npr
        pairs.append((r, [q() for _ in range(npr - 1)] + [lead], c))
    return EvenHurwitzData.build(b0, b1, pairs, field, root1=c1)

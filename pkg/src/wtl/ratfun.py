"""Global rational functions: a polynomial plus principal parts at finite poles."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Any, Callable, Iterable, Sequence

from .fields import JetField
from .series import INF, Center, LaurentSeries, SeriesError, TruncationError


def _ring(field: Any) -> Any:
    return field.base if isinstance(field, JetField) else field


def _strip(seq: Sequence[Any], field: Any) -> tuple:
    out = list(seq)
    while out and field.is_zero(out[-1]):
        out.pop()
    return tuple(out)


@dataclass(frozen=True, eq=False)
class GlobalRational:
    """``sum poly[k] z^k + sum_loc sum_j parts[loc][j-1] (z - loc)^{-j}``."""

    poly: tuple
    parts: tuple  # ((loc, (c_-1, c_-2, ...)), ...)
    field: Any

    @classmethod
    def zero(cls, field: Any) -> "GlobalRational":
        return cls((), (), field)

    @classmethod
    def polynomial(cls, coeffs: Iterable[Any], field: Any) -> "GlobalRational":
        return cls(tuple(field.coerce(c) for c in coeffs), (), field)

    @classmethod
    def pole(cls, loc: Any, coeffs: Iterable[Any], field: Any) -> "GlobalRational":
        return cls((), ((field.coerce(loc), tuple(field.coerce(c) for c in coeffs)),), field)

    def __repr__(self) -> str:
        return f"GlobalRational(poly={list(self.poly)!r}, parts={[(l, list(c)) for l, c in self.parts]!r})"

    # -- linear structure -------------------------------------------------
    def _find(self, parts: list, loc: Any) -> int:
        for i, (l, _) in enumerate(parts):
            if self.field.close(l, loc):
                return i
        return -1

    def __add__(self, other: "GlobalRational") -> "GlobalRational":
        if not isinstance(other, GlobalRational):
            return self + GlobalRational.polynomial([other], self.field)
        if self.field != other.field:
            raise SeriesError("backend mismatch")
        z = self.field.zero
        n = max(len(self.poly), len(other.poly))
        poly = [
            (self.poly[i] if i < len(self.poly) else z) + (other.poly[i] if i < len(other.poly) else z)
            for i in range(n)
        ]
        parts = [(l, list(c)) for l, c in self.parts]
        for loc, cs in other.parts:
            i = self._find(parts, loc)
            if i < 0:
                parts.append((loc, list(cs)))
                continue
            mine = parts[i][1]
            for j, c in enumerate(cs):
                if j < len(mine):
                    mine[j] = mine[j] + c
                else:
                    mine.append(c)
        return GlobalRational(tuple(poly), tuple((l, tuple(c)) for l, c in parts), self.field)

    __radd__ = __add__

    def __neg__(self) -> "GlobalRational":
        return self.scale(-1)

    def __sub__(self, other: "GlobalRational") -> "GlobalRational":
        return self + (-other)

    def scale(self, c: Any) -> "GlobalRational":
        if isinstance(c, (int, Fraction)):
            c = _ring(self.field).coerce(c)
        return GlobalRational(
            tuple(x * c for x in self.poly),
            tuple((l, tuple(x * c for x in cs)) for l, cs in self.parts),
            self.field,
        )

    def __mul__(self, c: Any) -> "GlobalRational":
        if isinstance(c, GlobalRational):
            raise TypeError("products of global rationals are formed after expansion to series")
        return self.scale(c)

    __rmul__ = __mul__

    def map(self, fn: Callable[[Any], Any], field: Any, loc_fn: Callable[[Any], Any] | None = None) -> "GlobalRational":
        lf = loc_fn or fn
        return GlobalRational(
            tuple(fn(x) for x in self.poly),
            tuple((lf(l), tuple(fn(x) for x in cs)) for l, cs in self.parts),
            field,
        )

    def compact(self) -> "GlobalRational":
        f = self.field
        parts = tuple((l, _strip(cs, f)) for l, cs in self.parts)
        parts = tuple((l, cs) for l, cs in parts if cs)
        return GlobalRational(_strip(self.poly, f), parts, f)

    def is_zero(self) -> bool:
        c = self.compact()
        return not c.poly and not c.parts

    def equals(self, other: "GlobalRational") -> bool:
        return (self - other).is_zero()

    def locations(self) -> list:
        return [l for l, _ in self.parts]

    def part_at(self, loc: Any) -> tuple:
        i = self._find(list(self.parts), loc)
        return self.parts[i][1] if i >= 0 else ()

    # -- calculus ---------------------------------------------------------
    def derive(self) -> "GlobalRational":
        ring = _ring(self.field)
        poly = tuple(self.poly[k] * ring.coerce(k) for k in range(1, len(self.poly)))
        parts = []
        for loc, cs in self.parts:
            new = [self.field.zero] * (len(cs) + 1)
            for j, c in enumerate(cs, start=1):
                new[j] = c * ring.coerce(-j)
            parts.append((loc, tuple(new)))
        return GlobalRational(poly, tuple(parts), self.field)

    def evaluate(self, x: Any) -> Any:
        f = self.field
        s = f.zero
        for c in reversed(self.poly):
            s = s * x + c
        for loc, cs in self.parts:
            if not cs:
                continue
            inv = 1 / (x - loc)
            p = inv
            for c in cs:
                s = s + c * p
                p = p * inv
        return s

    def expand_at(self, c: Center, N: int) -> LaurentSeries:
        """Expansion at ``c`` keeping local exponents up to ``N`` inclusive."""
        return expand_at(self, c, N)

    def residue_at(self, c: Center) -> Any:
        return residue_at(self, c)


def expand_at(R: GlobalRational, c: Center, N: int) -> LaurentSeries:
    field = R.field
    ring = _ring(field)
    order = N + 1
    if c.is_inf:
        top = len(R.poly) - 1
        while top >= 0 and field.is_zero(R.poly[top]):
            top -= 1
        low = min(-max(top, 0), order)
        acc = [field.zero] * (order - low)
        for k, p in enumerate(R.poly):
            idx = -k
            if low <= idx < order:
                acc[idx - low] = acc[idx - low] + p
        for loc, cs in R.parts:
            if not cs:
                continue
            # (z - loc)^{-j} = sum_n C(j+n-1, n) loc^n z^{-j-n}
            pw = [field.one]
            for _ in range(max(0, order)):
                pw.append(pw[-1] * loc)
            for j, cj in enumerate(cs, start=1):
                if field.is_zero(cj):
                    continue
                for n in range(0, order - j):
                    acc[j + n - low] = acc[j + n - low] + cj * pw[n] * ring.coerce(comb(j + n - 1, n))
        return LaurentSeries(c, 1, low, tuple(acc), order, field)
    x0 = c.loc
    own = ()
    for loc, cs in R.parts:
        if field.close(loc, x0):
            own = cs
    low = min(-len(own), 0, order) if own else min(0, order)
    acc = [field.zero] * (order - low)
    for j, cj in enumerate(own, start=1):
        if -j < order:
            acc[-j - low] = acc[-j - low] + cj
    if R.poly and order > 0:
        # z^k = (x0 + t)^k
        pw = [field.one]
        for _ in range(len(R.poly)):
            pw.append(pw[-1] * x0)
        for k, p in enumerate(R.poly):
            if field.is_zero(p):
                continue
            for i in range(0, min(k, order - 1) + 1):
                acc[i - low] = acc[i - low] + p * pw[k - i] * ring.coerce(comb(k, i))
    for loc, cs in R.parts:
        if not cs or field.close(loc, x0):
            continue
        inv = 1 / (x0 - loc)
        invp = [field.one]
        for _ in range(len(cs) + max(order, 0) + 1):
            invp.append(invp[-1] * inv)
        for j, cj in enumerate(cs, start=1):
            if field.is_zero(cj):
                continue
            for n in range(0, order):
                coef = comb(j + n - 1, n) * (-1 if n % 2 else 1)
                acc[n - low] = acc[n - low] + cj * invp[j + n] * ring.coerce(coef)
    return LaurentSeries(c, 1, low, tuple(acc), order, field)


def residue_at(R: GlobalRational, c: Center) -> Any:
    field = R.field
    if c.is_inf:
        s = field.zero
        for _, cs in R.parts:
            if cs:
                s = s - cs[0]
        return s
    for loc, cs in R.parts:
        if field.close(loc, c.loc):
            return cs[0] if cs else field.zero
    return field.zero


def residue_sum(R: GlobalRational) -> Any:
    s = residue_at(R, INF)
    for loc, _ in R.parts:
        s = s + residue_at(R, Center(loc))
    return s


def principal_part_at(f: LaurentSeries) -> GlobalRational:
    if f.center.is_inf:
        raise SeriesError("principal parts are taken at finite centers")
    if f.order < 0:
        raise TruncationError("truncation does not cover the exponent -1")
    field = f.field
    d = f.denom
    cs = []
    for k in range(f.low, 0):
        c = f.at(k)
        if k % d:
            if not field.is_zero(c):
                raise SeriesError("fractional negative exponents have no rational principal part")
            continue
        cs.append((-k // d, c))
    if not cs:
        return GlobalRational.zero(field)
    J = max(j for j, _ in cs)
    out = [field.zero] * J
    for j, c in cs:
        out[j - 1] = c
    return GlobalRational((), ((f.center.loc, tuple(out)),), field)


def polynomial_part(f: LaurentSeries) -> GlobalRational:
    if not f.center.is_inf:
        raise SeriesError("polynomial parts are taken at infinity")
    if f.order < 1:
        raise TruncationError("truncation starts above exponent 0")
    field = f.field
    d = f.denom
    poly: dict[int, Any] = {}
    for k in range(f.low, 1):
        c = f.at(k)
        if k % d:
            if not field.is_zero(c):
                raise SeriesError("fractional nonnegative exponents have no polynomial part")
            continue
        poly[-k // d] = c
    if not poly:
        return GlobalRational.zero(field)
    deg = max(poly)
    return GlobalRational(tuple(poly.get(i, field.zero) for i in range(deg + 1)), (), field)

"""Coefficient backends: exact rationals, fixed-precision floats and first-order jets."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import mpmath


class BackendError(ValueError):
    """Raised when a value cannot be represented in the requested backend."""


class RootUnavailable(BackendError):
    """An exact root of a leading coefficient does not exist in the backend."""


def _as_fraction(x: Any) -> Fraction | None:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        return Fraction(int(x))
    if isinstance(x, int):
        return Fraction(x)
    return None


def exact_root(c: Fraction, r: Fraction) -> Fraction | None:
    """Return c**r when it is rational (real branch, positive for even roots)."""
    c = Fraction(c)
    r = Fraction(r)
    if c == 0:
        return Fraction(0) if r > 0 else None
    num, den = r.numerator, r.denominator
    if den == 1:
        return c**num
    neg = c < 0
    if neg and den % 2 == 0:
        return None
    a, b = abs(c.numerator), c.denominator
    ra, rb = _int_root(a, den), _int_root(b, den)
    if ra is None or rb is None:
        return None
    base = Fraction(ra, rb)
    if neg:
        base = -base
    return base**num


def _int_root(a: int, k: int) -> int | None:
    if a < 2:
        return a
    lo, hi = 1, 1 << (a.bit_length() // k + 1)
    while lo <= hi:
        mid = (lo + hi) // 2
        v = mid**k
        if v == a:
            return mid
        if v < a:
            lo = mid + 1
        else:
            hi = mid - 1
    return None


class RationalField:
    """Exact arithmetic with :class:`fractions.Fraction`."""

    name = "rational"
    exact = True

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RationalField)

    def __hash__(self) -> int:
        return hash("rational")

    def __repr__(self) -> str:
        return "RationalField()"

    def coerce(self, x: Any) -> Fraction:
        f = _as_fraction(x)
        if f is not None:
            return f
        if isinstance(x, str):
            return Fraction(x.strip())
        raise BackendError(f"cannot represent {x!r} exactly")

    @property
    def zero(self) -> Fraction:
        return Fraction(0)

    @property
    def one(self) -> Fraction:
        return Fraction(1)

    def is_zero(self, x: Any) -> bool:
        return x == 0

    def negligible(self, x: Any) -> bool:
        return x == 0

    def close(self, a: Any, b: Any, tol: Any = None) -> bool:
        return a == b

    def root(self, c: Any, r: Fraction) -> Fraction:
        v = exact_root(self.coerce(c), Fraction(r))
        if v is None:
            raise RootUnavailable(f"{c}^({r}) is not rational; supply the root or use the float backend")
        return v

    def magnitude(self, x: Any) -> Any:
        return abs(x)

    def to_str(self, x: Any) -> str:
        return str(Fraction(x))

    def from_str(self, s: str) -> Fraction:
        return Fraction(s.strip())

    def to_float_field(self, dps: int = 64) -> "FloatField":
        return FloatField(dps)


@dataclass(frozen=True)
class FloatField:
    """Fixed-precision real/complex floats backed by a private mpmath context."""

    dps: int = 64
    ctx: Any = field(default=None, compare=False, repr=False, hash=False)

    name = "float"
    exact = False

    def __post_init__(self) -> None:
        if self.dps < 16:
            raise BackendError("float precision must be at least 16 digits")
        ctx = mpmath.MPContext()
        ctx.dps = self.dps
        object.__setattr__(self, "ctx", ctx)

    def coerce(self, x: Any) -> Any:
        ctx = self.ctx
        if isinstance(x, Fraction):
            return ctx.mpf(x.numerator) / x.denominator
        if isinstance(x, (bool, int)):
            return ctx.mpf(int(x))
        if isinstance(x, str):
            s = x.strip()
            if "/" in s:
                f = Fraction(s)
                return ctx.mpf(f.numerator) / f.denominator
            if "j" in s:
                return ctx.mpc(complex(s)) if len(s) < 17 else ctx.mpmathify(s)
            return ctx.mpf(s)
        if isinstance(x, complex):
            return ctx.mpc(x)
        if isinstance(x, mpmath.mpc) or type(x).__name__ == "mpc":
            return ctx.mpc(x.real, x.imag)
        if isinstance(x, Jet):
            raise BackendError("jet values cannot be coerced into a plain float backend")
        return ctx.mpf(x)

    @property
    def zero(self) -> Any:
        return self.ctx.mpf(0)

    @property
    def one(self) -> Any:
        return self.ctx.mpf(1)

    @property
    def eps(self) -> Any:
        return self.ctx.mpf(10) ** (-self.dps)

    @property
    def tol(self) -> Any:
        return self.ctx.mpf(10) ** (6 - self.dps)

    def is_zero(self, x: Any) -> bool:
        return x == 0

    def negligible(self, x: Any) -> bool:
        return abs(x) <= self.tol

    def close(self, a: Any, b: Any, tol: Any = None) -> bool:
        t = self.tol if tol is None else tol
        return abs(a - b) <= t * max(1, abs(a), abs(b))

    def root(self, c: Any, r: Fraction) -> Any:
        r = Fraction(r)
        c = self.coerce(c)
        if r.denominator == 1:
            return c**r.numerator
        ctx = self.ctx
        exponent = ctx.mpf(r.numerator) / r.denominator
        if ctx.im(c) == 0 and ctx.re(c) > 0:
            return ctx.power(ctx.re(c), exponent)
        return ctx.power(c, exponent)

    def magnitude(self, x: Any) -> Any:
        return abs(x)

    def to_str(self, x: Any) -> str:
        ctx = self.ctx
        if ctx.im(x) != 0:
            return f"{ctx.nstr(ctx.re(x), self.dps)}{'+' if ctx.im(x) >= 0 else '-'}{ctx.nstr(abs(ctx.im(x)), self.dps)}j"
        return ctx.nstr(ctx.re(x), self.dps)

    def from_str(self, s: str) -> Any:
        return self.coerce(s)


class Jet:
    """A value with first-order parts along named infinitesimal directions."""

    __slots__ = ("val", "der")

    def __init__(self, val: Any, der: dict | None = None) -> None:
        self.val = val
        self.der = der if der is not None else {}

    def __repr__(self) -> str:
        return f"Jet({self.val!r}, {self.der!r})"

    def d(self, tag: str) -> Any:
        return self.der.get(tag, 0)

    def _lift(self, other: Any) -> "Jet":
        return other if isinstance(other, Jet) else Jet(other)

    def __add__(self, other: Any) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self.val + other, dict(self.der))
        der = dict(self.der)
        for k, v in other.der.items():
            der[k] = der[k] + v if k in der else v
        return Jet(self.val + other.val, der)

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return Jet(-self.val, {k: -v for k, v in self.der.items()})

    def __sub__(self, other: Any) -> "Jet":
        return self + (-other)

    def __rsub__(self, other: Any) -> "Jet":
        return (-self) + other

    def __mul__(self, other: Any) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self.val * other, {k: v * other for k, v in self.der.items()})
        a, b = self.val, other.val
        der = {k: v * b for k, v in self.der.items()}
        for k, v in other.der.items():
            der[k] = der[k] + a * v if k in der else a * v
        return Jet(a * b, der)

    __rmul__ = __mul__

    def inverse(self) -> "Jet":
        inv = 1 / self.val
        sq = inv * inv
        return Jet(inv, {k: -v * sq for k, v in self.der.items()})

    def __truediv__(self, other: Any) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self.val / other, {k: v / other for k, v in self.der.items()})
        return self * other.inverse()

    def __rtruediv__(self, other: Any) -> "Jet":
        return self.inverse() * other

    def __pow__(self, n: int) -> "Jet":
        if not isinstance(n, int):
            raise TypeError("jets only support integer powers; use JetField.root")
        if n < 0:
            return (self.inverse()) ** (-n)
        base = self.val**n
        fac = n * self.val ** (n - 1) if n else 0
        return Jet(base, {k: v * fac for k, v in self.der.items()})

    def __eq__(self, other: object) -> bool:
        o = other if isinstance(other, Jet) else Jet(other)
        if self.val != o.val:
            return False
        keys = set(self.der) | set(o.der)
        return all(self.der.get(k, 0) == o.der.get(k, 0) for k in keys)

    def __ne__(self, other: object) -> bool:
        return not self == other

    __hash__ = None  # type: ignore[assignment]

    def __abs__(self) -> Any:
        return abs(self.val)


@dataclass(frozen=True)
class JetField:
    """First-order jets over a base backend."""

    base: Any

    name = "jet"

    @property
    def exact(self) -> bool:
        return self.base.exact

    def coerce(self, x: Any) -> Jet:
        if isinstance(x, Jet):
            return Jet(self.base.coerce(x.val), {k: self.base.coerce(v) for k, v in x.der.items()})
        return Jet(self.base.coerce(x))

    @property
    def zero(self) -> Jet:
        return Jet(self.base.zero)

    @property
    def one(self) -> Jet:
        return Jet(self.base.one)

    def is_zero(self, x: Any) -> bool:
        if not isinstance(x, Jet):
            return x == 0
        return x.val == 0 and all(v == 0 for v in x.der.values())

    def negligible(self, x: Any) -> bool:
        v = x.val if isinstance(x, Jet) else x
        return self.base.negligible(v)

    def close(self, a: Any, b: Any, tol: Any = None) -> bool:
        a, b = self.coerce(a), self.coerce(b)
        if not self.base.close(a.val, b.val, tol):
            return False
        keys = set(a.der) | set(b.der)
        return all(self.base.close(a.der.get(k, 0), b.der.get(k, 0), tol) for k in keys)

    def root(self, c: Any, r: Fraction) -> Jet:
        c = self.coerce(c)
        v = self.base.root(c.val, r)
        if c.val == 0:
            raise BackendError("cannot differentiate a root at zero")
        fac = v * self.base.coerce(Fraction(r)) / c.val
        return Jet(v, {k: d * fac for k, d in c.der.items()})

    def magnitude(self, x: Any) -> Any:
        return abs(x.val) if isinstance(x, Jet) else abs(x)

    def to_str(self, x: Any) -> str:
        x = self.coerce(x)
        parts = [self.base.to_str(x.val)]
        for k in sorted(x.der):
            parts.append(f"{k}:{self.base.to_str(x.der[k])}")
        return "|".join(parts)

    def from_str(self, s: str) -> Jet:
        head, *rest = s.split("|")
        der = {}
        for item in rest:
            k, v = item.split(":", 1)
            der[k] = self.base.from_str(v)
        return Jet(self.base.from_str(head), der)


def value_of(x: Any) -> Any:
    """Strip jet parts."""
    return x.val if isinstance(x, Jet) else x


def part_of(x: Any, tag: str) -> Any:
    """First-order part of ``x`` along ``tag`` (zero for plain values)."""
    return x.der.get(tag, 0) if isinstance(x, Jet) else 0


def get_field(backend: str = "rational", precision: int = 64) -> Any:
    if backend == "rational":
        return RationalField()
    if backend == "float":
        return FloatField(precision)
    raise BackendError(f"unknown backend {backend!r}")

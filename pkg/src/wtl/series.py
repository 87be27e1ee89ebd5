"""Truncated Laurent/Puiseux series at a finite center or at infinity.

Orientation
-----------
Every series is stored in its *local parameter* ``t``:

* finite center ``phi``: ``t = z - phi``;
* center at infinity:   ``t = 1/z``.

Entry ``coeffs[i]`` is the coefficient of ``t**((low + i)/denom)``.  All
exponents ``>= order/denom`` (in ``t``) are unknown.  At infinity this means
the stored list runs from the highest power of ``z`` downwards, and the
truncation ``order`` bounds the most negative known power of ``z`` by
``-order/denom``.  The JSON form uses the same fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Any, Callable, Iterable, Sequence

from .fields import Jet, JetField


class SeriesError(ValueError):
    pass


class TruncationError(SeriesError):
    """A needed coefficient lies beyond the known truncation order."""


class CenterMismatch(SeriesError):
    pass


class BackendMismatch(SeriesError):
    pass


class ShapeError(SeriesError):
    """The series does not have the leading behaviour an operation needs."""


class Center:
    """A finite point ``loc`` or the point at infinity (``loc is None``)."""

    __slots__ = ("loc",)

    def __init__(self, loc: Any = None) -> None:
        self.loc = loc

    @property
    def is_inf(self) -> bool:
        return self.loc is None

    def __repr__(self) -> str:
        return "Center(inf)" if self.loc is None else f"Center({self.loc!r})"

    def same(self, other: "Center", field: Any) -> bool:
        if self.is_inf or other.is_inf:
            return self.is_inf and other.is_inf
        return field.close(self.loc, other.loc)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Center):
            return NotImplemented
        if self.is_inf or other.is_inf:
            return self.is_inf and other.is_inf
        return self.loc == other.loc

    __hash__ = None  # type: ignore[assignment]


INF = Center(None)


def _scalar_ring(field: Any) -> Any:
    return field.base if isinstance(field, JetField) else field


@dataclass(frozen=True, eq=False)
class LaurentSeries:
    center: Center
    denom: int
    low: int
    coeffs: tuple
    order: int
    field: Any

    def __post_init__(self) -> None:
        if self.denom < 1:
            raise SeriesError("denominator must be positive")
        if len(self.coeffs) != self.order - self.low:
            raise SeriesError(
                f"coeffs has {len(self.coeffs)} entries but order - low = {self.order - self.low}"
            )

    # -- construction -----------------------------------------------------
    @classmethod
    def from_terms(
        cls,
        center: Center,
        terms: dict,
        trunc: Any,
        field: Any,
        denom: int = 1,
    ) -> "LaurentSeries":
        """Build from ``{exponent: coefficient}`` in the natural variable.

        At infinity exponents are powers of ``z``; at a finite center they
        are powers of ``z - phi``.  ``trunc`` is the first unknown exponent
        (at infinity: powers of ``z`` at or below ``trunc`` are unknown).
        """
        sign = -1 if center.is_inf else 1
        idx = {}
        for e, c in terms.items():
            k = Fraction(e) * sign * denom
            if k.denominator != 1:
                raise SeriesError(f"exponent {e} does not fit denominator {denom}")
            idx[int(k)] = field.coerce(c)
        ordk = Fraction(trunc) * sign * denom
        if ordk.denominator != 1:
            raise SeriesError("truncation does not fit the denominator")
        order = int(ordk)
        low = min([k for k in idx if k < order], default=order)
        coeffs = tuple(idx.get(k, field.zero) for k in range(low, order))
        return cls(center, denom, low, coeffs, order, field)

    @classmethod
    def zero(cls, center: Center, field: Any, order: int, denom: int = 1) -> "LaurentSeries":
        return cls(center, denom, order, (), order, field)

    @classmethod
    def const(cls, center: Center, c: Any, field: Any, order: int) -> "LaurentSeries":
        if order <= 0:
            return cls.zero(center, field, order)
        coeffs = (field.coerce(c),) + (field.zero,) * (order - 1)
        return cls(center, 1, 0, coeffs, order, field)

    @classmethod
    def variable(cls, center: Center, field: Any, order: int) -> "LaurentSeries":
        """The coordinate ``z`` itself expanded at ``center``."""
        if center.is_inf:
            terms = {1: 1}
        else:
            terms = {0: center.loc, 1: 1}
        trunc = -order if center.is_inf else order
        return cls.from_terms(center, terms, trunc, field)

    # -- inspection -------------------------------------------------------
    def __repr__(self) -> str:
        return (
            f"LaurentSeries(center={self.center!r}, denom={self.denom}, low={self.low}, "
            f"order={self.order}, coeffs={list(self.coeffs)!r})"
        )

    def at(self, k: int) -> Any:
        """Coefficient at internal index ``k`` (zero below ``low``)."""
        if k >= self.order:
            raise TruncationError(f"index {k}/{self.denom} is beyond truncation order {self.order}/{self.denom}")
        if k < self.low:
            return self.field.zero
        return self.coeffs[k - self.low]

    def index_of(self, e: Any) -> Fraction:
        sign = -1 if self.center.is_inf else 1
        return Fraction(e) * sign * self.denom

    def coeff(self, e: Any) -> Any:
        """Coefficient of the natural exponent ``e`` (power of ``z`` at infinity)."""
        k = self.index_of(e)
        if k >= self.order:
            raise TruncationError(f"exponent {e} is beyond truncation")
        if k.denominator != 1:
            return self.field.zero
        return self.at(int(k))

    def valuation(self) -> int | None:
        for i, c in enumerate(self.coeffs):
            if not self.field.is_zero(c):
                return self.low + i
        return None

    def trim(self) -> "LaurentSeries":
        v = self.valuation()
        if v is None:
            return LaurentSeries(self.center, self.denom, self.order, (), self.order, self.field)
        if v == self.low:
            return self
        return LaurentSeries(self.center, self.denom, v, self.coeffs[v - self.low :], self.order, self.field)

    def normalize(self) -> "LaurentSeries":
        """Reduce the denominator as far as the stored exponents allow."""
        s = self.trim()
        g = s.denom
        g = gcd(g, s.low)
        g = gcd(g, s.order)
        for i, c in enumerate(s.coeffs):
            if g == 1:
                break
            if not s.field.is_zero(c):
                g = gcd(g, s.low + i)
        if g <= 1:
            return s
        coeffs = tuple(s.coeffs[i] for i in range(0, len(s.coeffs), g))
        return LaurentSeries(s.center, s.denom // g, s.low // g, coeffs, s.order // g, s.field)

    def rescale(self, d: int) -> "LaurentSeries":
        """Rewrite with denominator ``d`` (a multiple of ``self.denom``)."""
        if d == self.denom:
            return self
        if d % self.denom:
            raise SeriesError("new denominator must be a multiple of the old one")
        f = d // self.denom
        z = self.field.zero
        coeffs = []
        for c in self.coeffs:
            coeffs.append(c)
            coeffs.extend([z] * (f - 1))
        return LaurentSeries(self.center, d, self.low * f, tuple(coeffs), self.order * f, self.field)

    def truncate(self, order: int) -> "LaurentSeries":
        if order >= self.order:
            return self
        if order <= self.low:
            return LaurentSeries(self.center, self.denom, order, (), order, self.field)
        return LaurentSeries(self.center, self.denom, self.low, self.coeffs[: order - self.low], order, self.field)

    def extend_low(self, low: int) -> "LaurentSeries":
        if low >= self.low:
            return self
        return LaurentSeries(
            self.center, self.denom, low, (self.field.zero,) * (self.low - low) + self.coeffs, self.order, self.field
        )

    def map(self, fn: Callable[[Any], Any], field: Any) -> "LaurentSeries":
        return LaurentSeries(self.center, self.denom, self.low, tuple(fn(c) for c in self.coeffs), self.order, field)

    def with_center(self, center: Center) -> "LaurentSeries":
        return LaurentSeries(center, self.denom, self.low, self.coeffs, self.order, self.field)

    def keep(self, pred: Callable[[Fraction], bool]) -> "LaurentSeries":
        """Zero every term whose natural exponent fails ``pred``."""
        sign = -1 if self.center.is_inf else 1
        z = self.field.zero
        coeffs = tuple(
            c if pred(Fraction(sign * (self.low + i), self.denom)) else z for i, c in enumerate(self.coeffs)
        )
        return LaurentSeries(self.center, self.denom, self.low, coeffs, self.order, self.field)

    def terms(self) -> Iterable[tuple[Fraction, Any]]:
        """Nonzero ``(natural exponent, coefficient)`` pairs."""
        sign = -1 if self.center.is_inf else 1
        for i, c in enumerate(self.coeffs):
            if not self.field.is_zero(c):
                yield Fraction(sign * (self.low + i), self.denom), c

    # -- arithmetic -------------------------------------------------------
    def _compat(self, other: "LaurentSeries") -> None:
        if self.field != other.field:
            raise BackendMismatch(f"{self.field!r} vs {other.field!r}")
        if not self.center.same(other.center, self.field):
            raise CenterMismatch(f"{self.center!r} vs {other.center!r}")

    def __add__(self, other: Any) -> "LaurentSeries":
        if not isinstance(other, LaurentSeries):
            return self + LaurentSeries.const(self.center, other, self.field, max(self.order, 1))
        return add(self, other)

    __radd__ = __add__

    def __neg__(self) -> "LaurentSeries":
        return LaurentSeries(self.center, self.denom, self.low, tuple(-c for c in self.coeffs), self.order, self.field)

    def __sub__(self, other: Any) -> "LaurentSeries":
        return self + (-other)

    def __rsub__(self, other: Any) -> "LaurentSeries":
        return (-self) + other

    def __mul__(self, other: Any) -> "LaurentSeries":
        if isinstance(other, LaurentSeries):
            return mul(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "LaurentSeries":
        if isinstance(other, LaurentSeries):
            return mul(self, invert(other))
        return self.scale(1 / _scalar(self.field, other))

    def __pow__(self, n: int) -> "LaurentSeries":
        return pow_rational(self, Fraction(n))

    def scale(self, c: Any) -> "LaurentSeries":
        c = _scalar(self.field, c)
        return LaurentSeries(self.center, self.denom, self.low, tuple(x * c for x in self.coeffs), self.order, self.field)

    def derive(self) -> "LaurentSeries":
        return derive(self)

    def residue(self) -> Any:
        return residue(self)


def _scalar(field: Any, c: Any) -> Any:
    if isinstance(c, Jet):
        return field.coerce(c)
    if isinstance(c, (int, Fraction)):
        return _scalar_ring(field).coerce(c)
    return c


def add(f: LaurentSeries, g: LaurentSeries) -> LaurentSeries:
    f._compat(g)
    d = f.denom * g.denom // gcd(f.denom, g.denom)
    f, g = f.rescale(d), g.rescale(d)
    order = min(f.order, g.order)
    low = min(f.low, g.low, order)
    z = f.field.zero
    coeffs = []
    for k in range(low, order):
        a = f.coeffs[k - f.low] if f.low <= k else z
        b = g.coeffs[k - g.low] if g.low <= k else z
        coeffs.append(a + b)
    return LaurentSeries(f.center, d, low, tuple(coeffs), order, f.field)


def mul(f: LaurentSeries, g: LaurentSeries, limit: int | None = None) -> LaurentSeries:
    """Cauchy product; ``limit`` optionally caps the output order (same denominator units)."""
    f._compat(g)
    d = f.denom * g.denom // gcd(f.denom, g.denom)
    f, g = f.rescale(d).trim(), g.rescale(d).trim()
    low = f.low + g.low
    order = min(f.order + g.low, g.order + f.low)
    if limit is not None:
        order = min(order, limit)
    if order <= low:
        return LaurentSeries(f.center, d, order, (), order, f.field)
    fc, gc = f.coeffs, g.coeffs
    z = f.field.zero
    out = []
    for n in range(order - low):
        s = z
        lo = max(0, n - len(gc) + 1)
        hi = min(n, len(fc) - 1)
        for i in range(lo, hi + 1):
            s = s + fc[i] * gc[n - i]
        out.append(s)
    return LaurentSeries(f.center, d, low, tuple(out), order, f.field)


def coefficient_of_product(f: LaurentSeries, g: LaurentSeries, k: int) -> Any:
    """One coefficient (internal index ``k``, common denominator) of ``f*g``."""
    f._compat(g)
    d = f.denom * g.denom // gcd(f.denom, g.denom)
    f, g = f.rescale(d).trim(), g.rescale(d).trim()
    if k >= min(f.order + g.low, g.order + f.low):
        raise TruncationError("product coefficient is beyond truncation")
    s = f.field.zero
    for i, c in enumerate(f.coeffs):
        j = k - (f.low + i) - g.low
        if 0 <= j < len(g.coeffs):
            s = s + c * g.coeffs[j]
    return s


def invert(f: LaurentSeries) -> LaurentSeries:
    f = f.trim()
    if not f.coeffs:
        raise ShapeError("cannot invert: no nonzero coefficient is known")
    lead = f.coeffs[0]
    lead_val = lead.val if isinstance(lead, Jet) else lead
    if lead_val == 0:
        raise ShapeError("cannot invert: leading coefficient is not invertible")
    n = len(f.coeffs)
    inv0 = 1 / lead
    g = [inv0]
    fc = f.coeffs
    for k in range(1, n):
        s = fc[1] * g[k - 1]
        for i in range(2, k + 1):
            s = s + fc[i] * g[k - i]
        g.append(-(s * inv0))
    return LaurentSeries(f.center, f.denom, -f.low, tuple(g), -f.low + n, f.field)


def pow_rational(f: LaurentSeries, r: Any, lead_root: Any = None) -> LaurentSeries:
    """``f**r`` for rational ``r``.

    The branch of the leading coefficient's root is the backend default
    unless ``lead_root`` (the value of ``c**r``) is supplied.
    """
    r = Fraction(r)
    f = f.trim()
    field = f.field
    if not f.coeffs:
        raise ShapeError("cannot take a power: no nonzero coefficient is known")
    c = f.coeffs[0]
    cval = c.val if isinstance(c, Jet) else c
    if cval == 0:
        raise ShapeError("leading coefficient is not invertible")
    n = len(f.coeffs)
    if r.denominator == 1:
        g0 = c ** r.numerator if lead_root is None else field.coerce(lead_root)
    else:
        g0 = field.coerce(lead_root) if lead_root is not None else field.root(c, r)
    ring = _scalar_ring(field)
    fc = f.coeffs
    inv = 1 / c
    g = [g0]
    r1 = r + 1
    for k in range(1, n):
        s = field.zero
        for i in range(1, k + 1):
            w = r1 * i - k
            if w:
                s = s + fc[i] * g[k - i] * ring.coerce(w)
        g.append(s * inv / ring.coerce(k))
    a, b = r.numerator, r.denominator
    e = a * f.low
    d = f.denom * b
    z = field.zero
    coeffs = []
    for k, gk in enumerate(g):
        coeffs.append(gk)
        if k < n - 1:
            coeffs.extend([z] * (b - 1))
    order = e + b * n
    coeffs.extend([z] * (order - e - len(coeffs)))
    return LaurentSeries(f.center, d, e, tuple(coeffs), order, field).normalize()


def derive(f: LaurentSeries) -> LaurentSeries:
    """d/dz in the original variable ``z``."""
    ring = _scalar_ring(f.field)
    d = f.denom
    out = []
    if f.center.is_inf:
        # t^{k/d} = z^{-k/d}  ->  (-k/d) z^{-k/d - 1} = (-k/d) t^{(k+d)/d}
        for i, c in enumerate(f.coeffs):
            k = f.low + i
            out.append(c * ring.coerce(Fraction(-k, d)) if k else f.field.zero)
        return LaurentSeries(f.center, d, f.low + d, tuple(out), f.order + d, f.field)
    for i, c in enumerate(f.coeffs):
        k = f.low + i
        out.append(c * ring.coerce(Fraction(k, d)) if k else f.field.zero)
    return LaurentSeries(f.center, d, f.low - d, tuple(out), f.order - d, f.field)


def residue(f: LaurentSeries) -> Any:
    """Finite center: coefficient of (z-phi)^{-1}.  Infinity: minus the coefficient of z^{-1}."""
    if f.center.is_inf:
        return -f.at(f.denom)
    return f.at(-f.denom)


def residue_of_product(f: LaurentSeries, g: LaurentSeries) -> Any:
    d = f.denom * g.denom // gcd(f.denom, g.denom)
    if f.center.is_inf:
        return -coefficient_of_product(f, g, d)
    return coefficient_of_product(f, g, -d)


def _revert_coeffs(psi: Sequence[Any], field: Any) -> list:
    """Compositional inverse of psi(t) = sum_{k>=1} psi[k-1] t^k, same number of terms.

    Lagrange inversion: [s^n] psi^{-1} = (1/n) [t^{n-1}] (t/psi(t))^n.
    """
    K = len(psi)
    if K == 0:
        return []
    ring = _scalar_ring(field)
    base = LaurentSeries(INF, 1, 0, tuple(psi), K, field)
    q = invert(base)  # t/psi as a power series in t with K terms
    qc = list(q.coeffs)
    tau = []
    power = [field.one] + [field.zero] * (K - 1)
    for n in range(1, K + 1):
        nxt = []
        for k in range(K):
            s = field.zero
            for i in range(k + 1):
                s = s + power[i] * qc[k - i]
            nxt.append(s)
        power = nxt
        tau.append(power[n - 1] / ring.coerce(n))
    return tau


def revert(f: LaurentSeries) -> LaurentSeries:
    """Compositional inverse for the integer-exponent shapes used here.

    * ``f`` at infinity with a simple pole (``f = c z + c0 + ...``): returns
      ``z`` as a series at infinity in the value variable.
    * ``f`` at a finite center ``phi`` with a simple pole: returns
      ``z = phi + sum tau_n f^{-n}`` as a series at infinity in the value variable.
    * ``f`` at infinity of the form ``phi + tau_1 w^{-1} + ...``: returns
      the inverse as a series at the finite center ``phi`` with a simple pole.
    """
    f = f.normalize()
    field = f.field
    if f.denom != 1:
        raise ShapeError("revert needs integer exponents; take a root first")
    if not f.coeffs:
        raise ShapeError("cannot revert: nothing known")
    if f.low == -1:
        h = f.coeffs
        R = len(h)
        # psi(t) = t / h(t), t the local parameter, s = 1/value
        hinv = invert(LaurentSeries(INF, 1, 0, tuple(h), R, field))
        tau = _revert_coeffs(list(hinv.coeffs), field)
        if f.center.is_inf:
            t_of_s = LaurentSeries(INF, 1, 1, tuple(tau), R + 1, field)
            return invert(t_of_s)
        coeffs = (field.coerce(f.center.loc),) + tuple(tau)
        return LaurentSeries(INF, 1, 0, coeffs, R + 1, field)
    if f.center.is_inf and 0 <= f.low <= 1 and f.order >= 2:
        f = f.extend_low(0)
        if not _invertible(f.coeffs[1]):
            raise ShapeError("leading shape not invertible by revert")
        phi = f.coeffs[0]
        tau = list(f.coeffs[1:])
        sig = _revert_coeffs(tau, field)
        s_of_t = LaurentSeries(Center(phi), 1, 1, tuple(sig), len(sig) + 1, field)
        return invert(s_of_t)
    raise ShapeError("leading shape not invertible by revert")


def _invertible(c: Any) -> bool:
    v = c.val if isinstance(c, Jet) else c
    return v != 0


def compose(f: LaurentSeries, g: LaurentSeries) -> LaurentSeries:
    """``f(g(w))`` where ``g`` tends to the center of ``f`` at the center of ``g``."""
    if f.field != g.field:
        raise BackendMismatch("compose needs a common backend")
    field = f.field
    g = g.normalize()
    if f.center.is_inf:
        v = g.valuation()
        if v is None or v >= 0:
            raise ShapeError("inner series does not tend to infinity")
        h = invert(g)
    else:
        phi = field.coerce(f.center.loc)
        v = g.valuation()
        if v is None:
            raise ShapeError("inner series is unknown")
        if v < 0:
            raise ShapeError("inner series has a pole, outer center is finite")
        if g.order <= 0:
            raise TruncationError("constant term of inner series unknown")
        c0 = g.at(0)
        if not field.close(c0, phi):
            raise ShapeError("inner series does not tend to the outer center")
        h = (g - LaurentSeries.const(g.center, c0, field, g.order)).trim()
    hv = h.valuation()
    if hv is None or hv <= 0:
        raise ShapeError("inner series does not vanish to positive order")
    q = h if f.denom == 1 else pow_rational(h, Fraction(1, f.denom))
    q = q.trim()
    qv = q.low
    total = None
    if f.low < 0:
        qi = invert(q)
        p = pow_rational(qi, -f.low) if f.low < -1 else qi
    else:
        p = pow_rational(q, f.low) if f.low > 0 else LaurentSeries.const(q.center, 1, field, q.order - q.low)
    for c in f.coeffs:
        term = p.scale(c) if not field.is_zero(c) else LaurentSeries.zero(p.center, field, p.order, p.denom)
        total = term if total is None else total + term
        p = mul(p, q)
    tail = LaurentSeries.zero(q.center, field, f.order * qv, q.denom)
    total = tail if total is None else total + tail
    return total.trim()

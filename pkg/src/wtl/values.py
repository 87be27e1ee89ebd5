"""Values of tau-structure entries: a scalar plus rational multiples of symbolic logarithms."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .fields import FloatField, Jet, part_of, value_of


@dataclass(frozen=True, eq=False)
class OmegaValue:
    """``scalar + sum coef * log(arg)`` with exact ``coef`` and exact ``arg``."""

    scalar: Any
    logs: tuple = ()  # ((coef: Fraction, arg), ...)

    def __post_init__(self) -> None:
        for _, arg in self.logs:
            if value_of(arg) == 0:
                raise ValueError("logarithm of zero")

    @classmethod
    def log(cls, arg: Any, zero: Any = 0, coef: Any = 1) -> "OmegaValue":
        return cls(zero, ((Fraction(coef), arg),))

    @property
    def kind(self) -> str:
        return "log" if self.logs else "scalar"

    @property
    def log_arg(self) -> Any:
        """The argument of a pure single logarithm."""
        if len(self.logs) != 1 or self.logs[0][0] != 1:
            raise ValueError("not a single logarithm")
        return self.logs[0][1]

    def __add__(self, other: Any) -> "OmegaValue":
        if not isinstance(other, OmegaValue):
            return OmegaValue(self.scalar + other, self.logs)
        return OmegaValue(self.scalar + other.scalar, self.logs + other.logs)

    __radd__ = __add__

    def __neg__(self) -> "OmegaValue":
        return OmegaValue(-self.scalar, tuple((-c, a) for c, a in self.logs))

    def __sub__(self, other: Any) -> "OmegaValue":
        return self + (-other)

    def scale(self, c: Fraction | int) -> "OmegaValue":
        c = Fraction(c)
        return OmegaValue(self.scalar * c, tuple((k * c, a) for k, a in self.logs))

    def value(self) -> "OmegaValue":
        """Drop jet parts."""
        return OmegaValue(value_of(self.scalar), tuple((c, value_of(a)) for c, a in self.logs))

    def part(self, tag: str) -> Any:
        """First-order part along ``tag``; d log(arg) = d(arg)/arg."""
        s = part_of(self.scalar, tag)
        for c, a in self.logs:
            if isinstance(a, Jet):
                s = s + part_of(a, tag) / a.val * c
        return s

    def numeric(self, field: FloatField) -> Any:
        ctx = field.ctx
        s = field.coerce(value_of(self.scalar))
        for c, a in self.logs:
            s = s + field.coerce(c) * ctx.log(field.coerce(value_of(a)))
        return s

    def __repr__(self) -> str:
        if not self.logs:
            return f"OmegaValue({self.scalar!r})"
        return f"OmegaValue({self.scalar!r}, logs={list(self.logs)!r})"


def deviation(a: OmegaValue, b: OmegaValue, field: Any, up_to_sign: bool = False) -> Any:
    """Relative distance between two values.

    Logarithmic parts are compared through their arguments: the combined
    log part of ``a - b`` vanishes when the product of ``arg**coef`` equals
    one, which is insensitive to the choice of branch.  With ``up_to_sign``
    a product of -1 also counts as agreement, so log(x - y) and log(y - x)
    are identified (they differ by a constant multiple of i*pi).
    """
    ds = value_of(a.scalar) - value_of(b.scalar)
    scale = max(1, abs(value_of(a.scalar)))
    dev = abs(ds)
    diff = a.logs + tuple((-c, x) for c, x in b.logs)
    if diff:
        if all(Fraction(c).denominator == 1 for c, _ in diff):
            ratio = 1
            for c, x in diff:
                ratio = ratio * value_of(x) ** int(c)
            dev = dev + (abs(abs(ratio) - 1) if up_to_sign else abs(ratio - 1))
        else:
            ff = field if isinstance(field, FloatField) else FloatField(64)
            logs = [ff.coerce(c) * ff.ctx.log(ff.coerce(value_of(x))) for c, x in diff]
            total = sum(logs)
            dev = dev + abs(total.real if up_to_sign else total)
    return dev / scale


def same(a: OmegaValue, b: OmegaValue, field: Any, up_to_sign: bool = False) -> bool:
    d = deviation(a, b, field, up_to_sign)
    return d == 0 if field.exact else d <= field.tol

"""JSON and CSV forms of series, points, Hurwitz data and reports."""

from __future__ import annotations

import csv
import io
import json
from typing import Any, Iterable, Sequence

from .even import EvenHurwitzData
from .fields import value_of
from .hurwitz import HurwitzData
from .series import INF, Center, LaurentSeries
from .values import OmegaValue
from .whitham import UCoords, WhithamPoint, point_of_u


class InputError(ValueError):
    """Malformed or inconsistent input document."""


def _num(x: Any, field: Any) -> str:
    return field.to_str(value_of(x))


def _parse(s: Any, field: Any) -> Any:
    if isinstance(s, bool) or not isinstance(s, (str, int)):
        raise InputError(f"coefficients are written as strings or integers, got {s!r}")
    try:
        return field.coerce(str(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"cannot read coefficient {s!r}") from exc


def _need(obj: dict, key: str) -> Any:
    if not isinstance(obj, dict) or key not in obj:
        raise InputError(f"missing field {key!r}")
    return obj[key]


# -- series ------------------------------------------------------------------------
def series_to_json(s: LaurentSeries) -> dict:
    return {
        "center": "inf" if s.center.is_inf else _num(s.center.loc, s.field),
        "denom": s.denom,
        "low": s.low,
        "order": s.order,
        "coeffs": [_num(c, s.field) for c in s.coeffs],
    }


def series_from_json(obj: dict, field: Any) -> LaurentSeries:
    c = _need(obj, "center")
    center = INF if c == "inf" else Center(_parse(c, field))
    coeffs = tuple(_parse(x, field) for x in _need(obj, "coeffs"))
    try:
        low, order, denom = int(_need(obj, "low")), int(_need(obj, "order")), int(obj.get("denom", 1))
        return LaurentSeries(center, denom, low, coeffs, order, field)
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from exc


# -- points --------------------------------------------------------------------------
def point_to_json(pt: WhithamPoint) -> dict:
    return {
        "kind": "point",
        "phi": [_num(p, pt.field) for p in pt.phi],
        "lambda0": series_to_json(pt.lambda0),
        "lambda": [series_to_json(s) for s in pt.lam],
    }


def point_from_json(obj: dict, field: Any) -> WhithamPoint:
    phi = tuple(_parse(p, field) for p in _need(obj, "phi"))
    lam0 = series_from_json(_need(obj, "lambda0"), field)
    lams = tuple(series_from_json(s, field) for s in _need(obj, "lambda"))
    if len(lams) != len(phi):
        raise InputError("phi and lambda have different lengths")
    try:
        return WhithamPoint(phi, lam0, lams, field)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def u_to_json(u: UCoords, field: Any, order: int | None = None) -> dict:
    out = {"kind": "u", "u0": [_num(x, field) for x in u.u0], "u": [[_num(x, field) for x in s] for s in u.u]}
    if order is not None:
        out["order"] = order
    return out


def u_from_json(obj: dict, field: Any) -> UCoords:
    u0 = tuple(_parse(x, field) for x in _need(obj, "u0"))
    us = tuple(tuple(_parse(x, field) for x in s) for s in _need(obj, "u"))
    return UCoords(u0, us)


# -- Hurwitz data ------------------------------------------------------------------
def hurwitz_to_json(d: HurwitzData) -> dict:
    f = d.field
    poles = []
    for P in d.poles:
        item = {"loc": _num(P.loc, f), "coeffs": [_num(c, f) for c in P.coeffs]}
        if P.root is not None:
            item["root"] = _num(P.root, f)
        poles.append(item)
    return {"kind": "hurwitz", "n": list(d.n), "a0": [_num(c, f) for c in d.a0], "poles": poles}


def hurwitz_from_json(obj: dict, field: Any) -> HurwitzData:
    n = _need(obj, "n")
    if not isinstance(n, list) or not n or not all(isinstance(x, int) and x > 0 for x in n):
        raise InputError("n must be a non-empty list of positive integers")
    poles = _need(obj, "poles")
    if len(poles) != len(n) - 1:
        raise InputError("the profile and the pole list disagree")
    ps = []
    for k, P in enumerate(poles, start=1):
        cs = _need(P, "coeffs")
        if len(cs) != n[k]:
            raise InputError(f"pole {k} needs {n[k]} coefficients")
        root = P.get("root")
        ps.append((_parse(_need(P, "loc"), field), [_parse(c, field) for c in cs], None if root is None else _parse(root, field)))
    a0 = [_parse(c, field) for c in _need(obj, "a0")]
    try:
        return HurwitzData.build(n[0], a0, ps, field)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def even_to_json(d: EvenHurwitzData) -> dict:
    f = d.field
    pairs = []
    for P in d.pairs:
        item = {"r": _num(P.r, f), "b0": _num(P.r * P.r, f), "coeffs": [_num(c, f) for c in P.coeffs]}
        if P.root is not None:
            item["root"] = _num(P.root, f)
        pairs.append(item)
    out = {
        "kind": "even",
        "n_prime": list(d.n_prime),
        "b0": [_num(c, f) for c in d.b0],
        "b1": [_num(c, f) for c in d.b1],
        "pairs": pairs,
    }
    if d.root1 is not None:
        out["root1"] = _num(d.root1, f)
    return out


def even_from_json(obj: dict, field: Any) -> EvenHurwitzData:
    pairs = []
    for P in _need(obj, "pairs"):
        r = _parse(_need(P, "r"), field)
        if "b0" in P and not field.close(_parse(P["b0"], field), r * r):
            raise InputError("pair entry has b0 different from r^2")
        root = P.get("root")
        pairs.append((r, [_parse(c, field) for c in _need(P, "coeffs")], None if root is None else _parse(root, field)))
    root1 = obj.get("root1")
    try:
        d = EvenHurwitzData.build(
            [_parse(c, field) for c in _need(obj, "b0")],
            [_parse(c, field) for c in _need(obj, "b1")],
            pairs,
            field,
            None if root1 is None else _parse(root1, field),
        )
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if "n_prime" in obj and list(obj["n_prime"]) != list(d.n_prime):
        raise InputError("n_prime does not match the coefficient lists")
    return d


def load_document(text: str, field: Any, order: int | None = None) -> Any:
    """Parse any supported document; the ``kind`` field (or its shape) decides the type."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise InputError("expected a JSON object")
    kind = obj.get("kind")
    if kind is None:
        kind = "point" if "lambda0" in obj else "u" if "u0" in obj else "hurwitz" if "n" in obj else "even" if "b1" in obj else None
    if kind == "point":
        return point_from_json(obj, field)
    if kind == "u":
        u = u_from_json(obj, field)
        T = order or int(obj.get("order", 10))
        try:
            return point_of_u(u, T, field)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    if kind == "hurwitz":
        return hurwitz_from_json(obj, field)
    if kind == "even":
        return even_from_json(obj, field)
    raise InputError("unrecognized document")


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# -- values and tables ----------------------------------------------------------------
def omega_to_str(v: OmegaValue, field: Any) -> str:
    parts = []
    if not v.logs or value_of(v.scalar) != 0:
        parts.append(_num(v.scalar, field))
    for c, a in v.logs:
        parts.append(f"{c}*log({_num(a, field)})")
    return " + ".join(parts)


def to_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r)
    return buf.getvalue()

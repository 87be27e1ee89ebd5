from __future__ import annotations

from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from wtl.fields import FloatField, Jet, JetField, RationalField
from wtl.ratfun import GlobalRational, expand_at
from wtl.series import (
    INF,
    Center,
    LaurentSeries,
    ShapeError,
    TruncationError,
    compose,
    derive,
    invert,
    mul,
    pow_rational,
    residue,
    revert,
)

Q = RationalField()
ZERO = Center(Fraction(0))
t = sp.Symbol("t")

small = st.fractions(min_value=-6, max_value=6, max_denominator=5)
unit_series = st.lists(small, min_size=2, max_size=6).map(lambda cs: [Fraction(1)] + cs)


def at_zero(coeffs, low=0, order=None):
    order = low + len(coeffs) if order is None else order
    return LaurentSeries(ZERO, 1, low, tuple(Fraction(c) for c in coeffs), order, Q)


def sym(coeffs, low=0):
    return sum(sp.Rational(c.numerator, c.denominator) * t ** (low + i) for i, c in enumerate(coeffs))


def sym_coeffs(expr, n, low=0):
    ser = sp.series(expr, t, 0, low + n).removeO()
    return [Fraction(str(sp.expand(ser).coeff(t, low + k))) for k in range(n)]


def test_known_coefficients_only():
    s = at_zero([1, 2, 3])
    assert s.at(2) == 3 and s.at(-4) == 0
    with pytest.raises(TruncationError):
        s.at(3)


@settings(max_examples=25, deadline=None)
@given(unit_series, unit_series)
def test_mul_against_sympy(a, b):
    n = min(len(a), len(b))
    got = mul(at_zero(a), at_zero(b))
    assert got.order == n
    assert list(got.coeffs) == sym_coeffs(sp.expand(sym(a) * sym(b)), n)


@settings(max_examples=25, deadline=None)
@given(unit_series)
def test_invert_against_sympy(a):
    got = invert(at_zero(a))
    assert list(got.coeffs) == sym_coeffs(1 / sym(a), len(a))


@settings(max_examples=20, deadline=None)
@given(unit_series, st.sampled_from([Fraction(1, 2), Fraction(-1, 3), Fraction(3, 2), Fraction(2, 5)]))
def test_rational_power_against_sympy(a, r):
    got = pow_rational(at_zero(a), r, lead_root=1)
    want = sym_coeffs(sym(a) ** sp.Rational(r.numerator, r.denominator), len(a))
    assert [got.coeff(k) for k in range(len(a))] == want


def test_puiseux_power():
    # (t (1 + t))^(1/2) = t^(1/2) + t^(3/2)/2 - t^(5/2)/8 + ...
    f = at_zero([1, 1, 0, 0], low=1)
    g = pow_rational(f, Fraction(1, 2), lead_root=1)
    assert g.denom == 2
    assert [g.coeff(Fraction(k, 2)) for k in (1, 3, 5, 7)] == [1, Fraction(1, 2), Fraction(-1, 8), Fraction(1, 16)]
    assert g.coeff(1) == 0


def test_power_roots_default_branch_on_floats():
    F = FloatField(30)
    f = LaurentSeries(ZERO, 1, 0, (F.coerce(4), F.coerce(1), F.zero), 3, F)
    g = pow_rational(f, Fraction(1, 2))
    assert abs(g.at(0) - 2) < F.tol and abs(g.at(1) - F.coerce(1) / 4) < F.tol


def test_revert_catalan():
    # z + a/z = lam inverts to z = lam - sum Catalan(k) a^(k+1) lam^-(2k+1)
    a = Fraction(3, 2)
    lam = expand_at(GlobalRational((Fraction(0), Fraction(1)), ((Fraction(0), (a,)),), Q), INF, 12)
    z = revert(lam)
    assert z.coeff(1) == 1
    for k in range(5):
        assert z.coeff(-(2 * k + 1)) == -sp.catalan(k) * a ** (k + 1)
        assert z.coeff(-(2 * k + 2)) == 0


@settings(max_examples=25, deadline=None)
@given(st.lists(small, min_size=3, max_size=7))
def test_revert_round_trip_at_infinity(cs):
    # f = z + c0 + c1/z + ...; f(z(w)) = w
    f = LaurentSeries(INF, 1, -1, (Fraction(1),) + tuple(cs), len(cs), Q)
    g = revert(f)
    fg = compose(f, g)
    w = LaurentSeries.variable(INF, Q, fg.order)
    assert all(fg.at(k) == w.at(k) for k in range(-1, fg.order))


def test_revert_finite_pole():
    # lam = 2/(z-1) + 3 + (z-1): z - 1 = 2/lam + 6/lam^2 + ...
    f = at_zero([2, 3, 1, 0, 0, 0], low=-1).with_center(Center(Fraction(1)))
    z = revert(f)
    assert z.center.is_inf and z.coeff(0) == 1 and z.coeff(-1) == 2 and z.coeff(-2) == 6
    back = compose(f, z)
    assert back.coeff(1) == 1 and all(back.coeff(-k) == 0 for k in range(0, 4))


def test_revert_rejects_fractional_exponents():
    with pytest.raises(ShapeError):
        revert(pow_rational(at_zero([1, 1, 1], low=1), Fraction(1, 2), lead_root=1))


def test_compose_square_with_shift():
    sq = expand_at(GlobalRational.polynomial([0, 0, 1], Q), Center(Fraction(1)), 5)
    inner = at_zero([1, 1, 0, 0, 0])
    out = compose(sq, inner)
    assert [out.at(k) for k in range(3)] == [1, 2, 1]


def test_derive_and_residue():
    s = at_zero([5, 7, 1], low=-2)
    assert residue(s) == 7
    d = derive(s)
    assert d.at(-3) == -10 and d.at(-2) == -7 and d.at(-1) == 0
    inf = LaurentSeries(INF, 1, 0, (Fraction(0), Fraction(4)), 2, Q)
    assert residue(inf) == -4


@settings(max_examples=25, deadline=None)
@given(unit_series, unit_series)
def test_leibniz_on_x_jets(a, b):
    J = JetField(Q)
    fa = LaurentSeries(ZERO, 1, 0, tuple(Jet(c, {"x": c * 2}) for c in a), len(a), J)
    fb = LaurentSeries(ZERO, 1, 0, tuple(Jet(c, {"x": -c}) for c in b), len(b), J)
    prod = mul(fa, fb)
    da = at_zero([2 * c for c in a])
    db = at_zero([-c for c in b])
    want = mul(da, at_zero(b)) + mul(at_zero(a), db)
    n = min(len(a), len(b))
    assert [prod.at(k).d("x") for k in range(n)] == [want.at(k) for k in range(n)]

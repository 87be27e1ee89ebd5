from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from wtl.fields import BackendError, FloatField, Jet, JetField, RationalField, RootUnavailable, exact_root

Q = RationalField()
fractions = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def test_float_precision_floor():
    with pytest.raises(BackendError):
        FloatField(8)


def test_float_contexts_are_private():
    lo, hi = FloatField(20), FloatField(80)
    third_lo = lo.coerce(Fraction(1, 3))
    third_hi = hi.coerce(Fraction(1, 3))
    assert abs(third_hi * 3 - 1) < hi.coerce(10) ** -75
    # the low-precision value keeps only about 20 digits
    assert abs(hi.coerce(third_lo) - third_hi) > hi.coerce(10) ** -40


@given(fractions, st.integers(1, 5))
def test_exact_root_of_power(x, n):
    r = exact_root(x**n, Fraction(1, n))
    assert r is not None and r**n == x**n


def test_rational_root_unavailable():
    with pytest.raises(RootUnavailable):
        Q.root(Fraction(2), Fraction(1, 2))
    assert Q.root(Fraction(9, 4), Fraction(1, 2)) == Fraction(3, 2)


@given(fractions, fractions, fractions, fractions)
def test_jet_product_rule(a, da, b, db):
    x, y = Jet(a, {"x": da}), Jet(b, {"x": db})
    p = x * y
    assert p.val == a * b
    assert p.d("x") == da * b + a * db


@given(fractions.filter(lambda v: v != 0), fractions)
def test_jet_quotient_rule(a, da):
    q = 1 / Jet(a, {"x": da})
    assert q.val == 1 / a
    assert q.d("x") == -da / a**2


def test_jet_root_derivative():
    J = JetField(Q)
    r = J.root(Jet(Fraction(4), {"x": Fraction(1)}), Fraction(1, 2))
    assert r.val == 2 and r.d("x") == Fraction(1, 4)


def test_jet_string_round_trip():
    J = JetField(Q)
    x = Jet(Fraction(3, 7), {"x": Fraction(-1, 2), "h": Fraction(5)})
    assert J.close(J.from_str(J.to_str(x)), x)

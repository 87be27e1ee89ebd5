from __future__ import annotations

from fractions import Fraction

import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from wtl.fields import RationalField
from wtl.ratfun import GlobalRational, expand_at, polynomial_part, principal_part_at, residue_at, residue_sum
from wtl.series import INF, Center, mul, residue

Q = RationalField()
z = sp.Symbol("z")

small = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def rationals(draw):
    locs = draw(st.lists(st.integers(-4, 4), min_size=1, max_size=3, unique=True))
    poly = draw(st.lists(small, max_size=3))
    parts = []
    for l in locs:
        cs = draw(st.lists(small, min_size=1, max_size=3))
        parts.append((Fraction(l), tuple(cs)))
    return GlobalRational(tuple(poly), tuple(parts), Q)


def to_sympy(R: GlobalRational):
    expr = sum(sp.Rational(str(c)) * z**k for k, c in enumerate(R.poly))
    for loc, cs in R.parts:
        expr += sum(sp.Rational(str(c)) / (z - sp.Rational(str(loc))) ** (j + 1) for j, c in enumerate(cs))
    return expr


@settings(max_examples=25, deadline=None)
@given(rationals(), st.sampled_from([Fraction(1, 3), Fraction(-7, 2), Fraction(9)]))
def test_taylor_expansion_against_sympy(R, x0):
    if any(l == x0 for l in R.locations()):
        return
    s = expand_at(R, Center(x0), 5)
    w = sp.Symbol("w")
    ser = sp.series(to_sympy(R).subs(z, w + sp.Rational(str(x0))), w, 0, 5).removeO()
    assert [s.at(k) for k in range(5)] == [Fraction(str(ser.coeff(w, k))) for k in range(5)]


@settings(max_examples=15, deadline=None)
@given(rationals())
def test_principal_parts_against_sympy_residues(R):
    expr = sp.together(to_sympy(R))
    for loc in R.locations():
        cs = principal_part_at(expand_at(R, Center(loc), 1)).part_at(loc)
        sl = sp.Rational(str(loc))
        # coefficient of (z - loc)^(-j-1) is the residue of f (z - loc)^j
        for j in range(3):
            want = sp.residue(expr * (z - sl) ** j, z, sl)
            got = cs[j] if j < len(cs) else 0
            assert sp.Rational(str(got)) == want


@settings(max_examples=25, deadline=None)
@given(rationals(), rationals())
def test_residue_sum_zero(A, B):
    total = Fraction(0)
    centers = [INF] + [Center(l) for l in set(A.locations()) | set(B.locations())]
    for c in centers:
        total += residue(mul(expand_at(A, c, 8), expand_at(B, c, 8)))
    assert total == 0


@settings(max_examples=25, deadline=None)
@given(rationals())
def test_expansion_commutes_with_derivative(R):
    for c in [INF] + [Center(l) for l in R.locations()]:
        a = expand_at(R.derive(), c, 4)
        b = expand_at(R, c, 5).derive()
        lo = max(a.low, b.low)
        hi = min(a.order, b.order)
        assert all(a.at(k) == b.at(k) for k in range(lo, hi))


def test_polynomial_part_at_infinity():
    R = GlobalRational((Fraction(1), Fraction(2), Fraction(3)), ((Fraction(1), (Fraction(5),)),), Q)
    P = polynomial_part(expand_at(R, INF, 3))
    assert P.equals(GlobalRational.polynomial([1, 2, 3], Q))


def test_residue_helpers():
    R = GlobalRational((), ((Fraction(2), (Fraction(3), Fraction(1))), (Fraction(-1), (Fraction(-5),))), Q)
    assert residue_at(R, Center(Fraction(2))) == 3
    assert residue_at(R, INF) == 2
    assert residue_sum(R) == 0


def test_even_partial_fraction():
    # 1/(z^2 - b) with b = r^2 splits as (1/2r)(1/(z - r) - 1/(z + r))
    r = Fraction(3, 2)
    R = GlobalRational((), ((r, (1 / (2 * r),)), (-r, (-1 / (2 * r),))), Q)
    at_inf = expand_at(R, INF, 8)
    assert [at_inf.coeff(-k) for k in range(1, 7)] == [0, 1, 0, r**2, 0, r**4]
    assert sp.simplify(to_sympy(R) - 1 / (z**2 - sp.Rational(9, 4))) == 0

from __future__ import annotations

import random
from fractions import Fraction
from math import factorial

import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from wtl import whitham as wt
from wtl.fields import RationalField, value_of
from wtl.series import INF, Center, LaurentSeries
from wtl.values import same
from wtl.verify import agree

Q = RationalField()
z = sp.Symbol("z")


def simple_point(u=Fraction(3, 2), phi=Fraction(2), cs=(Fraction(5), Fraction(1), Fraction(-2))):
    lam0 = LaurentSeries.from_terms(INF, {1: 1, -1: u}, -14, Q)
    lam1 = LaurentSeries.from_terms(Center(phi), {-1 + k: c for k, c in enumerate(cs)}, 12, Q)
    return wt.WhithamPoint((phi,), lam0, (lam1,), Q)


@pytest.mark.parametrize("p", range(5))
def test_theta_e_against_sympy(p):
    u = sp.Rational(3, 2)
    want = sp.expand((z + u / z) ** (p + 1)).coeff(z, -1) / sp.factorial(p + 1)
    assert wt.theta(simple_point(), wt.E, p) == Fraction(str(want))


@pytest.mark.parametrize("p", range(4))
def test_theta_h0_against_sympy(p):
    phi = sp.Integer(2)
    lam = 5 / (z - phi) + 1 - 2 * (z - phi)
    want = sp.residue(lam ** (p + 1), z, phi) / sp.factorial(p + 1)
    assert wt.theta(simple_point(), wt.h0(1), p) == Fraction(str(want))


def test_theta_h1_is_pole_location():
    assert wt.theta(simple_point(), wt.h1(1), 0) == 2
    with pytest.raises(wt.UnsupportedSector):
        wt.theta(simple_point(), wt.h1(1), 1)


def test_u_coordinates_round_trip():
    u = wt.random_u(random.Random(7), 2, 6)
    pt = wt.point_of_u(u, 9, Q)
    back = wt.u_coords(pt, 6)
    assert back.u0 == u.u0
    assert all(a[: len(b)] == b for a, b in zip(back.u, u.u))


def test_point_validation():
    lam0 = LaurentSeries.from_terms(INF, {1: 2}, -4, Q)
    with pytest.raises(wt.PointError):
        wt.WhithamPoint((), lam0, (), Q)
    with pytest.raises(wt.PointError):
        wt.point_of_u(wt.UCoords((), ((Fraction(1), Fraction(0)),)), 5, Q)


def test_omega_symmetry_and_transfer():
    pt = wt.random_point(random.Random(11), 2, 12, Q)
    levels = wt.sector_levels(2, 3)
    for a, p in levels:
        for b, q in levels:
            x = wt.omega(pt, a, p, b, q)
            assert same(x, wt.omega(pt, b, q, a, p), Q)
            assert same(x, wt.omega_transfer(pt, a, p, b, q), Q)


def test_omega_of_two_poles_is_a_logarithm():
    pt = wt.random_point(random.Random(3), 2, 8, Q)
    x = wt.omega(pt, wt.h1(2), 0, wt.h1(1), 0)
    assert x.kind == "log" and x.logs == ((1, pt.phi[0] - pt.phi[1]),)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_entries_ignore_coordinates_outside_dependence(seed):
    rng = random.Random(seed)
    m = rng.randint(1, 2)
    u = wt.random_u(rng, m, 8)
    (a, p), (b, q) = rng.choice(wt.sector_levels(m, 2)), rng.choice(wt.sector_levels(m, 2))
    keep = wt.dependence_indices(a, p, b, q)
    free = [(k, j) for k in range(m + 1) for j in range(1 if k == 0 else 0, 8) if (k, j) not in keep and not (k and j == 0)]
    k, j = rng.choice(free)
    base = wt.omega(wt.point_of_u(u, 10, Q), a, p, b, q)
    moved = wt.omega(wt.point_of_u(u.replace(k, j, u.get(k, j) + Fraction(2, 3)), 10, Q), a, p, b, q)
    assert moved.scalar == base.scalar and moved.logs == base.logs


def test_dependence_is_not_vacuous():
    u = wt.random_u(random.Random(5), 1, 8)
    base = wt.omega(wt.point_of_u(u, 10, Q), wt.E, 1, wt.E, 1)
    # the entry is weighted-homogeneous; u_{0,3} enters linearly
    moved = wt.omega(wt.point_of_u(u.replace(0, 3, u.get(0, 3) + 1), 10, Q), wt.E, 1, wt.E, 1)
    assert (0, 3) in wt.dependence_indices(wt.E, 1, wt.E, 1)
    assert moved.scalar != base.scalar


def test_first_flow_is_x_translation():
    pt = wt.random_point(random.Random(2), 2, 10, Q, jets="x")
    for a, b in zip(wt.lax_rhs(pt, (0, 1)), wt.x_derivative(pt)):
        assert agree(a, b, Q)


@pytest.mark.parametrize("m", [1, 2])
def test_tau_flow_residual_vanishes(m):
    pt = wt.random_point(random.Random(40 + m), m, 10, Q, jets="x")
    for a, p in wt.sector_levels(m, 2):
        for b, q in wt.sector_levels(m, 2):
            assert value_of(wt.tau_flow_residual(pt, a, p, b, q)) == 0


def test_flow_factor():
    flow, fac = wt.flow_for(wt.h0(2), 3)
    assert flow == (2, 4) and fac == Fraction(1, factorial(4))

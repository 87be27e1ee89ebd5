from __future__ import annotations

import random
from fractions import Fraction

import pytest

from wtl import hurwitz as hz
from wtl import openwdvv as ow
from wtl import whitham as wt
from wtl.fields import FloatField, RationalField
from wtl.ratfun import GlobalRational
from wtl.series import INF, Center, LaurentSeries

Q = RationalField()


def test_theta_tilde_h_a1():
    A = hz.HurwitzData.build(2, [Fraction(6)], [], Q)
    th = ow.theta_tilde_H(A, (0, 1))
    assert th.rational.equals(GlobalRational.polynomial([0, 2], Q)) and not th.logs


def test_theta_tilde_e0():
    a1 = Fraction(5, 3)
    lam0 = LaurentSeries.from_terms(INF, {1: 1, -1: a1}, -16, Q)
    lam1 = LaurentSeries.from_terms(Center(Fraction(1)), {-1: 1}, 10, Q)
    pt = wt.WhithamPoint((Fraction(1),), lam0, (lam1,), Q)
    th = ow.theta_tilde_M(pt, wt.E, 0)
    s = th.at_infinity()
    assert s.coeff(-1) == -a1
    assert all(s.coeff(-k) == 0 for k in range(2, 13))


def test_log_family_is_symbolic():
    d = hz.random_data(random.Random(2), (2, 1), Q)
    th = ow.theta_tilde_H(d, (1, 1))
    assert th.logs == ((1, d.poles[0].loc),)


@pytest.mark.parametrize("prof", [(3,), (4,), (2, 1), (3, 2), (1, 1, 1)])
def test_open_rows_exact(prof):
    rows = ow.open_stabilization_report(hz.random_data(random.Random(len(prof)), prof, Q), 4)
    assert rows
    for r in rows:
        assert r.exact_logs and r.s_trunc_order == ow.S_TRUNC
        assert ow.open_row_passes(r, 0)
        assert (r.note == ow.LIMITATION) == (r.family == "e+s")


def test_log_mismatch_is_reported():
    d = hz.random_data(random.Random(2), (2, 1), Q)
    a = ow.theta_tilde_H(d, (1, 1))
    b = ow.OpenSeries(a.rational, None, ((Fraction(1), d.poles[0].loc + 1),))
    assert ow.open_deviation(a, b) is None


@pytest.mark.parametrize("prof", [(3,), (2, 2), (2, 1)])
def test_open_wdvv_exact(prof):
    r = ow.open_wdvv_residual(hz.random_data(random.Random(7), prof, Q), Fraction(11, 3))
    assert r["first"] == 0 and r["second"] == 0 and r["mixed"] == 0 and r["symmetry"] == 0


def test_open_wdvv_detects_corruption(monkeypatch):
    d = hz.random_data(random.Random(7), (3,), Q)
    real = ow.theta_tilde_H

    def skewed(data, idx):
        th = real(data, idx)
        return th.scale(2) if idx == (0, 1) else th

    monkeypatch.setattr(ow, "theta_tilde_H", skewed)
    r = ow.open_wdvv_residual(d, Fraction(11, 3))
    assert r["first"] != 0 or r["second"] != 0 or r["mixed"] != 0


def test_open_wdvv_float_bound():
    F = FloatField(64)
    r = ow.open_wdvv_residual(hz.random_data(random.Random(1), (3,), F), F.coerce(7) / 3)
    assert r["bound"] > 0
    assert max(r["first"], r["second"]) <= r["bound"]


def test_evaluate_with_logs():
    F = FloatField(30)
    th = ow.OpenSeries(GlobalRational.polynomial([1], F), None, ((Fraction(2), F.coerce(1)),))
    assert abs(th.evaluate(F.coerce(4)) - (1 + 2 * F.ctx.log(3))) < F.tol

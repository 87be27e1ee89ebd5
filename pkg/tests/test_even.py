from __future__ import annotations

import random
from fractions import Fraction

import pytest

from wtl import even as ev
from wtl import hurwitz as hz
from wtl import whitham as wt
from wtl.fields import RationalField
from wtl.values import same

Q = RationalField()


def test_expansion_layout():
    d = ev.random_even(random.Random(3), (2, 1, 2))
    h = ev.expand_even(d)
    assert h.n == (4, 2, 2, 2)
    r = d.pairs[0].r
    assert [P.loc for P in h.poles] == [0, r, -r]
    assert h.poles[2].root == -h.poles[1].root
    assert d.m_prime == 2 and d.n_prime == (2, 1, 2)


@pytest.mark.parametrize("prof", [(1, 1), (2, 1), (2, 2), (1, 1, 1), (2, 1, 2), (2, 1, 1, 1)])
def test_parity_and_constraints(prof):
    h = ev.expand_even(ev.random_even(random.Random(sum(prof)), prof))
    assert ev.parity_defect(h) == 0
    assert ev.constraint_defect(h) == 0
    assert ev.point_parity_defect(hz.u_point(h, 10)) == 0
    ev.check_even(h)


def test_non_symmetric_input_rejected():
    h = hz.random_data(random.Random(1), (2, 1), Q)
    with pytest.raises(ev.ParityError):
        ev.check_even(h)


def test_pair_sum_cancels_at_even_levels():
    h = ev.expand_even(ev.random_even(random.Random(3), (2, 1, 2)))
    pt = hz.u_point(h, 14)
    for p in (0, 2):
        for kind, qs in (("h0", (0, 1)), ("h1", (0,))):
            for q in qs:
                plus = wt.omega(pt, wt.E, p, wt.Sector(kind, 2), q)
                minus = wt.omega(pt, wt.E, p, wt.Sector(kind, 3), q)
                assert plus.scalar + minus.scalar == 0


def test_dual_paths_agree():
    h = ev.expand_even(ev.random_even(random.Random(5), (2, 1, 1, 1)))
    idx = ev.even_indices(h)
    for a in idx:
        for b in idx:
            x = ev.omega_even_H(h, a, b, "combine")
            y = ev.omega_even_H(h, a, b, "mirror")
            assert same(x, y, Q, up_to_sign=True)


@pytest.mark.parametrize("prof", [(2, 1), (3, 2), (2, 1, 2), (2, 2, 3)])
def test_even_rows_exact(prof):
    d = ev.random_even(random.Random(11), prof)
    rows = ev.even_stabilization_report(d, 4, 4)
    assert any(r.threshold_ok for r in rows)
    for r in rows:
        assert r.dual_deviation == 0
        if r.threshold_ok:
            assert r.deviation == 0


@pytest.mark.parametrize("prof", [(2, 1), (2, 1, 2)])
def test_even_open_rows_exact(prof):
    rows = ev.even_open_report(ev.random_even(random.Random(12), prof), 4)
    assert rows
    for r in rows:
        if r.threshold_ok:
            assert r.exact_logs and r.max_coeff_dev == 0


def test_build_checks_shapes():
    with pytest.raises(ValueError):
        ev.EvenHurwitzData.build([Fraction(1)], [], [], Q)

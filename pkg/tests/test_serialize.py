from __future__ import annotations

import json
import random
from fractions import Fraction

import pytest

from wtl import even as ev
from wtl import hurwitz as hz
from wtl import whitham as wt
from wtl.fields import FloatField, RationalField
from wtl.serialize import (
    InputError,
    dumps,
    even_to_json,
    hurwitz_to_json,
    load_document,
    omega_to_str,
    point_to_json,
    series_from_json,
    series_to_json,
    to_csv,
    u_to_json,
)
from wtl.values import OmegaValue
from wtl.verify import agree

Q = RationalField()


def test_point_round_trip():
    pt = wt.random_point(random.Random(1), 2, 7, Q)
    back = load_document(dumps(point_to_json(pt)), Q)
    assert back.phi == pt.phi
    assert all(agree(back.series(i), pt.series(i), Q) for i in range(3))


def test_u_document_rebuilds_point():
    u = wt.random_u(random.Random(2), 1, 5)
    pt = load_document(dumps(u_to_json(u, Q, 8)), Q)
    assert wt.u_coords(pt, 5).u0 == u.u0


def test_hurwitz_round_trip():
    d = hz.random_data(random.Random(3), (3, 2), Q)
    back = load_document(dumps(hurwitz_to_json(d)), Q)
    assert back.n == d.n and back.a0 == d.a0 and back.poles == d.poles


def test_even_round_trip():
    d = ev.random_even(random.Random(4), (2, 1, 2))
    back = load_document(dumps(even_to_json(d)), Q)
    assert back.n_prime == d.n_prime and back.pairs == d.pairs


def test_series_on_float_backend():
    F = FloatField(30)
    pt = wt.random_point(random.Random(5), 1, 5, F)
    s = series_from_json(series_to_json(pt.lambda0), F)
    assert agree(s, pt.lambda0, F)


@pytest.mark.parametrize(
    "text",
    [
        "{not json",
        "[1, 2]",
        '{"kind": "hurwitz", "n": [2, 1], "a0": ["1"], "poles": []}',
        '{"kind": "hurwitz", "n": [2], "a0": [1.5], "poles": []}',
        '{"kind": "mystery"}',
        '{"kind": "even", "b0": ["1"], "b1": ["4"], "pairs": [{"r": "1", "b0": "2", "coeffs": ["1"]}]}',
    ],
)
def test_malformed_documents(text):
    with pytest.raises(InputError):
        load_document(text, Q)


def test_output_is_deterministic():
    d = hz.random_data(random.Random(6), (2, 1), Q)
    assert dumps(hurwitz_to_json(d)) == dumps(hurwitz_to_json(d))
    assert json.loads(dumps(hurwitz_to_json(d)))["kind"] == "hurwitz"


def test_omega_and_csv_text():
    assert omega_to_str(OmegaValue(Fraction(3, 4)), Q) == "3/4"
    assert omega_to_str(OmegaValue(Fraction(0), ((1, Fraction(2)),)), Q) == "1*log(2)"
    assert to_csv(["a", "b"], [[1, "x,y"]]) == 'a,b\n1,"x,y"\n'

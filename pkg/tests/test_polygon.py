import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from dworklab.lattice import build_polytope
from dworklab.polygon import (
    NewtonPolygon,
    PolygonError,
    compare,
    hodge_polygon,
    hodge_polygon_by_inclusion_exclusion,
    hodge_polygon_chain,
    lower_hull,
    polygon_from_slopes,
    toric_hodge_numbers,
)

F = Fraction
SEGMENT = build_polytope([(0,), (3,)])
TRIANGLE2 = build_polytope([(0, 0), (2, 0), (0, 2)])


def test_lower_hull_examples():
    h = lower_hull([(0, 0), (1, 1), (2, 1), (3, 3)])
    assert h.vertices == ((0, 0), (2, 1), (3, 3))
    assert h.slopes() == [F(1, 2), F(1, 2), 2]
    assert lower_hull([(0, 0)]).length == 0
    assert lower_hull([(0, 0), (1, math.inf), (2, 1)]).vertices == ((0, 0), (2, 1))


def test_hodge_polygon_examples():
    assert hodge_polygon(SEGMENT).slopes() == [0, F(1, 3), F(2, 3)]
    assert hodge_polygon(build_polytope([(0,), (1,)])).slopes() == [0]
    assert hodge_polygon(TRIANGLE2).slopes() == [0, F(1, 2), F(1, 2), 1]


def test_hodge_polygon_chain():
    assert hodge_polygon_chain(SEGMENT, 5).slopes() == [0, F(1, 3), F(2, 3), 1, F(4, 3)]
    assert hodge_polygon_chain(TRIANGLE2, 6).slopes() == [0, F(1, 2), F(1, 2), 1, 1, 1]


def test_compare_examples():
    P = polygon_from_slopes([0, F(1, 2), F(1, 2)])
    Q = polygon_from_slopes([0, F(1, 3), F(2, 3)])
    same = compare(Q, Q)
    assert same.lies_above and same.endpoints_meet and same.max_vertical_gap == 0
    c = compare(P, Q)
    assert c.lies_above and c.endpoints_meet and c.max_vertical_gap == F(1, 6)
    assert not compare(Q, P).lies_above
    with pytest.raises(PolygonError):
        compare(P, polygon_from_slopes([0]))


def test_toric_hodge_numbers():
    seg = toric_hodge_numbers(build_polytope([(0,), (1,)]))
    assert seg.K[:3] == (1, 2, 3) and seg.h == (1, 0)
    sq = toric_hodge_numbers(build_polytope([(0, 0), (1, 0), (0, 1), (1, 1)]))
    assert sq.K[:4] == (1, 4, 9, 16) and sq.h == (1, 1, 0)
    assert sq.polygon.slopes() == [0, 1]


def test_json_round_trip():
    P = polygon_from_slopes([0, F(1, 3), F(2, 3)])
    assert NewtonPolygon.from_json(P.to_json()) == P


def _random_polytope(draw_pts):
    try:
        return build_polytope([(0, 0)] + draw_pts)
    except ValueError:
        return None


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), min_size=2, max_size=4))
def test_hodge_polygon_shape(points):
    poly = _random_polytope(points)
    if poly is None or not poly.contains_origin:
        return
    hp = hodge_polygon(poly)
    assert hp.slopes()[0] == 0
    assert hodge_polygon_by_inclusion_exclusion(poly) == hp
    assert lower_hull(hp.vertices) == hp


@settings(max_examples=50, deadline=None)
@given(st.lists(st.fractions(0, 3, max_denominator=6), min_size=1, max_size=6))
def test_polygon_compares_equal_to_itself(slopes):
    P = polygon_from_slopes(slopes)
    c = compare(P, P)
    assert c.lies_above and c.max_vertical_gap == 0

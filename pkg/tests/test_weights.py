import math
import random
from fractions import Fraction

from hypothesis import given, settings, strategies as st

from dworklab.lattice import build_polytope, hilbert_basis, open_facial_subdivision
from dworklab.weights import (
    b_int,
    check_weight_bounds,
    delta_order,
    glex_compare,
    prime_vertex_residue,
    representations,
    vertex_representation,
    w_delta,
    w_int,
    w_relative,
    weight_census,
)

SEGMENT = build_polytope([(0,), (3,)])
SQUARE = build_polytope([(0, 0), (3, 0), (0, 3), (3, 3)])
TRIANGLE2 = build_polytope([(0, 0), (2, 0), (0, 2)])
G123 = [(1,), (2,), (3,)]


def test_w_delta():
    assert w_delta(SEGMENT, (5,)) == Fraction(5, 3)
    assert w_delta(SEGMENT, (0,)) == 0
    assert w_delta(SEGMENT, (-1,)) == math.inf


def test_w_relative_on_square():
    assert w_relative((0, Fraction(1, 3)), (2, 1)) == Fraction(1, 3)
    assert w_delta(SQUARE, (2, 1)) == Fraction(2, 3)
    assert w_relative((0, Fraction(1, 3)), (0, 3)) == 1
    assert w_relative((0, Fraction(1, 3)), (1, 2)) == w_delta(SQUARE, (1, 2))


def test_weight_census_segment():
    ctx = weight_census(SEGMENT)
    assert (ctx.D, ctx.V) == (3, 3)
    assert ctx.W[:4] == (1, 1, 1, 1)
    assert ctx.H == (1, 1, 1, 0)


def test_weight_census_triangle():
    ctx = weight_census(TRIANGLE2)
    assert (ctx.D, ctx.V) == (2, 4)
    assert ctx.W[:5] == (1, 2, 3, 4, 5)
    assert ctx.H == (1, 2, 1, 0, 0)


def test_w_int():
    assert w_int([(2,), (3,)], SEGMENT, (7,)).value == 3
    assert w_int([(2,), (3,)], SEGMENT, (1,)).value == math.inf
    assert w_int(G123, SEGMENT, (6,)).value == 2 == w_delta(SEGMENT, (6,))


def test_b_int():
    assert b_int(G123, SEGMENT, 7, (1,), (1,)) == Fraction(1, 3)
    assert b_int(G123, SEGMENT, 7, (1,), (2,)) == Fraction(7, 18)
    assert b_int(G123, SEGMENT, 7, (1,), (0,)) == Fraction(4, 9)


def test_representations():
    assert len(representations((6,), G123, 6)) == 7
    assert representations((1,), [(2,), (3,)], 5) == []
    assert representations((6,), G123, 2) == [{(3,): 2}]


def test_vertex_representation():
    r7 = vertex_representation([(3,)], G123, (7,))
    assert r7.floor_coeffs == (2,) and r7.residue == (1,) and r7.residue_rep == {(1,): 1}
    r6 = vertex_representation([(3,)], G123, (6,))
    assert r6.residue == (0,) and r6.residue_rep == {}
    poly = build_polytope([(0, 0), (3, 0), (2, 4)])
    gens = hilbert_basis(poly).generators
    r = vertex_representation([(3, 0), (2, 4)], gens, (3, 3), poly)
    assert r.floor_coeffs == (0, 0) and r.residue == (3, 3)
    assert r.reconstruct() == (3, 3)


def test_prime_vertex_residue():
    assert prime_vertex_residue((3,), 7) == (1,)
    assert prime_vertex_residue((3, 2), 7) == (1, 1)
    assert prime_vertex_residue((2, 3, 5), 31) == (1, 1, 1)


def test_glex_compare():
    assert glex_compare((0, 2), (1, 0)) == 1
    assert glex_compare((1, 0), (0, 1)) == 1
    assert glex_compare((1, 1), (1, 1)) == 0


def test_delta_order_on_square():
    sub = open_facial_subdivision(SQUARE)
    assert delta_order(sub, (1, 2), (1, 1)) == "ge"
    assert delta_order(sub, (1, 2), (2, 4)) == "eq"
    assert delta_order(sub, (1, 1), (1, 2)) == "lt"


def test_weight_bounds_segment():
    rng = random.Random(0)
    rep = check_weight_bounds(G123, SEGMENT, [(rng.randint(0, 40),) for _ in range(500)])
    assert rep.ok and rep.N == 3 and rep.checked == 500


def test_weight_bounds_triangle():
    tri = build_polytope([(0, 0), (3, 0), (0, 3)])
    rng = random.Random(1)
    sample = [(rng.randint(0, 15), rng.randint(0, 15)) for _ in range(500)]
    assert check_weight_bounds(tri.lattice_points(), tri, sample).ok


def test_generator_weight_at_most_one_plus_n():
    rep = check_weight_bounds(G123, SEGMENT, G123)
    assert rep.ok
    assert all(w_int(G123, SEGMENT, g).value == 1 for g in G123)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 60))
def test_integral_weight_sandwich(v):
    iw = w_int(G123, SEGMENT, (v,)).value
    w = w_delta(SEGMENT, (v,))
    assert w <= iw <= w + 3


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4))
def test_census_hodge_total_is_volume(a, b):
    poly = build_polytope([(0, 0), (a, 0), (0, b)])
    ctx = weight_census(poly)
    assert sum(ctx.H) == ctx.V == a * b
    assert ctx.W[0] == 1

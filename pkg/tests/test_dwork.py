import dataclasses
import itertools
import math
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from dworklab import dwork
from dworklab.dwork import (
    FRACTION_OPS,
    PrecisionError,
    artin_hasse,
    artin_hasse_root,
    block_decomposition_check,
    dwork_np,
    dwork_report,
    facet_pieces,
    fredholm_det,
    fredholm_series,
    fredholm_symbolic,
    gamma_ring,
    graded_extract,
    hasse_global,
    hasse_local,
    hasse_star,
    lowest_glex_det_monomial,
    mu_operation,
    nuclear_matrix,
    rigid_check,
    skew_block_identity,
    vertex_residue_matrix,
)
from dworklab.expsum import Family, LaurentPoly, family_rng, is_regular, np_of_f
from dworklab.ffield import is_prime, make_field, rational_mod
from dworklab.lattice import build_polytope, open_facial_subdivision
from dworklab.weights import delta_order

F = Fraction
lp = LaurentPoly.from_rational
CUBIC = build_polytope([(0,), (3,)])
G123 = [(1,), (2,), (3,)]


def regular_samples(poly, p, count, seed=0):
    rng, fam, field, out = family_rng(seed, p, 1), Family(poly), make_field(p), []
    while len(out) < count:
        f = fam.sample(field, rng)
        if is_regular(f).regular:
            out.append(f)
    return out


# Artin-Hasse coefficients and gamma

def test_artin_hasse_small_index_is_exponential():
    for p in (5, 7):
        e = artin_hasse(p, p - 1)
        assert all(e[m] == F(1, math.factorial(m)) for m in range(p))


def test_artin_hasse_p2():
    e = artin_hasse(2, 3)
    assert (e[0], e[2], e[3]) == (1, 1, F(2, 3))


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([2, 3, 5, 7]), st.integers(0, 40))
def test_artin_hasse_is_p_integral(p, M):
    assert all(c.denominator % p for c in artin_hasse(p, M).coeffs)


def test_gamma_root_has_order_one_over_p_minus_1():
    for p in (3, 5, 7):
        t = artin_hasse_root(p, 6)
        assert t % p == 0 and (t // p) % p == p - 1  # t = -p * unit, unit = 1 mod p
        ring = gamma_ring(p, 6)
        assert ring.ord(ring.pi_power(1)) == F(1, p - 1)


# symbolic pieces

def test_fredholm_symbolic_lowest_term():
    Fv = fredholm_symbolic((6,), G123, 7, 6)
    assert Fv.lowest_gamma() == 2
    assert Fv.graded(2) == {(0, 0, 2): F(1, 2)}
    assert fredholm_symbolic((0,), G123, 7, 6).terms == {(0, (0, 0, 0)): 1}
    assert fredholm_symbolic((1,), [(2,), (3,)], 7, 6).is_zero()


def test_graded_extract():
    Fv = fredholm_symbolic((6,), G123, 7, 6)
    assert graded_extract(Fv, CUBIC, 7, (1,), (1,), 0) == {(0, 0, 2): F(1, 2)}
    assert graded_extract(Fv, CUBIC, 7, (1,), (1,), 1) == {(0, 3, 0): F(1, 6), (1, 1, 1): F(1)}
    empty = fredholm_symbolic((1,), [(2,), (3,)], 7, 6)
    assert all(not graded_extract(empty, CUBIC, 7, (1,), (6,), i) for i in range(3))


# nuclear matrix and Fredholm determinant

def test_nuclear_entry_for_pure_cube():
    M = nuclear_matrix(lp({(3,): 1}, 7), k=3)
    i = M.index.index((1,))
    j = M.index.index((2,))
    assert M.valuation(i, i) == F(1, 3)
    # (1/2) gamma^2 with gamma^6 = t: coefficient of gamma^2 is 1/2 mod 7^N
    assert M.entries[i][i][2] == rational_mod(F(1, 2), M.ring.mod)
    assert M.valuation(i, j) == math.inf


def test_principal_minor_invariant_under_normalization():
    M = nuclear_matrix(lp({(3,): 1, (1,): 1}, 7), k=3)
    fine, normed = M.normalized_entries()
    top = max(M.weights)
    for rows in ([1, 2], [0, 1, 2], [2, 3]):
        minor = dwork.determinant(dwork._ring_ops(fine), [[normed[i][j] for j in rows] for i in rows])
        shift = len(rows) * top / (M.p - 1)
        assert fine.ord(minor) - shift == M.principal_valuation(rows)


def test_fredholm_det_trivial_cases():
    M = nuclear_matrix(lp({(3,): 1, (1,): 1}, 7), k=3)
    assert [c.ord for c in fredholm_det(M, N=0)] == [0]
    assert fredholm_series(FRACTION_OPS, [[F(5, 2)]], 1) == [1, F(-5, 2)]
    with pytest.raises(ValueError):
        fredholm_det(M, N=M.size + 1)


def test_skew_block_identity_fixed_pair():
    M0 = [[F(1), F(2)], [F(-1), F(3, 2)]]
    M1 = [[F(0), F(1)], [F(4), F(-2)]]
    assert skew_block_identity([M0, M1])


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.data())
def test_skew_block_identity_random(a, m, data):
    entry = st.fractions(-5, 5, max_denominator=4)
    mats = [[[data.draw(entry) for _ in range(m)] for _ in range(m)] for _ in range(a)]
    assert skew_block_identity(mats)


def test_mu_operation():
    # (1 - T) / (1 - 7T) = 1 + 6T + 42T^2 + 294T^3 + ...
    assert mu_operation([1, -1], 7, 4) == [1, 6, 42, 294]


# rigidity and the Dwork route

def test_rigid_check_generic_cubic():
    M = nuclear_matrix(lp({(3,): 1, (1,): 1}, 7), k=3)
    assert rigid_check(M, 0).passes
    rep = rigid_check(M, 1)
    assert rep.passes and rep.margin == F(1, 6)
    with pytest.raises(ValueError):
        rigid_check(M, 4)


def test_rigid_check_fails_on_p_multiplied_row():
    M = nuclear_matrix(lp({(3,): 1, (1,): 1}, 7), k=3)
    rows = [list(r) for r in M.entries]
    rows[1] = [M.ring.scale(x, 7) for x in rows[1]]
    assert not rigid_check(dataclasses.replace(M, entries=rows), 1).passes


def test_dwork_np_linear_over_f3():
    assert dwork_np(lp({(1,): 1}, 3)).slopes() == [0]


@pytest.mark.parametrize("p", [5, 7, 11, 13])
def test_dwork_np_matches_oracle_on_x3_plus_2x(p):
    f = lp({(3,): 1, (1,): 2}, p)
    assert dwork_np(f) == np_of_f(f)


def test_dwork_np_matches_oracle_on_random_cubics():
    for f in regular_samples(CUBIC, 5, 3, seed=4):
        rep = dwork_report(f)
        assert rep.polygon == np_of_f(f)
        assert rep.certified > rep.polygon.endpoint


def test_dwork_detects_irregular_degree_drop():
    with pytest.raises(PrecisionError, match="not regular"):
        dwork_report(lp({(3,): 1}, 3))


# block decomposition

def test_block_check_segment_is_tautological():
    M = nuclear_matrix(lp({(3,): 1}, 7), k=3)
    rep = block_decomposition_check(M, 3)
    assert rep.applicable
    assert rep.total == sum(b[2] for b in rep.blocks)


def test_block_check_square_generic_ordinary_prime():
    coeffs = {(3, 0): 1, (0, 3): 1, (3, 3): 1, (1, 0): 1, (0, 1): 2, (1, 1): 3,
              (2, 1): 1, (1, 2): 2, (2, 2): 1}
    M = nuclear_matrix(lp(coeffs, 7), k=1, precision=12, cut=8)
    rep = block_decomposition_check(M, 1)
    assert rep.applicable and rep.reason == "blocks rigid"
    assert len(rep.blocks) == 4
    assert rep.total == sum(b[2] for b in rep.blocks) == 1


def test_block_check_reports_unmet_conditions():
    # vertex terms only: the interior Hasse pieces vanish at p = 5
    M = nuclear_matrix(lp({(3, 0): 1, (0, 3): 1, (3, 3): 1}, 5), k=1, precision=12, cut=8)
    rep = block_decomposition_check(M, 1)
    assert not rep.applicable


def test_entry_level_estimate():
    N_delta = 3
    for p in (7, 13):
        M = nuclear_matrix(lp({(3,): 1, (2,): 1, (1,): 1}, p), k=3)
        sub = open_facial_subdivision(CUBIC)
        for i, r in enumerate(M.index):
            for j, s in enumerate(M.index):
                v = M.normalized_valuation(i, j)
                if v == math.inf or M.valuation(i, j) >= M.certified:
                    continue
                order = delta_order(sub, r, s)
                if order in ("ge", "eq"):
                    assert M.weights[i] <= v <= M.weights[i] + F(N_delta, p - 1)
                else:
                    assert v > M.weights[i]


# Hasse polynomials

def _partitions(v, parts, bound):
    """Exponent vectors u over parts with sum u_j * part_j == v."""
    out = []
    for u in itertools.product(*[range(v // q + 1) for q in parts]):
        if sum(a * q for a, q in zip(u, parts)) == v and sum(u) <= bound:
            out.append(u)
    return out


def test_hasse_local_matches_sympy_determinant():
    p = 7
    A = sympy.symbols("A1:4")
    g = sympy.Symbol("g")
    e = artin_hasse(p, 20)
    idx = [(0,), (1,)]  # the level-1 block of [0, 3]

    def entry(r, s):
        v = p * r[0] - s[0]
        if v < 0:
            return 0
        total = 0
        for u in _partitions(v, (1, 2, 3), 20):
            term = g ** sum(u)
            for a, var in zip(u, A):
                term *= sympy.Rational(e[a].numerator, e[a].denominator) * var ** a
            total += term
        return total

    det = sympy.expand(sympy.Matrix([[entry(r, s) for s in idx] for r in idx]).det())
    lowest = sympy.Poly(det, g).all_coeffs()[::-1]
    first = next(c for c in lowest if c != 0)
    loc = hasse_local(CUBIC, G123, p, k=1)
    expr = sum(sympy.Rational(c.numerator, c.denominator) * A[0] ** ex[0] * A[1] ** ex[1] * A[2] ** ex[2]
               for ex, c in loc.P.terms.items())
    assert sympy.expand(first - expr) == 0
    assert loc.P.terms == {(0, 0, 2): F(1, 2)}


def test_hasse_local_g_factor():
    loc = hasse_local(CUBIC, G123, 7)
    g11 = [c for c in loc.components if c.kind == "G" and c.label == ((1,), (1,))]
    assert len(g11) == 1 and g11[0].poly == {(0, 0, 2): F(1, 2)} and g11[0].order == 0


def _primes(lo, hi):
    return [p for p in range(lo, hi + 1) if is_prime(p)]


def test_hasse_global_cubic():
    H = hasse_global(CUBIC, [(1,), (2,)], [(3,)], {(3,): 1}, _primes(5, 47))
    assert not H.P.is_zero()
    assert H.P.terms == {(0, 2): 1, (1, 0): -3}
    assert set(H.primes) == {((1,),), ((2,),)}


@pytest.mark.parametrize("pair", [(7, 13), (5, 11)])
def test_hasse_global_pieces_p_independent(pair):
    H = hasse_global(CUBIC, [(1,), (2,)], [(3,)], {(3,): 1}, _primes(5, 47))
    gens = ((1,), (2,), (3,))
    residue = ((pair[0] % 3,),)
    assert pair[1] % 3 == pair[0] % 3
    lifted = H.classes[residue]
    for p in pair:
        comps = dwork._local_pieces(CUBIC, gens, p, 8,
                                    lambda q: dwork._specialize_mod(q, gens, {(3,): 1}, p, [(1,), (2,)]))
        reduced = {dwork._component_key(c): dwork._monic(c.poly, p) for c in comps}
        assert set(reduced) == set(lifted)
        for key, q in lifted.items():
            assert {e: rational_mod(c, p) for e, c in q.items()} == reduced[key]


def test_hasse_global_constant_g_piece():
    H = hasse_global(CUBIC, [(1,), (2,)], [(3,)], {(3,): 1}, _primes(5, 47))
    # for p = 1 mod 3 the (1, 1) entry starts with e_2 A_3^2 = 1/2, a constant after specialization
    g11 = [q for key, q in H.classes[((1,),)].items() if key[0] == "G" and key[2] == ((1,), (1,))]
    assert g11 == [{(0, 0): 1}]


def test_hasse_global_rejects_overlap():
    with pytest.raises(dwork.HasseError):
        hasse_global(CUBIC, [(1,), (3,)], [(3,)], {(3,): 1}, _primes(5, 47))


def test_hasse_star_cubic():
    S = hasse_star(CUBIC, G123, _primes(11, 59))
    assert S.P.terms == {(1, 0, 1): 1, (0, 2, 0): F(-1, 3)}


def test_reduce_vertex_exponents():
    # u = 3 at p = 7, D = 3: uD = 9 = 7*1 + 2, reduced exponent (1 + 2)/3 = 1
    out = dwork._reduce_vertex_exponents({(0, 0, 3): F(1)}, G123, [2], 7, 3, 7)
    assert out == {(0, 0, 1): 1}
    # p-free exponents are left alone
    assert dwork._reduce_vertex_exponents({(1, 0, 1): F(1)}, G123, [2], 7, 3, 7) == {(1, 0, 1): 1}


def test_lowest_glex_det_monomial():
    perm, mono = lowest_glex_det_monomial([[(1, 0), (0, 1)], [(0, 1), (2, 0)]])
    assert perm == (1, 0) and mono == (0, 2)
    assert lowest_glex_det_monomial([[(3, 1)]]) == ((0,), (3, 1))
    with pytest.raises(dwork.HasseError):
        lowest_glex_det_monomial([[(1, 0), (1, 0)], [(0, 1), (2, 0)]])


def test_vertex_residue_matrix_minimal_monomial():
    piece = facet_pieces(CUBIC)[0]
    rows, S = vertex_residue_matrix(CUBIC, piece, G123, 7, 1)
    assert S == ((1,), (2,))
    perm, mono = lowest_glex_det_monomial(rows, degree_bound=3 * len(rows))
    assert sum(mono) < 3 * len(rows)

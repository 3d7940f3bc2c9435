import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from dworklab.ffield import (
    CyclotomicInteger,
    FieldError,
    make_field,
    norm_poly,
    norm_to_Q,
    ord_pi,
    teichmuller,
)


def one(p):
    return CyclotomicInteger.integer(p, 1)


def test_make_field():
    F9 = make_field(3, 2, [1, 0, 1])  # x^2 + 1, little-endian
    assert F9.q == 9
    assert make_field(7).q == 7
    with pytest.raises(FieldError):
        make_field(3, 2, [1, 0, 1, 0])
    with pytest.raises(FieldError):
        make_field(3, 2, [2, 0, 1])  # x^2 - 1 is reducible
    with pytest.raises(FieldError):
        make_field(4)


def test_trace_examples():
    F9 = make_field(3, 2, [1, 0, 1])
    x = F9.code([0, 1])
    assert F9.mul(x, x) == F9.neg(1)
    assert F9.trace(x) == 0
    assert F9.trace(1) == 2
    assert {F9.trace(u) for u in F9.elements()} == {0, 1, 2}


def test_trace_is_additive():
    F = make_field(5, 2)
    for u in range(0, F.q, 3):
        for v in range(0, F.q, 4):
            assert F.trace(F.add(u, v)) == (F.trace(u) + F.trace(v)) % 5


def test_cyclotomic_arithmetic():
    z = CyclotomicInteger.zeta(3)
    assert z * z == -one(3) - z
    assert (one(3) - z) * (one(3) - z * z) == CyclotomicInteger.integer(3, 3)
    for p in (3, 5, 7):
        assert CyclotomicInteger.zeta(p) * CyclotomicInteger.zeta(p, p - 1) == one(p)


def test_mixed_primes_rejected():
    with pytest.raises(ValueError):
        CyclotomicInteger.zeta(3) + CyclotomicInteger.zeta(5)


def test_ord_pi():
    for p in (3, 5, 7):
        assert ord_pi(one(p) - CyclotomicInteger.zeta(p)) == Fraction(1, p - 1)
        assert ord_pi(CyclotomicInteger.integer(p, p)) == 1
    assert ord_pi(CyclotomicInteger.integer(5, 0)) == math.inf
    assert ord_pi(CyclotomicInteger.integer(5, 5), a=2) == Fraction(1, 2)


def test_norm():
    for p in (3, 5, 7):
        assert norm_to_Q(one(p) - CyclotomicInteger.zeta(p)) == p
        assert norm_to_Q(CyclotomicInteger.integer(p, 2)) == 2 ** (p - 1)
    assert norm_poly([one(3), -CyclotomicInteger.zeta(3)]) == [1, 1, 1]


def test_norm_of_rational_polynomial_is_power():
    # (1 + 2T)^(p-1)
    assert norm_poly([one(5), CyclotomicInteger.integer(5, 2)]) == [1, 8, 24, 32, 16]


def test_teichmuller():
    assert teichmuller(2, 5, 2) == 7
    assert teichmuller(1, 5, 4) == 1
    assert teichmuller(0, 5, 4) == 0


cyclo5 = st.lists(st.integers(-6, 6), min_size=4, max_size=4).map(
    lambda c: CyclotomicInteger(5, tuple(c)))


@settings(max_examples=80, deadline=None)
@given(cyclo5, cyclo5)
def test_ord_pi_is_a_valuation(x, y):
    assert ord_pi(x * y) == ord_pi(x) + ord_pi(y)
    assert ord_pi(x + y) >= min(ord_pi(x), ord_pi(y))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([3, 5, 7, 11]), st.integers(1, 10), st.integers(1, 6))
def test_teichmuller_is_root_of_unity(p, a, N):
    a %= p
    if a == 0:
        return
    t = teichmuller(a, p, N)
    assert t % p == a
    assert pow(t, p - 1, p ** N) == 1


def _subfield_trace(big, y, d):
    """Absolute trace of y in F_{p^d}, computed inside the big field."""
    total = 0
    for _ in range(d):
        total = big.add(total, y)
        y = big.frobenius(y)
    return total


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([(2, 4, 2), (3, 2, 1), (5, 2, 1), (2, 6, 3)]), st.data())
def test_trace_transitivity(pad, data):
    p, m, d = pad
    big = make_field(p, m)
    u = data.draw(st.integers(0, big.q - 1))
    assert big.trace(u) == _subfield_trace(big, big.partial_trace(u, d), d)

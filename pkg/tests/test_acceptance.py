"""The ten acceptance criteria, each at its stated tolerance and time limit.

Every criterion records one PASS/FAIL line; tests/conftest.py prints them in
the terminal summary, and running this file directly prints them too.
"""

import random
import sys
import time
from fractions import Fraction

from dworklab import dwork
from dworklab.expsum import Family, LaurentPoly, family_rng, gnp_estimate, is_regular, np_of_f
from dworklab.ffield import is_prime, make_field, rational_mod
from dworklab.lab import cmd_sweep, parse_spec, suite_disc
from dworklab.lattice import (
    PolytopeError,
    build_polytope,
    generation_check,
    hilbert_basis,
    monoid_members,
    normalized_volume,
)
from dworklab.polygon import compare, hodge_polygon, polygon_from_slopes
from dworklab.weights import check_weight_bounds, weight_census

F = Fraction
CUBIC = build_polytope([(0,), (3,)])
TRIANGLE2 = build_polytope([(0, 0), (2, 0), (0, 2)])
RESULTS: dict[int, str] = {}


def record(n: int, title: str, ok: bool, elapsed: float, limit: float, detail: str = "") -> None:
    ok = ok and elapsed < limit
    line = f"criterion {n:2d} [{title}]: {'PASS' if ok else 'FAIL'} ({elapsed:.1f}s < {limit:g}s)"
    if detail:
        line += f" {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def primes_between(lo: int, hi: int) -> list[int]:
    return [p for p in range(lo, hi + 1) if is_prime(p)]


def regular_samples(poly, p: int, count: int, seed: int) -> list[LaurentPoly]:
    rng, fam, field, out = family_rng(seed, p, 1), Family(poly), make_field(p), []
    while len(out) < count:
        f = fam.sample(field, rng)
        if is_regular(f).regular:
            out.append(f)
    return out


def test_criterion_01_hodge_polygon():
    t = time.perf_counter()
    ok = hodge_polygon(CUBIC) == polygon_from_slopes([0, F(1, 3), F(2, 3)])
    ok &= hodge_polygon(TRIANGLE2) == polygon_from_slopes([0, F(1, 2), F(1, 2), 1])
    rng = random.Random(1)
    checked = 0
    while checked < 50:
        n = rng.randint(1, 3)
        pts = [tuple(rng.randint(-4, 4) for _ in range(n)) for _ in range(rng.randint(n, n + 2))]
        try:
            poly = build_polytope([(0,) * n] + pts)
        except PolytopeError:
            continue
        ctx = weight_census(poly)
        ok &= sum(ctx.H) == normalized_volume(poly) and hodge_polygon(ctx).length == ctx.V
        checked += 1
    record(1, "Hodge polygon", ok, time.perf_counter() - t, 10, f"{checked} random polytopes")


def test_criterion_02_lower_bound():
    t = time.perf_counter()
    ok, total = True, 0
    for poly in (CUBIC, TRIANGLE2):
        hp = hodge_polygon(poly)
        for p in (5, 7, 11, 13):
            res = gnp_estimate(Family(poly), p, 1, 200, seed=0)
            for P in res.polygons:
                c = compare(P, hp)
                ok &= c.lies_above and c.endpoints_meet and P.endpoint == hp.endpoint
            total += res.samples
    record(2, "NP >= HP", ok and total == 1600, time.perf_counter() - t, 120, f"{total} samples")


def test_criterion_03_wan_ordinarity():
    t = time.perf_counter()
    ok = True
    hp = hodge_polygon(CUBIC)
    for p in (7, 13):
        res = gnp_estimate(Family(CUBIC), p, 1, 200, seed=0)
        ok &= res.samples == 200 and res.polygon == hp and res.attained >= 1
    record(3, "ordinary at p = 1 mod 3", ok, time.perf_counter() - t, 120)


def test_criterion_04_convergence():
    t = time.perf_counter()
    spec = parse_spec('{"dim": 1, "vertices": [[0], [3]], "f": [[[3], "1"], [[1], "1"]],'
                      ' "pmin": 5, "pmax": 50, "trials": 0}')
    rec = cmd_sweep(spec)
    gaps = {r["p"]: F(r["max_gap"]) for r in rec.rows}
    ok = sorted(gaps) == primes_between(5, 50)
    ok &= all(g == 0 for p, g in gaps.items() if p % 3 == 1)
    C = max(g * (p - 1) for p, g in gaps.items())
    ctx = weight_census(CUBIC)
    ok &= C == F(rec.fitted_C) and C <= ctx.N * ctx.V
    ok &= all(g <= C / (p - 1) for p, g in gaps.items())
    ps = sorted(gaps)
    ok &= max(gaps[p] for p in ps[-3:]) <= max(gaps[p] for p in ps[:3])
    record(4, "gap bounded by C/(p-1)", ok, time.perf_counter() - t, 300, f"fitted C = {C}")


def test_criterion_05_oracle_equivalence():
    t = time.perf_counter()
    lp = LaurentPoly.from_rational
    cases = [lp({(1,): 1}, 3)]
    for p in (5, 7):
        cases.append(lp({(3,): 1}, p))
        cases.extend(regular_samples(CUBIC, p, 20, seed=0))
    cases.extend(regular_samples(TRIANGLE2, 5, 5, seed=0))
    ok, compared, ordinary = True, 0, 0
    for f in cases:
        rep = dwork.dwork_report(f)
        oracle = np_of_f(f)
        hp = hodge_polygon(f.polytope)
        if oracle == hp:
            ordinary += 1
            ok &= rep.verified  # every ordinary case must pass the rigid check
        if rep.verified:
            compared += 1
            ok &= rep.polygon == oracle
    record(5, "Dwork route = exponential sums", ok, time.perf_counter() - t, 600,
           f"{compared}/{len(cases)} compared, {ordinary} ordinary")


def test_criterion_06_discriminant():
    t = time.perf_counter()
    failures = suite_disc(seed=0, count=100)
    record(6, "discriminant triple agreement", not failures, time.perf_counter() - t, 30)


def test_criterion_07_hilbert_bases():
    t = time.perf_counter()
    cone = build_polytope([(0, 0), (3, 0), (2, 4)])
    res = hilbert_basis(cone, weight_bound=3)
    ok = sorted(res.generators) == [(1, 0), (1, 1), (1, 2)]
    pts = [v for v in cone.cone_points(3) if any(v)]
    ok &= monoid_members(res.generators, cone, pts) == set(pts)
    for g in res.generators:
        rest = [h for h in res.generators if h != g]
        ok &= g not in monoid_members(rest, cone, [g])
    non_smooth = build_polytope([(0, 0, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1)])
    wan = build_polytope([(0, 0, 0, 0), (1, 1, 1, 0), (1, 1, 0, 1), (1, 0, 1, 1), (0, 1, 1, 1)])
    for poly in (non_smooth, wan):
        chk = generation_check(poly.lattice_points(), poly, 3)
        ok &= not chk["asymptotically_generates"]
        ok &= chk["fails_at"][0] == (1,) * poly.dim
        # failures persist beyond the weight bound, so no finite set of small points suffices
        ok &= max(poly.weight(v) for v in chk["fails_at"]) > 3
    record(7, "Hilbert bases", ok, time.perf_counter() - t, 60)


def _cone_sample(poly, count: int, scale: int, rng: random.Random):
    pts = poly.lattice_points(scale)
    return [pts[rng.randrange(len(pts))] for _ in range(count)]


def test_criterion_08_weight_bounds():
    t = time.perf_counter()
    rng = random.Random(0)
    configs = [
        (CUBIC, [(1,), (2,), (3,)], False),
        (build_polytope([(0, 0), (3, 0), (0, 3)]), None, False),
        (build_polytope([(0, 0), (3, 0), (0, 3), (3, 3)]), None, False),
        (TRIANGLE2, None, True),
        (build_polytope([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]), None, True),
    ]
    ok = True
    for poly, gens, smooth in configs:
        gens = gens or [v for v in poly.lattice_points() if any(v)]
        rep = check_weight_bounds(gens, poly, _cone_sample(poly, 500, 6, rng), smooth_simplex=smooth)
        ok &= rep.ok and rep.checked == 500
        if smooth:
            ok &= rep.N == 4 * poly.dim ** 2 - poly.dim - 2
    record(8, "weight bounds", ok, time.perf_counter() - t, 120)


def test_criterion_09_hasse_machinery():
    t = time.perf_counter()
    J, V, cV = [(1,), (2,)], [(3,)], {(3,): 1}
    H = dwork.hasse_global(CUBIC, J, V, cV, primes_between(5, 47))
    ok = not H.P.is_zero() and not H.G.is_zero()
    gens = ((1,), (2,), (3,))
    for pair in ((7, 13), (5, 11)):
        lifted = H.classes[((pair[0] % 3,),)]
        for p in pair:
            comps = dwork._local_pieces(CUBIC, gens, p, 8,
                                        lambda q, p=p: dwork._specialize_mod(q, gens, cV, p, J))
            reduced = {dwork._component_key(c): dwork._monic(c.poly, p) for c in comps}
            ok &= set(reduced) == set(lifted)
            ok &= all({e: rational_mod(c, p) for e, c in q.items()} == reduced[key]
                      for key, q in lifted.items())
    ps = primes_between(5, 31)
    fam = Family(CUBIC, "AJV", tuple(J), (((3,), F(1)),))
    gnp = {p: gnp_estimate(fam, p, 1, 100, seed=0).polygon for p in ps}
    rng = random.Random(0)
    found = mismatches = 0
    while found < 20:
        a = {j: F(rng.randint(-9, 9), rng.randint(1, 5)) for j in J}
        if any(x == 0 or any(x.denominator % p == 0 for p in ps) for x in a.values()):
            continue
        if any((H.P.evaluate(a, p) * H.G.evaluate(a, p)) % p == 0 for p in ps):
            continue
        found += 1
        for p in ps:
            f = LaurentPoly.from_rational({**a, (3,): 1}, p)
            mismatches += np_of_f(f) != gnp[p]
    ok &= mismatches == 0
    record(9, "Hasse machinery", ok, time.perf_counter() - t, 600,
           f"P = {H.P}, {found} f x {len(ps)} primes, {mismatches} mismatches")


def test_criterion_10_toric_unimodular():
    t = time.perf_counter()
    square = build_polytope([(0, 0), (1, 0), (0, 1), (1, 1)])
    ok = True
    for p in (5, 7):
        res = gnp_estimate(Family(square, "toric"), p, 1, 100, seed=0)
        ok &= res.samples >= 100 and res.polygon == res.hodge and res.attained >= 1
    record(10, "toric GNP = HP", ok, time.perf_counter() - t, 600)


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)

"""Weight functions on lattice cones and the bound checks built on them.

``w_delta`` is the polytope weight, ``w_int`` the least number of summands
from a finite set G needed to write a cone point, and ``weight_census``
tabulates how many cone points sit at each weight level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .lattice import (
    INF,
    OpenFacialSubdivision,
    Point,
    Polytope,
    PolytopeError,
    normalized_volume,
    primitive_generating_set,
    solve,
)


def w_delta(poly: Polytope, v: Sequence[int]) -> Fraction | float:
    """Least c >= 0 with v in c*Delta; ``INF`` outside the cone."""
    return poly.weight(v)


def w_relative(normal: Sequence[Fraction], v: Sequence[int]) -> Fraction:
    """<d, v> for an origin-less facet normal d (need not be the maximum)."""
    return sum((Fraction(a) * x for a, x in zip(normal, v)), Fraction(0))


# ---------------------------------------------------------------------------
# census of weight levels


@dataclass(frozen=True)
class WeightContext:
    poly: Polytope
    D: int
    N: int
    V: int
    k_index: int
    k_exact: bool
    W: tuple[int, ...]
    H: tuple[int, ...]

    @property
    def n(self) -> int:
        return self.poly.dim

    @property
    def k_delta(self) -> Fraction:
        """k_Delta as a weight, i.e. k_index / D."""
        return Fraction(self.k_index, self.D)

    def cumulative(self, k: int) -> int:
        """N_k = |S(Delta)_{<= k}| in index units."""
        return sum(self.W[: k + 1])

    def to_csv_rows(self) -> list[tuple[int, int, int]]:
        return [(i, self.W[i], self.H[i] if i < len(self.H) else 0) for i in range(len(self.W))]


def weight_census(poly: Polytope, k_max: int | None = None) -> WeightContext:
    """Count cone points per weight level i/D for i <= k_max (default nD).

    H(k) = sum_i (-1)^i C(n, i) W(k - iD); the total of H equals V_Delta and
    is asserted.
    """
    if not poly.contains_origin:
        raise PolytopeError("origin", "polytope must contain the origin")
    n, D = poly.dim, poly.denominator
    if k_max is None:
        k_max = n * D
    if k_max < n * D:
        raise ValueError("k_max must be at least n*D")
    pts = poly.cone_points(Fraction(k_max, D))
    W = [0] * (k_max + 1)
    idx = poly.weight_index(np.array(pts, dtype=np.int64).reshape(-1, n))
    for i in idx:
        W[int(i)] += 1
    H = []
    for k in range(n * D + 1):
        H.append(sum((-1) ** i * math.comb(n, i) * W[k - i * D]
                     for i in range(n + 1) if k - i * D >= 0))
    V = normalized_volume(poly)
    if sum(H) != V:
        raise AssertionError(f"sum of H is {sum(H)} but V is {V}")
    if any(h < 0 for h in H):
        raise AssertionError(f"negative Hodge number in {H}")
    total, k_index = 0, None
    for i, w in enumerate(W):
        total += w
        if total >= V:
            k_index = i
            break
    exact = sum(W[: k_index + 1]) == V
    return WeightContext(poly, D, n * D, V, k_index, exact, tuple(W), tuple(H))


# ---------------------------------------------------------------------------
# integral weight


@dataclass(frozen=True)
class IntegralWeight:
    value: int | float
    representation: dict[Point, int]
    cutoff: int
    proved: bool  # True when value is exact, or infinity is certain

    @property
    def finite(self) -> bool:
        return self.value != INF


class IntegralWeightSolver:
    """Layered reachability from the origin using steps in G.

    Every partial sum of a length-L representation has weight <= L, so a
    breadth-first search inside the region {w <= L_max} finds all
    representations of length <= L_max. Among minimal ones, the
    reconstructed representation uses as few non-boundary generators as
    possible.
    """

    def __init__(self, gens: Iterable[Sequence[int]], poly: Polytope, max_length: int):
        self.poly = poly
        self.gens = sorted({tuple(g) for g in gens if any(g)},
                           key=lambda g: (poly.weight(g), g))
        for g in self.gens:
            if poly.weight(g) > 1:
                raise PolytopeError("generator", f"{g} is not in Delta")
        self.max_length = max_length
        self.interior = {g: poly.weight(g) < 1 for g in self.gens}
        self.region = set(poly.cone_points(max_length))
        self.dist: dict[Point, int] = {(0,) * poly.dim: 0}
        self.cost: dict[Point, tuple[int, Point | None]] = {(0,) * poly.dim: (0, None)}
        frontier = [(0,) * poly.dim]
        for length in range(1, max_length + 1):
            nxt = set()
            for u in frontier:
                for g in self.gens:
                    v = tuple(a + b for a, b in zip(u, g))
                    if v in self.region and v not in self.dist:
                        nxt.add(v)
            for v in sorted(nxt):
                self.dist[v] = length
            for v in sorted(nxt):
                best = None
                for g in self.gens:
                    u = tuple(a - b for a, b in zip(v, g))
                    if self.dist.get(u) == length - 1:
                        c = self.cost[u][0] + self.interior[g]
                        if best is None or c < best[0]:
                            best = (c, g)
                self.cost[v] = best
            frontier = sorted(nxt)
            if not frontier:
                break

    def solve(self, v: Sequence[int]) -> IntegralWeight:
        v = tuple(v)
        w = self.poly.weight(v)
        if w == INF:
            return IntegralWeight(INF, {}, self.max_length, True)
        if v in self.dist:
            rep: dict[Point, int] = {}
            u = v
            while any(u):
                g = self.cost[u][1]
                rep[g] = rep.get(g, 0) + 1
                u = tuple(a - b for a, b in zip(u, g))
            return IntegralWeight(self.dist[v], rep, self.max_length, True)
        if w > self.max_length:
            raise ValueError(f"{v} has weight {w} beyond the search region")
        return IntegralWeight(INF, {}, self.max_length, False)


def w_int(gens: Iterable[Sequence[int]], poly: Polytope, v: Sequence[int],
          margin: int = 2, N: int | None = None) -> IntegralWeight:
    """Integral weight of a single point (builds a one-off solver).

    The search stops at ceil(w(v)) + N + margin summands, N defaulting to
    nD(Delta). ``proved`` is False when nothing was found below the cutoff.
    """
    w = poly.weight(v)
    if w == INF:
        return IntegralWeight(INF, {}, 0, True)
    if N is None:
        N = poly.dim * poly.denominator
    cutoff = math.ceil(w) + N + margin
    return IntegralWeightSolver(gens, poly, cutoff).solve(v)


def b_int(gens, poly: Polytope, p: int, r: Sequence[int], s: Sequence[int],
          solver: IntegralWeightSolver | None = None) -> Fraction | float:
    """(w_int(pr - s) + w(s) - w(r)) / (p - 1)."""
    v = tuple(p * a - b for a, b in zip(r, s))
    if poly.weight(v) == INF:
        raise PolytopeError("outside", f"pr - s = {v} is not in the cone")
    iw = solver.solve(v) if solver else w_int(gens, poly, v)
    if iw.value == INF:
        return INF
    return (iw.value + poly.weight(s) - poly.weight(r)) / Fraction(p - 1)


def representations(v: Sequence[int], gens: Sequence[Sequence[int]],
                    length_bound: int) -> list[dict[Point, int]]:
    """All u with sum u_j * j = v and sum u_j <= length_bound (gens nonzero)."""
    gens = [tuple(g) for g in gens]
    v = tuple(v)
    out: list[dict[Point, int]] = []
    n = len(v)

    def rec(i: int, rest: tuple[int, ...], left: int, cur: list[int]) -> None:
        if not any(rest):
            out.append({gens[k]: c for k, c in enumerate(cur) if c})
            return
        if i == len(gens) or left == 0 or not _reachable(rest, gens[i:], left, n):
            return
        g = gens[i]
        for c in range(left + 1):
            rec(i + 1, rest, left - c, cur + [c])
            rest = tuple(a - b for a, b in zip(rest, g))

    rec(0, v, length_bound, [])
    return out


def _reachable(rest, gens, left, n) -> bool:
    """Cheap necessary condition: each coordinate moves at most left*max|g|."""
    for k in range(n):
        lo = min([0] + [g[k] for g in gens]) * left
        hi = max([0] + [g[k] for g in gens]) * left
        if not lo <= rest[k] <= hi:
            return False
    return True


# ---------------------------------------------------------------------------
# vertex representations and orders


@dataclass(frozen=True)
class VertexRepresentation:
    vertices: tuple[Point, ...]
    floor_coeffs: tuple[int, ...]
    residue: Point
    residue_rep: dict[Point, int] | None
    variables: tuple[Point, ...]

    def reconstruct(self) -> Point:
        n = len(self.residue)
        return tuple(self.residue[k] + sum(c * v[k] for c, v in zip(self.floor_coeffs, self.vertices))
                     for k in range(n))

    def exponent_vector(self) -> tuple[int, ...] | None:
        if self.residue_rep is None:
            return None
        return tuple(self.residue_rep.get(s, 0) for s in self.variables)


def glex_key(alpha: Sequence[int]) -> tuple:
    return (sum(alpha), tuple(alpha))


def glex_compare(alpha: Sequence[int], beta: Sequence[int]) -> int:
    """-1, 0 or 1: total degree first, then the leftmost differing entry."""
    if len(alpha) != len(beta):
        raise ValueError("exponent vectors differ in length")
    ka, kb = glex_key(alpha), glex_key(beta)
    return (ka > kb) - (ka < kb)


def vertex_representation(piece_vertices: Sequence[Sequence[int]], gens: Iterable[Sequence[int]],
                          v: Sequence[int], poly: Polytope | None = None) -> VertexRepresentation:
    """Split v over the cone of a simplex facet piece into vertex floors and residue.

    ``piece_vertices`` are the n nonzero vertices d_i g'_i of the piece.
    The residue lies in the semi-open zonotope of those vertices and gets the
    glex-minimal representation over S = (G in the piece cone) minus the
    vertices, with S ordered by (weight, coordinates).
    """
    verts = tuple(sorted(tuple(x) for x in piece_vertices if any(x)))
    n = len(verts[0])
    if len(verts) != n:
        raise PolytopeError("simplex", "need n nonzero vertices")
    cols = [[w[k] for w in verts] for k in range(n)]
    coords = solve(cols, list(v))
    if any(c < 0 for c in coords):
        raise PolytopeError("outside", f"{tuple(v)} is not in the piece cone")
    floors = tuple(math.floor(c) for c in coords)
    residue = tuple(v[k] - sum(f * w[k] for f, w in zip(floors, verts)) for k in range(n))
    in_cone = [g for g in (tuple(x) for x in gens) if any(g)
               and all(c >= 0 for c in solve(cols, list(g)))]
    S = [g for g in in_cone if g not in verts]
    if poly is not None:
        S.sort(key=lambda g: (poly.weight(g), g))
    else:
        S.sort(key=lambda g: (sum(solve(cols, list(g))), g))
    S = tuple(S)
    if not any(residue):
        rep: dict | None = {}
    else:
        bound = sum(abs(x) for x in residue) + 1
        reps = [r for r in representations(residue, S, bound)] if S else []
        if reps:
            rep = min(reps, key=lambda r: glex_key(tuple(r.get(s, 0) for s in S)))
        else:
            rep = None
    return VertexRepresentation(verts, floors, residue, rep, S)


def prime_vertex_residue(scalings: Sequence[int], p: int) -> tuple[int, ...]:
    """(p mod d_i) for each vertex scaling d_i."""
    if any(math.gcd(p, d) != 1 for d in scalings):
        raise ValueError(f"{p} is not coprime to all scalings {tuple(scalings)}")
    return tuple(p % d for d in scalings)


def piece_scalings(piece_vertices: Sequence[Sequence[int]]) -> tuple[int, ...]:
    return primitive_generating_set(piece_vertices).scalings


def delta_order(sub: OpenFacialSubdivision, r: Sequence[int], s: Sequence[int],
                tie_break: bool = True) -> str:
    """'ge', 'lt', 'eq' or 'incomparable' by the index of the open sub-cones.

    Sub-cones are ordered by dimension; equal dimensions fall back on the
    face enumeration order when ``tie_break`` is set.
    """
    cr, cs = sub.classify(r), sub.classify(s)
    if cr == cs:
        return "eq"
    dr, ds = sub.face_dim(cr), sub.face_dim(cs)
    if dr != ds:
        return "ge" if dr > ds else "lt"
    if not tie_break:
        return "incomparable"
    return "ge" if cr > cs else "lt"


# ---------------------------------------------------------------------------
# bound checks


@dataclass
class BoundReport:
    checked: int = 0
    N: int = 0
    exponent_bound: int = 0
    max_excess: Fraction = Fraction(0)
    max_interior_exponent: int = 0
    violations: list[dict] = field(default_factory=list)
    unresolved: list[Point] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_weight_bounds(gens: Iterable[Sequence[int]], poly: Polytope,
                        sample: Iterable[Sequence[int]], smooth_simplex: bool = False,
                        exceptions_below: Fraction = Fraction(0)) -> BoundReport:
    """Check w <= w_int <= w + N and the interior exponent bound nD^2.

    N is nD(Delta), or 4n^2 - n - 2 when ``smooth_simplex`` is set. Points of
    weight below ``exceptions_below`` are skipped (finitely many exceptions
    are allowed when G only generates asymptotically).
    """
    gens = [tuple(g) for g in gens]
    n, D = poly.dim, poly.denominator
    N = 4 * n * n - n - 2 if smooth_simplex else n * D
    pts = [tuple(v) for v in sample]
    top = max((poly.weight(v) for v in pts), default=Fraction(0))
    solver = IntegralWeightSolver(gens, poly, math.ceil(top) + N + 1)
    rep = BoundReport(N=N, exponent_bound=n * D * D)
    for v in pts:
        w = poly.weight(v)
        if w < exceptions_below:
            continue
        iw = solver.solve(v)
        rep.checked += 1
        if iw.value == INF:
            rep.violations.append({"point": v, "w": w, "w_int": "inf", "reason": "upper"})
            continue
        if not w <= iw.value <= w + N:
            rep.violations.append({"point": v, "w": w, "w_int": iw.value,
                                   "reason": "lower" if iw.value < w else "upper"})
        rep.max_excess = max(rep.max_excess, iw.value - w)
        for g, u in iw.representation.items():
            if solver.interior[g]:
                rep.max_interior_exponent = max(rep.max_interior_exponent, u)
                if u > rep.exponent_bound:
                    rep.violations.append({"point": v, "generator": g, "exponent": u,
                                           "reason": "exponent"})
    return rep


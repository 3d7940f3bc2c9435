"""Integral polytopes, lattice cones, Hilbert bases and triangulations.

Everything here is exact: coordinates are Python ints, normals are
``Fraction``s, and facets are found by exhaustive hyperplane search, which is
fine for the small dimensions (n <= 4) this library targets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable, Sequence

import numpy as np

Point = tuple[int, ...]

INF = math.inf


class PolytopeError(ValueError):
    """Invalid polytope input. ``code`` is a short machine-readable tag."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


# ---------------------------------------------------------------------------
# small exact linear algebra helpers


def det(rows: Sequence[Sequence[int]]) -> int:
    """Integer determinant by Bareiss fraction-free elimination."""
    m = [list(r) for r in rows]
    n = len(m)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def rank(rows: Sequence[Sequence]) -> int:
    m = [[Fraction(x) for x in r] for r in rows]
    if not m:
        return 0
    r, ncols = 0, len(m[0])
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c] / m[r][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    return r


def solve(matrix: Sequence[Sequence], rhs: Sequence) -> list[Fraction]:
    """Solve a square nonsingular system exactly (Gauss-Jordan over Q)."""
    n = len(matrix)
    m = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(matrix, rhs)]
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular system")
        m[c], m[piv] = m[piv], m[c]
        inv = 1 / m[c][c]
        m[c] = [x * inv for x in m[c]]
        for i in range(n):
            if i != c and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return [m[i][n] for i in range(n)]


def hyperplane_normal(points: Sequence[Point]) -> tuple[int, ...]:
    """Integer normal of the affine hull of n points in Z^n (zero if degenerate)."""
    n = len(points[0])
    if n == 1:
        return (1,)
    diffs = [[a - b for a, b in zip(p, points[0])] for p in points[1:]]
    normal = []
    for k in range(n):
        minor = [row[:k] + row[k + 1:] for row in diffs]
        normal.append((-1) ** k * det(minor))
    g = reduce(math.gcd, normal)
    if g == 0:
        return tuple(normal)
    return tuple(x // g for x in normal)


def integer_kernel(rows: Sequence[Sequence[int]], ncols: int) -> list[Point]:
    """Basis of the saturated lattice {x in Z^n : A x = 0} by column reduction."""
    a = [list(r) for r in rows]
    u = [[int(i == j) for j in range(ncols)] for i in range(ncols)]  # columns are transforms
    col = 0
    for r in range(len(a)):
        # clear row r beyond column `col` with extended-gcd column operations
        while True:
            nz = [j for j in range(col, ncols) if a[r][j] != 0]
            if len(nz) <= 1:
                break
            j0 = min(nz, key=lambda j: abs(a[r][j]))
            for j in nz:
                if j == j0:
                    continue
                q = a[r][j] // a[r][j0]
                for row in a:
                    row[j] -= q * row[j0]
                for row in u:
                    row[j] -= q * row[j0]
        nz = [j for j in range(col, ncols) if a[r][j] != 0]
        if nz:
            j = nz[0]
            for row in a:
                row[col], row[j] = row[j], row[col]
            for row in u:
                row[col], row[j] = row[j], row[col]
            col += 1
    return [tuple(u[i][j] for i in range(ncols)) for j in range(col, ncols)]


def lattice_basis_of_span(vectors: Sequence[Point], n: int) -> list[Point]:
    """Z-basis of (R-span of vectors) intersected with Z^n."""
    if not vectors or rank(vectors) == 0:
        return []
    complement = integer_kernel(vectors, n)
    if not complement:
        return [tuple(int(i == j) for j in range(n)) for i in range(n)]
    return integer_kernel(complement, n)


# ---------------------------------------------------------------------------
# polytopes


@dataclass(frozen=True)
class Facet:
    """Supporting inequality ``normal . x <= offset`` with its vertex set.

    For origin-less facets the inequality is scaled so that ``offset == 1``
    and ``normal`` is the facet normal d with <d, v> = 1 on the facet.
    """

    normal: tuple[Fraction, ...]
    offset: Fraction
    vertex_ids: frozenset[int]
    int_normal: tuple[int, ...]
    int_offset: int

    @property
    def through_origin(self) -> bool:
        return self.offset == 0


@dataclass(frozen=True)
class Polytope:
    dim: int
    vertices: tuple[Point, ...]
    facets: tuple[Facet, ...]
    contains_origin: bool

    def __repr__(self) -> str:
        return f"Polytope(dim={self.dim}, vertices={list(self.vertices)})"

    @cached_property
    def originless_facets(self) -> tuple[Facet, ...]:
        return tuple(f for f in self.facets if f.offset > 0)

    @cached_property
    def cone_facets(self) -> tuple[Facet, ...]:
        return tuple(f for f in self.facets if f.offset == 0)

    @cached_property
    def denominator(self) -> int:
        """D: least positive integer with all weights in (1/D)Z."""
        dens = [x.denominator for f in self.originless_facets for x in f.normal]
        return reduce(lambda a, b: a * b // math.gcd(a, b), dens, 1)

    @cached_property
    def _scaled(self) -> tuple[np.ndarray, np.ndarray]:
        D = self.denominator
        lin = np.array([[int(x * D) for x in f.normal] for f in self.originless_facets],
                       dtype=np.int64).reshape(-1, self.dim)
        cone = np.array([f.int_normal for f in self.cone_facets],
                        dtype=np.int64).reshape(-1, self.dim)
        return lin, cone

    def in_cone(self, v: Sequence[int]) -> bool:
        return all(sum(a * x for a, x in zip(f.int_normal, v)) <= 0 for f in self.cone_facets)

    def weight(self, v: Sequence[int]) -> Fraction | float:
        """Least c >= 0 with v in c*Delta, or ``INF`` outside the cone."""
        if not self.in_cone(v):
            return INF
        if not any(v):
            return Fraction(0)
        return max(sum((a * x for a, x in zip(f.normal, v)), Fraction(0))
                   for f in self.originless_facets)

    def weight_index(self, points: np.ndarray) -> np.ndarray:
        """Vectorised D*weight for an (m, n) integer array; -1 outside the cone."""
        lin, cone = self._scaled
        pts = np.asarray(points, dtype=np.int64).reshape(-1, self.dim)
        w = (pts @ lin.T).max(axis=1) if len(lin) else np.zeros(len(pts), dtype=np.int64)
        w = np.maximum(w, 0)
        if len(cone):
            w[(pts @ cone.T > 0).any(axis=1)] = -1
        return w

    def contains(self, v: Sequence[int], scale: int = 1) -> bool:
        return all(sum(a * x for a, x in zip(f.int_normal, v)) <= scale * f.int_offset
                   for f in self.facets)

    def lattice_points(self, scale: int = 1) -> list[Point]:
        """Lattice points of scale*Delta, lexicographically sorted."""
        lo = [scale * min(v[i] for v in self.vertices) for i in range(self.dim)]
        hi = [scale * max(v[i] for v in self.vertices) for i in range(self.dim)]
        grids = np.meshgrid(*[np.arange(a, b + 1) for a, b in zip(lo, hi)], indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)
        A = np.array([f.int_normal for f in self.facets], dtype=np.int64)
        b = np.array([f.int_offset for f in self.facets], dtype=np.int64) * scale
        keep = (pts @ A.T <= b).all(axis=1)
        return sorted(tuple(int(x) for x in p) for p in pts[keep])

    def cone_points(self, max_weight) -> list[Point]:
        """Points of S(Delta) with weight <= max_weight (rational)."""
        k = math.floor(max_weight) + 1 if max_weight != int(max_weight) else int(max_weight)
        pts = np.array(self.lattice_points(max(k, 0)), dtype=np.int64).reshape(-1, self.dim)
        w = self.weight_index(pts)
        limit = Fraction(max_weight) * self.denominator
        keep = (w >= 0) & (w <= limit)
        return [tuple(int(x) for x in p) for p in pts[keep]]

    def facet_points(self, facet: Facet) -> tuple[Point, ...]:
        return tuple(self.vertices[i] for i in sorted(facet.vertex_ids))

    @cached_property
    def faces(self) -> tuple[frozenset[int], ...]:
        """All nonempty faces as vertex-id sets, sorted by (dimension, ids)."""
        found = {frozenset(range(len(self.vertices)))}
        frontier = [f.vertex_ids for f in self.facets]
        while frontier:
            nxt = []
            for s in frontier:
                if s and s not in found:
                    found.add(s)
                    nxt.extend(s & f.vertex_ids for f in self.facets)
            frontier = nxt
        return tuple(sorted(found, key=lambda s: (self.face_dim(s), sorted(s))))

    def face_dim(self, ids: Iterable[int]) -> int:
        pts = [self.vertices[i] for i in ids]
        if len(pts) <= 1:
            return len(pts) - 1
        return rank([[a - b for a, b in zip(p, pts[0])] for p in pts[1:]])

    def face_contains(self, ids: frozenset[int], v: Sequence) -> bool:
        """Is the point v (rational allowed) in the face given by vertex ids."""
        if not self.contains_point(v):
            return False
        for f in self.facets:
            if ids <= f.vertex_ids and sum(a * x for a, x in zip(f.normal, v)) != f.offset:
                return False
        return True

    def contains_point(self, v: Sequence) -> bool:
        return all(sum(a * x for a, x in zip(f.normal, v)) <= f.offset for f in self.facets)

    @cached_property
    def originless_faces(self) -> tuple[frozenset[int], ...]:
        origin = (0,) * self.dim
        return tuple(s for s in self.faces
                     if len(s) < len(self.vertices) and not self.face_contains(s, origin))


def build_polytope(vertices: Iterable[Sequence[int]]) -> Polytope:
    """Convex hull of integer points, with exact facets and extreme vertices."""
    pts = sorted({tuple(int(x) for x in v) for v in vertices})
    if not pts:
        raise PolytopeError("empty", "no vertices given")
    n = len(pts[0])
    if n == 0 or any(len(p) != n for p in pts):
        raise PolytopeError("dimension", "points have inconsistent dimension")
    if rank([[a - b for a, b in zip(p, pts[0])] for p in pts[1:]]) < n:
        raise PolytopeError("degenerate", f"affine dimension below {n}")

    hyperplanes: dict[tuple, tuple[tuple[int, ...], int]] = {}
    for combo in itertools.combinations(pts, n):
        a = hyperplane_normal(combo)
        if not any(a):
            continue
        b = sum(x * y for x, y in zip(a, combo[0]))
        vals = [sum(x * y for x, y in zip(a, p)) - b for p in pts]
        if all(v <= 0 for v in vals):
            pass
        elif all(v >= 0 for v in vals):
            a, b = tuple(-x for x in a), -b
        else:
            continue
        hyperplanes[(a, b)] = (a, b)

    # a point is extreme iff the facets through it have normals of full rank
    on = {key: {i for i, p in enumerate(pts) if sum(x * y for x, y in zip(key[0], p)) == key[1]}
          for key in hyperplanes}
    extreme = [i for i, p in enumerate(pts)
               if rank([key[0] for key, ids in on.items() if i in ids]) == n]
    index = {old: new for new, old in enumerate(extreme)}
    verts = tuple(pts[i] for i in extreme)

    facets = []
    for (a, b), ids in sorted(on.items()):
        vids = frozenset(index[i] for i in ids if i in index)
        if b == 0:
            normal, offset = tuple(Fraction(x) for x in a), Fraction(0)
        else:
            normal = tuple(Fraction(x, abs(b)) for x in a)
            offset = Fraction(b, abs(b))
        facets.append(Facet(normal, offset, vids, a, b))
    contains_origin = all(f.int_offset >= 0 for f in facets)
    return Polytope(n, verts, tuple(facets), contains_origin)


def newton_polytope(support: Iterable[Sequence[int]]) -> Polytope:
    """Hull of a support together with the origin."""
    pts = [tuple(p) for p in support]
    if not pts:
        raise PolytopeError("empty", "empty support")
    return build_polytope(pts + [(0,) * len(pts[0])])


def _require_origin(poly: Polytope) -> None:
    if not poly.contains_origin:
        raise PolytopeError("origin", "polytope must contain the origin")


def facial_subdivision(poly: Polytope) -> list[tuple[Facet, Polytope]]:
    """Closed facial subdivision: one piece hull(delta, 0) per origin-less facet."""
    _require_origin(poly)
    origin = (0,) * poly.dim
    return [(f, build_polytope(list(poly.facet_points(f)) + [origin]))
            for f in poly.originless_facets]


@dataclass(frozen=True)
class OpenFacialSubdivision:
    """Partition of S(Delta) into the origin class and open cones over faces."""

    poly: Polytope
    faces: tuple[frozenset[int], ...]

    def classify(self, v: Sequence[int]) -> int:
        """0 for the origin, else 1 + index of the open face the ray through v meets."""
        if not any(v):
            return 0
        w = self.poly.weight(v)
        if w == INF:
            raise PolytopeError("outside", f"{tuple(v)} is not in the cone")
        y = [Fraction(x) / w for x in v]
        tight = frozenset(range(len(self.poly.vertices)))
        for f in self.poly.facets:
            if sum(a * x for a, x in zip(f.normal, y)) == f.offset:
                tight &= f.vertex_ids
        return 1 + self.faces.index(tight)

    def face_dim(self, cls: int) -> int:
        """Dimension of the open sub-cone (0 for the origin class)."""
        if cls == 0:
            return 0
        return self.poly.face_dim(self.faces[cls - 1]) + 1

    def partition(self, points: Iterable[Point]) -> dict[int, list[Point]]:
        out: dict[int, list[Point]] = {}
        for v in points:
            out.setdefault(self.classify(v), []).append(tuple(v))
        return out


def open_facial_subdivision(poly: Polytope) -> OpenFacialSubdivision:
    _require_origin(poly)
    return OpenFacialSubdivision(poly, poly.originless_faces)


def cofacial(poly: Polytope, v: Sequence[int], w: Sequence[int]) -> bool:
    """Do the rays through v and w meet a common closed origin-less facet."""
    wv, ww = poly.weight(v), poly.weight(w)
    if wv == INF or ww == INF:
        raise PolytopeError("outside", "points must lie in the cone")
    if not any(v) or not any(w):
        return True
    for f in poly.originless_facets:
        if (sum(a * x for a, x in zip(f.normal, v)) == wv
                and sum(a * x for a, x in zip(f.normal, w)) == ww):
            return True
    return False


# ---------------------------------------------------------------------------
# simplex cones


@dataclass(frozen=True)
class SimplexCone:
    """Primitive generators g'_i and scalings d_i with vertices d_i * g'_i."""

    generators: tuple[Point, ...]
    scalings: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.generators)

    @property
    def vertices(self) -> tuple[Point, ...]:
        return tuple(tuple(d * x for x in g) for g, d in zip(self.generators, self.scalings))

    @cached_property
    def disc(self) -> int:
        return abs(det(self.generators))

    @cached_property
    def invariant_factors(self) -> tuple[int, ...]:
        return smith_invariants(self.generators)

    def coordinates(self, v: Sequence) -> list[Fraction]:
        """Coefficients of v in the generator basis."""
        cols = [[g[i] for g in self.generators] for i in range(self.dim)]
        return solve(cols, v)

    def contains(self, v: Sequence) -> bool:
        return all(c >= 0 for c in self.coordinates(v))


def primitive_generating_set(vertices: Iterable[Sequence[int]]) -> SimplexCone:
    """Generators of the cone over a simplex with the origin as apex."""
    verts = [tuple(v) for v in vertices if any(v)]
    if not verts:
        raise PolytopeError("simplex", "no nonzero vertices")
    n = len(verts[0])
    if len(verts) != n or det(verts) == 0:
        raise PolytopeError("simplex", "need n linearly independent nonzero vertices")
    gens, scal = [], []
    for v in sorted(verts):
        g = reduce(math.gcd, v)
        g = abs(g)
        gens.append(tuple(x // g for x in v))
        scal.append(g)
    return SimplexCone(tuple(gens), tuple(scal))


def smith_invariants(matrix: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Invariant factors via determinantal divisors: l_k = d_k / d_(k-1)."""
    n = len(matrix)
    if n == 0 or any(len(r) != n for r in matrix):
        raise ValueError("square matrix required")
    if det(matrix) == 0:
        raise ValueError("singular matrix")
    divisors = [1]
    for k in range(1, n + 1):
        g = 0
        for rows in itertools.combinations(range(n), k):
            for cols in itertools.combinations(range(n), k):
                g = math.gcd(g, det([[matrix[i][j] for j in cols] for i in rows]))
                if g == 1:
                    break
            if g == 1:
                break
        divisors.append(g)
    return tuple(divisors[k] // divisors[k - 1] for k in range(1, n + 1))


def parallelepiped_points(cone: SimplexCone) -> tuple[list[Point], int]:
    """Lattice points of the half-open parallelepiped of the generators, and disc."""
    n = cone.dim
    lo = [sum(min(0, g[i]) for g in cone.generators) for i in range(n)]
    hi = [sum(max(0, g[i]) for g in cone.generators) for i in range(n)]
    d = det([[g[i] for g in cone.generators] for i in range(n)])
    # adjugate so that coordinates are (adj @ x) / d
    adj = [[(-1) ** (i + j) * det([[cone.generators[c][r] for c in range(n) if c != i]
                                   for r in range(n) if r != j])
            for j in range(n)] for i in range(n)]
    grids = np.meshgrid(*[np.arange(a, b + 1) for a, b in zip(lo, hi)], indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)
    num = pts @ np.array(adj, dtype=np.int64).T
    if d < 0:
        num, d = -num, -d
    keep = ((num >= 0) & (num < d)).all(axis=1)
    found = sorted(tuple(int(x) for x in p) for p in pts[keep])
    return found, cone.disc


# ---------------------------------------------------------------------------
# monoids and Hilbert bases


@dataclass
class HilbertBasisResult:
    generators: list[Point]
    unique: bool
    asymptotic: bool
    witness_bound: Fraction
    witnesses: dict[Point, Point] = field(default_factory=dict)


def _positive_functional(poly: Polytope) -> tuple[int, ...] | None:
    """An integer functional positive on the pointed cone minus the origin."""
    if not poly.cone_facets:
        return None
    total = [0] * poly.dim
    for f in poly.cone_facets:
        total = [t - a for t, a in zip(total, f.int_normal)]
    return tuple(total)


def monoid_members(gens: Sequence[Point], poly: Polytope, points: Iterable[Point]) -> set[Point]:
    """Which of `points` lie in the monoid generated by gens (pointed cone).

    Dynamic programming in increasing order of a positive functional: v is
    generated iff v - g is generated (or zero) for some generator g.
    """
    ell = _positive_functional(poly)
    if ell is None:
        raise PolytopeError("pointed", "cone is not pointed")
    gens = [tuple(g) for g in gens if any(g)]
    targets = list(points)
    top = max((_dot(ell, v) for v in targets), default=0)
    # on the cone, weight(v) <= ell(v) / min over nonzero vertices of ell
    floor = min(Fraction(_dot(ell, v)) / poly.weight(v) for v in poly.vertices if any(v))
    region = poly.cone_points(Fraction(top) / floor)
    region.sort(key=lambda v: _dot(ell, v))
    generated = {(0,) * poly.dim}
    for v in region:
        if _dot(ell, v) > top:
            break
        if any(tuple(a - b for a, b in zip(v, g)) in generated for g in gens):
            generated.add(v)
    return {v for v in targets if v in generated and any(v)}


def _dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))


def generation_check(gens: Sequence[Point], poly: Polytope, weight_bound) -> dict:
    """Classify gens as generating / asymptotically generating S(Delta).

    All cone points of weight <= weight_bound + n + 1 are tested. The verdict
    is asymptotic when no failure occurs in a window of width n + 1 above the
    last failure (a heuristic; monoid saturation is eventually periodic).
    """
    n = poly.dim
    top = Fraction(weight_bound) + n + 1
    pts = [v for v in poly.cone_points(top) if any(v)]
    members = monoid_members(gens, poly, pts)
    fails = sorted((v for v in pts if v not in members), key=lambda v: (poly.weight(v), v))
    if not fails:
        return {"generates": True, "asymptotically_generates": True, "fails_at": [],
                "checked_up_to": top}
    last = max(poly.weight(v) for v in fails)
    asymptotic = last + n + 1 <= top
    return {"generates": False, "asymptotically_generates": asymptotic,
            "fails_at": fails, "checked_up_to": top}


def _irreducible(cands: Sequence[Point], member) -> tuple[list[Point], dict[Point, Point]]:
    """Keep x unless x - c is in the cone for another candidate c."""
    keep, witness = [], {}
    for x in cands:
        red = next((c for c in cands if c != x and member(tuple(a - b for a, b in zip(x, c)))),
                   None)
        if red is None:
            keep.append(x)
        else:
            witness[x] = red
    return keep, witness


def simplex_hilbert_basis(cone: SimplexCone) -> list[Point]:
    pts, _ = parallelepiped_points(cone)
    cands = sorted(set(cone.generators) | {p for p in pts if any(p)})
    keep, _ = _irreducible(cands, lambda v: any(v) and cone.contains(v))
    return sorted(keep)


def hilbert_basis(poly: Polytope, weight_bound=3) -> HilbertBasisResult:
    """Hilbert basis of C(Delta) cap Z^n from simplex pieces, re-minimised.

    Generation is verified on every cone point with weight <= weight_bound,
    and minimality by a witness point per generator (the generator itself:
    removing it leaves it ungenerated).
    """
    _require_origin(poly)
    if _positive_functional(poly) is None:
        raise PolytopeError("pointed", "cone over Delta is not pointed")
    cands: set[Point] = set()
    for _, piece in facial_subdivision(poly):
        facet_pts = [v for v in piece.vertices if any(v)]
        for simplex in _simplices_of(facet_pts, poly.dim):
            cands.update(simplex_hilbert_basis(primitive_generating_set(simplex)))
    cands_l = sorted(cands)
    keep, _ = _irreducible(cands_l, lambda v: any(v) and poly.in_cone(v))
    keep = sorted(keep, key=lambda v: (poly.weight(v), v))
    pts = [v for v in poly.cone_points(weight_bound) if any(v)]
    members = monoid_members(keep, poly, pts)
    if len(members) != len(pts):
        missing = [v for v in pts if v not in members]
        raise AssertionError(f"basis fails to generate {missing[:5]}")
    witnesses = {}
    for g in keep:
        rest = [h for h in keep if h != g]
        if g in monoid_members(rest, poly, [g]):
            raise AssertionError(f"generator {g} is redundant")
        witnesses[g] = g
    return HilbertBasisResult(keep, True, True, Fraction(weight_bound), witnesses)


def _simplices_of(facet_vertices: Sequence[Point], n: int) -> list[list[Point]]:
    """Split the vertex set of an origin-less facet into simplices."""
    if len(facet_vertices) == n:
        return [list(facet_vertices)]
    tri = triangulate_facet(facet_vertices)
    return [list(s) for s in tri]


# ---------------------------------------------------------------------------
# triangulations


@dataclass(frozen=True)
class Triangulation:
    points: tuple[Point, ...]
    simplices: tuple[tuple[int, ...], ...]
    heights: tuple[Fraction, ...] | None = None
    regular: bool = False
    complete: bool = True

    def simplex_points(self, s: tuple[int, ...]) -> list[Point]:
        return [self.points[i] for i in s]

    def volumes(self) -> list[int]:
        return [abs(det([[a - b for a, b in zip(p, pts[0])] for p in pts[1:]]))
                for pts in map(self.simplex_points, self.simplices)]

    @property
    def unimodular(self) -> bool:
        return all(v == 1 for v in self.volumes())


class TriangulationError(ValueError):
    pass


def _lift_sign(pts: Sequence[Point], heights, perturb: bool, simplex, j) -> int:
    """Sign of height_j minus the lifted simplex plane at x_j.

    With ``perturb`` point k gets the extra height eps**(k+1), eps -> 0+, so a
    tie is decided by the smallest index carrying a nonzero coefficient.
    """
    base = [pts[i] for i in simplex]
    n = len(pts[0])
    cols = [[base[c][r] for c in range(n + 1)] for r in range(n)] + [[1] * (n + 1)]
    lam = solve(cols, list(pts[j]) + [1])
    h = heights[j] - sum(l * heights[i] for l, i in zip(lam, simplex))
    if h != 0 or not perturb:
        return (h > 0) - (h < 0)
    coeffs = {j: Fraction(1)}
    for l, i in zip(lam, simplex):
        if l != 0:
            coeffs[i] = -l
    lead = coeffs[min(coeffs)]
    return 1 if lead > 0 else -1


def regular_triangulation(points: Sequence[Sequence[int]], heights: Sequence,
                          perturb: bool = False) -> Triangulation:
    """Project the lower envelope of the lifted configuration.

    Raises TriangulationError when a lower cell is not a simplex; with
    ``perturb=True`` ties are broken by a symbolic lexicographic perturbation,
    which always yields a triangulation refining the given subdivision.
    """
    pts = [tuple(p) for p in points]
    hs = [Fraction(h) for h in heights]
    if len(hs) != len(pts):
        raise ValueError("one height per point required")
    n = len(pts[0])
    simplices = []
    for simplex in itertools.combinations(range(len(pts)), n + 1):
        base = [pts[i] for i in simplex]
        if det([[a - b for a, b in zip(p, base[0])] for p in base[1:]]) == 0:
            continue
        signs = [_lift_sign(pts, hs, perturb, simplex, j)
                 for j in range(len(pts)) if j not in simplex]
        if any(s < 0 for s in signs):
            continue
        if any(s == 0 for s in signs):
            raise TriangulationError(
                "non-generic heights give a non-simplicial lower cell; "
                "pass perturb=True or perturb the heights")
        simplices.append(simplex)
    tri = Triangulation(tuple(pts), tuple(simplices), tuple(hs), regular=True)
    check_triangulation(tri)
    return tri


def _in_simplex(x: Sequence, base: Sequence[Point]) -> bool:
    n = len(x)
    cols = [[base[c][r] for c in range(n + 1)] for r in range(n)] + [[1] * (n + 1)]
    lam = solve(cols, list(x) + [1])
    return all(l >= 0 for l in lam)


def check_triangulation(tri: Triangulation) -> None:
    """Assert covering, volume and face-to-face (no hanging vertex) properties."""
    pts = tri.points
    n = len(pts[0])
    hull = build_polytope(pts)
    total = sum(tri.volumes())
    if total != hull_normalized_volume(hull):
        raise TriangulationError("simplices do not tile the hull")
    used = sorted({i for s in tri.simplices for i in s})
    for s in tri.simplices:
        base = [pts[i] for i in s]
        for i in used:
            if i in s:
                continue
            if _in_simplex(pts[i], base):
                raise TriangulationError(f"point {pts[i]} lies on simplex {s} without being a vertex")
    # pairwise: barycentres of distinct maximal simplices are not shared
    for a, b in itertools.combinations(tri.simplices, 2):
        bary = [Fraction(sum(pts[i][k] for i in a), n + 1) for k in range(n)]
        if _in_simplex_open(bary, [pts[i] for i in b]):
            raise TriangulationError(f"simplices {a} and {b} overlap")


def _in_simplex_open(x, base) -> bool:
    n = len(x)
    cols = [[base[c][r] for c in range(n + 1)] for r in range(n)] + [[1] * (n + 1)]
    lam = solve(cols, list(x) + [1])
    return all(l > 0 for l in lam)


def hull_normalized_volume(poly: Polytope) -> int:
    """n! Vol via pyramids from the first vertex over a fan of each facet."""
    apex = poly.vertices[0]
    total = 0
    for f in poly.facets:
        if 0 in f.vertex_ids:
            continue
        fpts = poly.facet_points(f)
        for simplex in triangulate_facet(fpts):
            total += abs(det([[a - b for a, b in zip(p, apex)] for p in simplex]))
    return total


def triangulate_facet(facet_points: Sequence[Point]) -> list[list[Point]]:
    """Pulling triangulation of a convex (n-1)-dimensional point set in R^n."""
    pts = sorted(set(tuple(p) for p in facet_points))
    n = len(pts[0])
    if len(pts) == n:
        return [pts]
    if n == 1:
        return [pts[:1]]
    # project away one coordinate the supporting hyperplane depends on
    normal = next(a for a in map(hyperplane_normal, itertools.combinations(pts, n)) if any(a))
    drop = next(i for i, x in enumerate(normal) if x != 0)
    proj = [p[:drop] + p[drop + 1:] for p in pts]
    sub = build_polytope(proj)
    apex = proj.index(sub.vertices[0])
    out = []
    for f in sub.facets:
        if 0 in f.vertex_ids:
            continue
        for face in triangulate_facet(sub.facet_points(f)):
            out.append([pts[apex]] + [pts[proj.index(q)] for q in face])
    return out


def normalized_volume(poly: Polytope) -> int:
    """V_Delta = n! Vol(Delta), cross-checked on two triangulations."""
    v1 = hull_normalized_volume(poly)
    if poly.contains_origin:
        v2 = 0
        for f, _ in facial_subdivision(poly):
            for simplex in triangulate_facet(poly.facet_points(f)):
                v2 += abs(det([list(p) for p in simplex]))
        if v1 != v2:
            raise AssertionError(f"volume depends on triangulation: {v1} != {v2}")
    return v1


def is_unimodular(tri: Triangulation) -> bool:
    return tri.unimodular


def standard_unimodular_triangulation(kind: str, dims) -> Triangulation:
    """Unimodular triangulations of boxes and cross-polytopes.

    ``kind="rectangle"``: dims is a list of (lo, hi) integer intervals; each
    unit cube gets the staircase triangulation (one simplex per permutation).
    ``kind="diamond"``: dims is (n, d) for {x : |x|_1 <= d}; each orthant copy
    of the dilated standard simplex is triangulated through the unimodular
    change of variables y_i = x_1 + ... + x_i.
    """
    if kind == "rectangle":
        bounds = [tuple(b) for b in dims]
        n = len(bounds)
        simplices = []
        for corner in itertools.product(*[range(lo, hi) for lo, hi in bounds]):
            for perm in itertools.permutations(range(n)):
                v = list(corner)
                simplex = [tuple(v)]
                for i in perm:
                    v[i] += 1
                    simplex.append(tuple(v))
                simplices.append(simplex)
    elif kind == "diamond":
        n, d = dims
        base = []
        for corner in itertools.product(range(d), repeat=n):
            for perm in itertools.permutations(range(n)):
                y = list(corner)
                simplex = [tuple(y)]
                for i in perm:
                    y[i] += 1
                    simplex.append(tuple(y))
                cen = [Fraction(sum(s[k] for s in simplex), n + 1) for k in range(n)]
                if all(cen[k] <= cen[k + 1] for k in range(n - 1)) and cen[-1] <= d:
                    base.append([tuple([y[0]] + [y[k] - y[k - 1] for k in range(1, n)])
                                 for y in simplex])
        simplices = []
        for signs in itertools.product((1, -1), repeat=n):
            for s in base:
                simplices.append([tuple(sg * x for sg, x in zip(signs, p)) for p in s])
    else:
        raise ValueError(f"unknown kind {kind!r}")
    pts = sorted({p for s in simplices for p in s})
    index = {p: i for i, p in enumerate(pts)}
    simp = tuple(sorted({tuple(sorted(index[p] for p in s)) for s in simplices}))
    tri = Triangulation(tuple(pts), simp)
    if not tri.unimodular:
        raise AssertionError("non-unimodular simplex produced")
    check_triangulation(tri)
    return tri

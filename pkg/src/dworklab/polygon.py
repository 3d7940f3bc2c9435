"""Newton and Hodge polygons with exact rational ordinates."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .lattice import Polytope, build_polytope, normalized_volume
from .weights import WeightContext, weight_census


class PolygonError(ValueError):
    pass


@dataclass(frozen=True)
class NewtonPolygon:
    """Convex piecewise-linear function given by its break points."""

    vertices: tuple[tuple[int, Fraction], ...]

    @property
    def length(self) -> int:
        return self.vertices[-1][0]

    @property
    def endpoint(self) -> Fraction:
        return self.vertices[-1][1]

    def value_at(self, x: int) -> Fraction:
        if not 0 <= x <= self.length:
            raise PolygonError(f"x = {x} outside [0, {self.length}]")
        for (x0, y0), (x1, y1) in zip(self.vertices, self.vertices[1:]):
            if x0 <= x <= x1:
                return y0 + (y1 - y0) * Fraction(x - x0, x1 - x0)
        return self.vertices[0][1]

    def slopes(self) -> list[Fraction]:
        """Slope of each unit segment, in increasing order."""
        out = []
        for (x0, y0), (x1, y1) in zip(self.vertices, self.vertices[1:]):
            out.extend([(y1 - y0) / (x1 - x0)] * (x1 - x0))
        return out

    def slope_multiset(self) -> dict[Fraction, int]:
        out: dict[Fraction, int] = {}
        for s in self.slopes():
            out[s] = out.get(s, 0) + 1
        return out

    def truncate(self, length: int) -> "NewtonPolygon":
        return polygon_from_slopes(self.slopes()[:length])

    def to_json(self) -> str:
        return json.dumps([[x, str(y)] for x, y in self.vertices])

    @staticmethod
    def from_json(text: str) -> "NewtonPolygon":
        return NewtonPolygon(tuple((int(x), Fraction(y)) for x, y in json.loads(text)))

    def __str__(self) -> str:
        return "{" + ", ".join(str(s) for s in self.slopes()) + "}"


def lower_hull(points: Iterable[tuple[int, Fraction | float]]) -> NewtonPolygon:
    """Lower convex hull of (x, y) points; infinite ordinates are skipped."""
    pts = sorted((int(x), Fraction(y)) for x, y in points if y != math.inf)
    if not pts or pts[0][0] != 0:
        raise PolygonError("a point at x = 0 is required")
    # keep the lowest ordinate per abscissa
    best: dict[int, Fraction] = {}
    for x, y in pts:
        if x not in best or y < best[x]:
            best[x] = y
    hull: list[tuple[int, Fraction]] = []
    for pt in sorted(best.items()):
        while len(hull) >= 2:
            (x0, y0), (x1, y1) = hull[-2], hull[-1]
            # drop the middle point unless it is strictly below the chord
            if (y1 - y0) * (pt[0] - x0) >= (pt[1] - y0) * (x1 - x0):
                hull.pop()
            else:
                break
        hull.append(pt)
    return NewtonPolygon(tuple(hull))


def polygon_from_slopes(slopes: Iterable[Fraction]) -> NewtonPolygon:
    ys = [Fraction(0)]
    for s in sorted(Fraction(x) for x in slopes):
        ys.append(ys[-1] + s)
    return lower_hull(enumerate(ys))


def polygon_from_multiset(mult: dict) -> NewtonPolygon:
    return polygon_from_slopes([Fraction(s) for s, m in mult.items() for _ in range(m)])


def hodge_polygon(poly_or_ctx: Polytope | WeightContext) -> NewtonPolygon:
    """Slopes i/D with multiplicity H(i); horizontal length V."""
    ctx = poly_or_ctx if isinstance(poly_or_ctx, WeightContext) else weight_census(poly_or_ctx)
    return polygon_from_slopes([Fraction(i, ctx.D) for i, h in enumerate(ctx.H) for _ in range(h)])


def hodge_polygon_chain(poly: Polytope, length: int) -> NewtonPolygon:
    """Slopes i/D with multiplicity W(i), truncated to the given length."""
    n, D = poly.dim, poly.denominator
    k = n * D
    while True:
        ctx = weight_census(poly, k)
        if sum(ctx.W) >= length:
            break
        k *= 2
    slopes = [Fraction(i, D) for i, w in enumerate(ctx.W) for _ in range(w)]
    return polygon_from_slopes(slopes[:length])


def hodge_polygon_by_inclusion_exclusion(poly: Polytope) -> NewtonPolygon:
    """HP as the slope multiset of prod_i (chain)^((-1)^i C(n,i)) shifted by i.

    Multiplying the chain generating function sum W(k) t^k by (1 - t^D)^n is
    the same inclusion-exclusion, so this is a cross-check of the census
    arithmetic through polynomial multiplication rather than the H formula.
    """
    n, D = poly.dim, poly.denominator
    ctx = weight_census(poly, n * D)
    series = list(ctx.W)
    factor = [0] * (n * D + 1)
    for i in range(n + 1):
        factor[i * D] = (-1) ** i * math.comb(n, i)
    prod = [sum(series[j] * factor[k - j] for j in range(k + 1)) for k in range(n * D + 1)]
    if any(c < 0 for c in prod):
        raise AssertionError("negative multiplicity")
    return polygon_from_slopes([Fraction(k, D) for k, c in enumerate(prod) for _ in range(c)])


@dataclass(frozen=True)
class Comparison:
    lies_above: bool
    endpoints_meet: bool
    max_vertical_gap: Fraction
    gap_at: int


def compare(P: NewtonPolygon, Q: NewtonPolygon) -> Comparison:
    """Pointwise comparison of P against Q at integer abscissae."""
    if P.length != Q.length:
        raise PolygonError(f"lengths differ: {P.length} vs {Q.length}")
    gaps = [P.value_at(x) - Q.value_at(x) for x in range(P.length + 1)]
    gap = max(gaps)
    return Comparison(all(g >= 0 for g in gaps), P.endpoint == Q.endpoint, gap, gaps.index(gap))


@dataclass(frozen=True)
class ToricHodge:
    K: tuple[int, ...]
    h: tuple[int, ...]
    polygon: NewtonPolygon
    lifted: Polytope


def lifted_pyramid(poly: Polytope) -> Polytope:
    """hull(0, (1, Delta)) in one dimension higher."""
    return build_polytope([(0,) * (poly.dim + 1)] + [(1,) + v for v in poly.vertices])


def toric_hodge_numbers(poly: Polytope) -> ToricHodge:
    """K(k) = |k Delta cap Z^n| and h(k) = sum_i (-1)^i C(n+1, i) K(k-i).

    h vanishes for k > n and sums to V_Delta; HP of the toric family has
    slope k with multiplicity h(k). The result is cross-checked against the
    Hodge polygon of the lifted pyramid hull(0, (1, Delta)).
    """
    n = poly.dim
    K = tuple(len(poly.lattice_points(k)) if k else 1 for k in range(n + 2))
    h = tuple(sum((-1) ** i * math.comb(n + 1, i) * K[k - i] for i in range(k + 1))
              for k in range(n + 1))
    V = normalized_volume(poly)
    if sum(h) != V:
        raise AssertionError(f"toric Hodge numbers {h} do not sum to {V}")
    hp = polygon_from_slopes([Fraction(k) for k, c in enumerate(h) for _ in range(c)])
    lifted = lifted_pyramid(poly)
    if hodge_polygon(lifted) != hp:
        raise AssertionError("toric Hodge polygon disagrees with the lifted pyramid")
    return ToricHodge(K, h, hp, lifted)


def slopes_to_str(slopes: Sequence[Fraction]) -> str:
    return ";".join(str(s) for s in slopes)

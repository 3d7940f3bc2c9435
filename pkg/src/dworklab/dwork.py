"""The p-adic route to L-functions of exponential sums.

Dwork's splitting function F(x) = prod_j E(gamma a_j x^j) is expanded over
the cone of Delta, its coefficients F_{pr-s} assemble into the Frobenius
matrix, and det(1 - T A) yields L*(f)^((-1)^(n-1)) through the alternating
product over q^i T. Symbolic versions of the same entries give the graded
pieces from which local, global and star Hasse polynomials are built.

Numbers live in Z_p[gamma] / (p^N) with gamma the Artin-Hasse root of
log E(x) = 0, so that E(gamma) is an honest p-th root of unity and the trace
formula holds exactly rather than up to valuations.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Callable, Iterable, Sequence

from .expsum import LaurentPoly
from .ffield import crt_pair, rational_mod, rational_reconstruction, teichmuller, vp
from .lattice import (
    INF,
    Point,
    Polytope,
    open_facial_subdivision,
    parallelepiped_points,
    primitive_generating_set,
    triangulate_facet,
)
from .polygon import NewtonPolygon, hodge_polygon, lower_hull
from .weights import WeightContext, delta_order, glex_key, representations, weight_census


class PrecisionError(ArithmeticError):
    pass


class HasseError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Artin-Hasse series


@dataclass(frozen=True)
class ArtinHasseSeries:
    p: int
    coeffs: tuple[Fraction, ...]

    def __getitem__(self, m: int) -> Fraction:
        return self.coeffs[m]

    def __len__(self) -> int:
        return len(self.coeffs)


@lru_cache(maxsize=None)
def artin_hasse(p: int, M: int) -> ArtinHasseSeries:
    """e_0..e_M of exp(sum_i x^(p^i) / p^i), from m e_m = sum_i e_(m - p^i)."""
    if M < 0:
        raise ValueError("M must be non-negative")
    steps = []
    q = 1
    while q <= M:
        steps.append(q)
        q *= p
    e = [Fraction(1)]
    for m in range(1, M + 1):
        e.append(sum((e[m - q] for q in steps if q <= m), Fraction(0)) / m)
    for m, c in enumerate(e):
        if c.denominator % p == 0:
            raise AssertionError(f"e_{m} = {c} is not p-integral")
    return ArtinHasseSeries(p, tuple(e))


def artin_hasse_root(p: int, N: int) -> int:
    """t = gamma^(p-1) mod p^N for the root gamma of log E(x) of order 1/(p-1).

    log E(x) = x sum_i t^((p^i - 1)/(p - 1)) / p^i with t = x^(p-1). Putting
    t = -p u gives u = 1 + sum_{i>=2} (-1)^(e_i) p^(e_i - i) u^(e_i), a
    contraction solved by iteration.
    """
    mod = p ** N
    terms = []
    i = 2
    while True:
        e = (p ** i - 1) // (p - 1)
        if e - i >= N:
            break
        terms.append((e, (-1) ** e * p ** (e - i)))
        i += 1
    u = 1
    for _ in range(N + 2):
        nxt = (1 + sum(c * pow(u, e, mod) for e, c in terms)) % mod
        if nxt == u:
            break
        u = nxt
    return (-p * u) % mod


# ---------------------------------------------------------------------------
# the ring Z_p[gamma^(1/e)] / p^N


@dataclass(frozen=True, eq=False)
class GammaRing:
    """Elements sum a_i pi^i with pi = gamma^(1/e), pi^(e(p-1)) = t, a_i mod p^N."""

    p: int
    N: int
    t: int
    e: int = 1

    @property
    def mod(self) -> int:
        return self.p ** self.N

    @property
    def d(self) -> int:
        return self.e * (self.p - 1)

    @property
    def zero(self) -> tuple[int, ...]:
        return (0,) * self.d

    @property
    def one(self) -> tuple[int, ...]:
        return (1,) + (0,) * (self.d - 1)

    def scalar(self, c: int | Fraction) -> tuple[int, ...]:
        c = rational_mod(Fraction(c), self.mod)
        return (c,) + (0,) * (self.d - 1)

    def pi_power(self, k: int) -> tuple[int, ...]:
        """pi^k for k >= 0."""
        q, r = divmod(k, self.d)
        out = [0] * self.d
        out[r] = pow(self.t, q, self.mod)
        return tuple(out)

    def add(self, a, b) -> tuple[int, ...]:
        m = self.mod
        return tuple((x + y) % m for x, y in zip(a, b))

    def sub(self, a, b) -> tuple[int, ...]:
        m = self.mod
        return tuple((x - y) % m for x, y in zip(a, b))

    def neg(self, a) -> tuple[int, ...]:
        m = self.mod
        return tuple(-x % m for x in a)

    def scale(self, a, c: int) -> tuple[int, ...]:
        m = self.mod
        return tuple(x * c % m for x in a)

    def mul(self, a, b) -> tuple[int, ...]:
        d = self.d
        out = [0] * (2 * d - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        out[i + j] += x * y
        m, t = self.mod, self.t
        return tuple((out[k] + (out[k + d] * t if k + d < 2 * d - 1 else 0)) % m for k in range(d))

    def is_zero(self, a) -> bool:
        return not any(a)

    def ord(self, a) -> Fraction | float:
        """min_i ord_p(a_i) + i / (e(p - 1)); INF for zero; exact when < N."""
        best: Fraction | float = INF
        for i, x in enumerate(a):
            if x:
                v = Fraction(vp(x, self.p)) + Fraction(i, self.d)
                if v < best:
                    best = v
        return best

    def refine(self, e: int) -> "GammaRing":
        """The same ring with gamma^(1/(self.e * e)) adjoined."""
        return GammaRing(self.p, self.N, self.t, self.e * e)

    def embed(self, a, finer: "GammaRing") -> tuple[int, ...]:
        k = finer.e // self.e
        out = [0] * finer.d
        for i, x in enumerate(a):
            out[i * k] = x
        return tuple(out)


@lru_cache(maxsize=None)
def gamma_ring(p: int, N: int) -> GammaRing:
    ring = GammaRing(p, N, artin_hasse_root(p, N))
    _check_root_of_unity(ring)
    return ring


def _check_root_of_unity(ring: GammaRing) -> None:
    """E(gamma) must be a p-th root of unity other than 1."""
    M = ring.d * ring.N + 1
    ah = artin_hasse(ring.p, M)
    z = ring.zero
    for m in range(M + 1):
        z = ring.add(z, ring.scale(ring.pi_power(m), rational_mod(ah[m], ring.mod)))
    w = ring.one
    for _ in range(ring.p):
        w = ring.mul(w, z)
    if w != ring.one:
        raise AssertionError("E(gamma) is not a p-th root of unity")
    if ring.ord(ring.sub(z, ring.one)) != Fraction(1, ring.p - 1):
        raise AssertionError("E(gamma) - 1 has the wrong valuation")


@dataclass(frozen=True)
class GammaNumber:
    ring: GammaRing
    coeffs: tuple[int, ...]

    @property
    def ord(self) -> Fraction | float:
        return self.ring.ord(self.coeffs)

    @property
    def precision(self) -> int:
        return self.ring.N

    def certified(self) -> bool:
        return self.ord < self.ring.N

    def __add__(self, other: "GammaNumber") -> "GammaNumber":
        return GammaNumber(self.ring, self.ring.add(self.coeffs, other.coeffs))

    def __sub__(self, other: "GammaNumber") -> "GammaNumber":
        return GammaNumber(self.ring, self.ring.sub(self.coeffs, other.coeffs))

    def __mul__(self, other: "GammaNumber") -> "GammaNumber":
        return GammaNumber(self.ring, self.ring.mul(self.coeffs, other.coeffs))

    def __neg__(self) -> "GammaNumber":
        return GammaNumber(self.ring, self.ring.neg(self.coeffs))

    def is_zero(self) -> bool:
        return self.ring.is_zero(self.coeffs)


# ---------------------------------------------------------------------------
# power series and determinants over a commutative ring


@dataclass(frozen=True)
class _Ops:
    add: Callable
    sub: Callable
    mul: Callable
    neg: Callable
    zero: object
    one: object
    is_zero: Callable


def _ring_ops(ring: GammaRing) -> _Ops:
    return _Ops(ring.add, ring.sub, ring.mul, ring.neg, ring.zero, ring.one, ring.is_zero)


FRACTION_OPS = _Ops(lambda a, b: a + b, lambda a, b: a - b, lambda a, b: a * b,
                    lambda a: -a, Fraction(0), Fraction(1), lambda a: a == 0)


def _ser_mul(ops: _Ops, a, b, length: int) -> list:
    out = [ops.zero] * length
    for i, x in enumerate(a[:length]):
        if ops.is_zero(x):
            continue
        for j in range(min(len(b), length - i)):
            if not ops.is_zero(b[j]):
                out[i + j] = ops.add(out[i + j], ops.mul(x, b[j]))
    return out


def _ser_inv(ops: _Ops, a, length: int) -> list:
    """Inverse of a series with constant term 1."""
    if a[0] != ops.one:
        raise ValueError("constant term must be 1")
    out = [ops.one] + [ops.zero] * (length - 1)
    for k in range(1, length):
        acc = ops.zero
        for i in range(1, min(k, len(a) - 1) + 1):
            if not ops.is_zero(a[i]):
                acc = ops.add(acc, ops.mul(a[i], out[k - i]))
        out[k] = ops.neg(acc)
    return out


def fredholm_series(ops: _Ops, A: Sequence[Sequence], degree: int) -> list:
    """det(I - T A) mod T^(degree + 1) by elimination over R[[T]].

    Off-diagonal entries are multiples of T, so every pivot keeps constant
    term 1 and no division in R is needed.
    """
    n = len(A)
    L = degree + 1
    M = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            s = [ops.zero] * L
            if i == j:
                s[0] = ops.one
            if L > 1:
                s[1] = ops.neg(A[i][j])
            M[i][j] = s
    det = [ops.one] + [ops.zero] * degree
    for k in range(n):
        piv = M[k][k]
        det = _ser_mul(ops, det, piv, L)
        inv = _ser_inv(ops, piv, L)
        row_k = M[k]
        for i in range(k + 1, n):
            if all(ops.is_zero(x) for x in M[i][k]):
                continue
            fac = _ser_mul(ops, M[i][k], inv, L)
            row_i = M[i]
            for j in range(k + 1, n):
                if all(ops.is_zero(x) for x in row_k[j]):
                    continue
                prod = _ser_mul(ops, fac, row_k[j], L)
                row_i[j] = [ops.sub(x, y) for x, y in zip(row_i[j], prod)]
    return det


def berkowitz(ops: _Ops, A: Sequence[Sequence]) -> list:
    """Coefficients c_0..c_n of det(x I - A) = sum c_k x^(n-k), division free."""
    n = len(A)
    poly = [ops.one]
    for k in range(n):
        # leading (k+1)x(k+1) block: S (k x k), row R, column C, corner a
        a = A[k][k]
        R = [A[k][j] for j in range(k)]
        col = [A[i][k] for i in range(k)]
        t = [ops.one, ops.neg(a)]
        vec = col
        for _ in range(k):
            acc = ops.zero
            for x, y in zip(R, vec):
                acc = ops.add(acc, ops.mul(x, y))
            t.append(ops.neg(acc))
            vec = [_dot(ops, [A[i][j] for j in range(k)], vec) for i in range(k)]
        new = []
        for i in range(k + 2):
            acc = ops.zero
            for j in range(min(i, k) + 1):
                if i - j < len(t):
                    acc = ops.add(acc, ops.mul(t[i - j], poly[j]))
            new.append(acc)
        poly = new
    return poly


def _dot(ops: _Ops, a, b):
    acc = ops.zero
    for x, y in zip(a, b):
        acc = ops.add(acc, ops.mul(x, y))
    return acc


def determinant(ops: _Ops, A: Sequence[Sequence]):
    c = berkowitz(ops, A)
    return c[-1] if len(A) % 2 == 0 else ops.neg(c[-1])


def _skew_block(mats: Sequence[Sequence[Sequence[Fraction]]]) -> list[list[Fraction]]:
    """Block matrix with M_i in block position (i + 1 mod a, i)."""
    a, m = len(mats), len(mats[0])
    B = [[Fraction(0)] * (a * m) for _ in range(a * m)]
    for i, M in enumerate(mats):
        r0, c0 = ((i + 1) % a) * m, i * m
        for x in range(m):
            for y in range(m):
                B[r0 + x][c0 + y] = Fraction(M[x][y])
    return B


def _matmul(A, B):
    return [[sum((A[i][k] * B[k][j] for k in range(len(B))), Fraction(0))
             for j in range(len(B[0]))] for i in range(len(A))]


def skew_block_identity(mats: Sequence[Sequence[Sequence[Fraction]]]) -> bool:
    """det(1 - T^a M_(a-1)...M_0) == det(1 - T B) for the cyclic block matrix B."""
    a, m = len(mats), len(mats[0])
    P = [[Fraction(int(i == j)) for j in range(m)] for i in range(m)]
    for M in mats:
        P = _matmul([[Fraction(x) for x in row] for row in M], P)
    lhs_small = fredholm_series(FRACTION_OPS, P, m)
    lhs = [Fraction(0)] * (a * m + 1)
    for k, c in enumerate(lhs_small):
        lhs[a * k] = c
    rhs = fredholm_series(FRACTION_OPS, _skew_block(mats), a * m)
    return lhs == rhs


def skew_self_test(seed: int = 0, trials: int = 5) -> None:
    import numpy as np

    rng = np.random.default_rng(seed)
    for _ in range(trials):
        a = int(rng.integers(1, 4))
        m = int(rng.integers(1, 4))
        mats = [[[Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4))) for _ in range(m)]
                 for _ in range(m)] for _ in range(a)]
        if not skew_block_identity(mats):
            raise AssertionError("skew-block determinant identity failed")


# ---------------------------------------------------------------------------
# Dwork's splitting function, numerically


def _cone_index(poly: Polytope, k: int) -> list[tuple[Fraction, Point]]:
    D = poly.denominator
    pts = poly.cone_points(Fraction(k, D))
    return sorted((poly.weight(v), tuple(v)) for v in pts)


def splitting_coefficients(f: LaurentPoly, targets: Iterable[Point], ring: GammaRing,
                           max_length: int) -> dict[Point, tuple[int, ...]]:
    """F_v for each target v, summing representations of length <= max_length.

    Terms are grouped by (point, length) with integer coefficients
    prod e_(u_j) a_j^(u_j); the length L carries gamma^L. Dropped terms have
    length > max_length and hence order > max_length / (p - 1).
    """
    p, mod = ring.p, ring.mod
    targets = set(tuple(v) for v in targets)
    ah = artin_hasse(p, max_length)
    e_mod = [rational_mod(c, mod) for c in ah.coeffs]
    n = f.n
    terms = list(f.terms)
    lo = [min(t[k] for t in targets) for k in range(n)]
    hi = [max(t[k] for t in targets) for k in range(n)]
    # per-coordinate extremes of the terms still to be placed, for box pruning
    tail_min = [[min([0] + [j[k] for j, _ in terms[i:]]) for k in range(n)] for i in range(len(terms) + 1)]
    tail_max = [[max([0] + [j[k] for j, _ in terms[i:]]) for k in range(n)] for i in range(len(terms) + 1)]
    states: dict[tuple[Point, int], int] = {((0,) * n, 0): 1}
    for idx, (j, c) in enumerate(terms):
        a_hat = teichmuller(c, p, ring.N)
        factor = [e_mod[m] * pow(a_hat, m, mod) % mod for m in range(max_length + 1)]
        rmin, rmax = tail_min[idx + 1], tail_max[idx + 1]
        new: dict[tuple[Point, int], int] = {}
        for (v, L), val in states.items():
            for m in range(max_length - L + 1):
                w = tuple(x + m * y for x, y in zip(v, j))
                left = max_length - L - m
                if any(w[k] + left * rmin[k] > hi[k] or w[k] + left * rmax[k] < lo[k]
                       for k in range(n)):
                    continue
                key = (w, L + m)
                new[key] = (new.get(key, 0) + val * factor[m]) % mod
        states = new
    out: dict[Point, list[int]] = {v: [0] * ring.d for v in targets}
    for (v, L), val in states.items():
        if v in out and val:
            q, r = divmod(L, ring.d)
            out[v][r] = (out[v][r] + val * pow(ring.t, q, mod)) % mod
    return {v: tuple(c) for v, c in out.items()}


@dataclass
class FredholmMatrix:
    """Truncated Frobenius matrix (F_{pr-s})_{r,s} over S(Delta)_{<= k}.

    Entries are unnormalized; the normalization gamma^(w(s) - w(r)) is
    recorded through the weights. ``certified`` bounds the order below
    which any principal minor's computed valuation is exact.
    """

    poly: Polytope
    p: int
    k: int
    index: tuple[Point, ...]
    weights: tuple[Fraction, ...]
    ring: GammaRing
    entries: list[list[tuple[int, ...]]]
    max_length: int
    certified: Fraction

    @property
    def size(self) -> int:
        return len(self.index)

    @property
    def row_bounds(self) -> tuple[Fraction, ...]:
        return self.weights

    def entry(self, i: int, j: int) -> GammaNumber:
        return GammaNumber(self.ring, self.entries[i][j])

    def normalization(self, i: int, j: int) -> Fraction:
        """Exponent w(s) - w(r) of gamma in the normalized entry."""
        return self.weights[j] - self.weights[i]

    def valuation(self, i: int, j: int) -> Fraction | float:
        return self.ring.ord(self.entries[i][j])

    def normalized_valuation(self, i: int, j: int) -> Fraction | float:
        v = self.valuation(i, j)
        return v if v == INF else v + self.normalization(i, j) / (self.p - 1)

    def normalized_lower_bound(self, i: int, j: int) -> Fraction | float:
        """Certified lower bound for the normalized entry's order."""
        v = self.valuation(i, j)
        if v >= self.certified:
            v = self.certified
        return v + self.normalization(i, j) / (self.p - 1)

    def rows_at(self, k: int) -> list[int]:
        bound = Fraction(k, self.poly.denominator)
        return [i for i, w in enumerate(self.weights) if w <= bound]

    def submatrix(self, rows: Sequence[int]) -> list[list[tuple[int, ...]]]:
        return [[self.entries[i][j] for j in rows] for i in rows]

    def principal_minor(self, rows: Sequence[int]) -> GammaNumber:
        return GammaNumber(self.ring, determinant(_ring_ops(self.ring), self.submatrix(rows)))

    def principal_valuation(self, rows: Sequence[int]) -> Fraction | float:
        v = self.principal_minor(rows).ord
        if v >= self.certified:
            raise PrecisionError(f"minor valuation not below the certified bound {self.certified}")
        return v

    def normalized_entries(self) -> tuple[GammaRing, list[list[tuple[int, ...]]]]:
        """Entries times gamma^(w(s) - w(r)) in the ring with gamma^(1/(D(p-1)))... adjoined.

        Negative exponents are absorbed by scaling row r by gamma^(w(r)) and
        column s by gamma^(-w(s)) only through principal-minor invariance, so
        here every entry is multiplied by gamma^(w(s) - w(r) + W) with W the
        largest weight; principal minors then pick up gamma^(size * W).
        """
        D = self.poly.denominator
        fine = self.ring.refine(D)
        top = max(self.weights) if self.weights else Fraction(0)
        out = []
        for i, wr in enumerate(self.weights):
            row = []
            for j, ws in enumerate(self.weights):
                shift = (ws - wr + top) * D  # in units of gamma^(1/D)
                if shift.denominator != 1:
                    raise AssertionError("normalization exponent not a multiple of 1/D")
                row.append(fine.mul(self.ring.embed(self.entries[i][j], fine),
                                    fine.pi_power(int(shift))))
            out.append(row)
        return fine, out

    def to_csv(self) -> str:
        lines = ["r,s,valuation"]
        for i, r in enumerate(self.index):
            for j, s in enumerate(self.index):
                v = self.valuation(i, j)
                lines.append(f"\"{r}\",\"{s}\",{'inf' if v == INF else v}")
        return "\n".join(lines) + "\n"


def default_precision(ctx: WeightContext) -> int:
    return math.ceil(ctx.k_delta * ctx.n) + 8


def nuclear_matrix(f: LaurentPoly, poly: Polytope | None = None, k: int | None = None,
                   precision: int | None = None, cut: Fraction | int | None = None) -> FredholmMatrix:
    """Truncation of A_1(f) to rows and columns of weight <= k / D.

    ``cut`` is the order below which entries are to be exact; representations
    longer than (p - 1) * cut + max weight are dropped. Row bounds
    ord(normalized entry) >= w(r) are asserted wherever the valuation is
    certified.
    """
    if f.field.a != 1:
        raise ValueError("the Frobenius matrix is built over the prime field only")
    poly = poly or f.polytope
    ctx = weight_census(poly)
    p = f.p
    if k is None:
        k = ctx.k_index
    N = precision or default_precision(ctx)
    cut = Fraction(N if cut is None else cut)
    rows = _cone_index(poly, k)
    weights = tuple(w for w, _ in rows)
    index = tuple(v for _, v in rows)
    top = max(weights)
    max_length = math.ceil((p - 1) * cut + top)
    ring = gamma_ring(p, N)
    targets = {tuple(p * a - b for a, b in zip(r, s)) for r in index for s in index}
    F = splitting_coefficients(f, targets, ring, max_length)
    entries = [[F[tuple(p * a - b for a, b in zip(r, s))] for s in index] for r in index]
    certified = min(Fraction(N), Fraction(max_length + 1) / (p - 1) - top / (p - 1))
    M = FredholmMatrix(poly, p, k, index, weights, ring, entries, max_length, certified)
    for i in range(M.size):
        for j in range(M.size):
            v = M.valuation(i, j)
            if v == INF or v >= certified:
                continue
            if M.normalized_valuation(i, j) < weights[i]:
                raise AssertionError(f"entry ({index[i]}, {index[j]}) violates the row bound")
    return M


def fredholm_det(matrix: FredholmMatrix, N: int | None = None,
                 T_degree: int | None = None) -> list[GammaNumber]:
    """C_0..C_d of det(1 - T A^[N]) for the leading N x N block."""
    N = matrix.size if N is None else N
    if N > matrix.size:
        raise ValueError(f"N = {N} exceeds the truncation size {matrix.size}")
    d = N if T_degree is None else T_degree
    A = [row[:N] for row in matrix.entries[:N]]
    C = fredholm_series(_ring_ops(matrix.ring), A, d)
    return [GammaNumber(matrix.ring, c) for c in C]


# ---------------------------------------------------------------------------
# rigidity


@dataclass(frozen=True)
class RigidReport:
    k: int
    passes: bool
    margin: Fraction
    valuation: Fraction | float
    beta_sum: Fraction
    gap: Fraction


def _next_level(poly: Polytope, weight: Fraction) -> Fraction:
    D = poly.denominator
    i = int(weight * D) + 1
    while not poly.cone_points(Fraction(i, D)) or all(
            poly.weight(v) != Fraction(i, D) for v in poly.cone_points(Fraction(i, D))):
        i += 1
    return Fraction(i, D)


def rigid_check(matrix: FredholmMatrix, k: int) -> RigidReport:
    """sum beta <= ord det M^[N_k] < sum beta + (beta_+ - beta_0) / 2.

    beta_0 is the top weight among the rows and beta_+ the next weight level
    of the cone; the sums are row-bound lower estimates of the infima over
    submatrices, so this is a sufficient condition.
    """
    if k > matrix.k:
        raise ValueError(f"k = {k} exceeds the truncation level {matrix.k}")
    rows = matrix.rows_at(k)
    beta = sum((matrix.weights[i] for i in rows), Fraction(0))
    top = max((matrix.weights[i] for i in rows), default=Fraction(0))
    gap = _next_level(matrix.poly, top) - top
    if not rows:
        return RigidReport(k, True, gap / 2, Fraction(0), beta, gap)
    try:
        val = matrix.principal_valuation(rows)
    except PrecisionError:
        # only a lower bound is known, which cannot confirm the upper inequality
        val = matrix.certified
        return RigidReport(k, False, beta + gap / 2 - val, val, beta, gap)
    margin = beta + gap / 2 - val
    return RigidReport(k, beta <= val and margin > 0, margin, val, beta, gap)


def rigid_levels(matrix: FredholmMatrix, V: int) -> list[RigidReport]:
    """rigid_check at every weight level whose row count stays within V."""
    D = matrix.poly.denominator
    levels = sorted({int(w * D) for w in matrix.weights})
    out = []
    for k in levels:
        if len(matrix.rows_at(k)) > V:
            break
        out.append(rigid_check(matrix, k))
    return out


# ---------------------------------------------------------------------------
# the L-function from the Fredholm determinant


@dataclass(frozen=True)
class DworkResult:
    polygon: NewtonPolygon
    valuations: tuple[Fraction | float, ...]
    certified: Fraction
    matrix_size: int
    rigid: tuple[RigidReport, ...]

    @property
    def verified(self) -> bool:
        return all(r.passes for r in self.rigid)


def l_series_from_fredholm(ring: GammaRing, C: Sequence, n: int, q: int, degree: int) -> list:
    """prod_i C(q^i T)^((-1)^i C(n, i)) mod T^(degree + 1)."""
    ops = _ring_ops(ring)
    L = degree + 1
    out = [ring.one] + [ring.zero] * degree
    C = list(C[:L]) + [ring.zero] * (L - len(C))
    for i in range(n + 1):
        Ci = [ring.scale(c, pow(q, i * t, ring.mod)) for t, c in enumerate(C)]
        e = (-1) ** i * math.comb(n, i)
        if e < 0:
            Ci, e = _ser_inv(ops, Ci, L), -e
        for _ in range(e):
            out = _ser_mul(ops, out, Ci, L)
    return out


def dwork_report(f: LaurentPoly, poly: Polytope | None = None, k: int | None = None,
                 precision: int | None = None) -> DworkResult:
    """NP of L*(f)^((-1)^(n-1)) from det(1 - T A_1(f)), with certification.

    Rows up to weight c = floor(HP endpoint) + 1 are kept; omitted rows
    contribute terms of order > c, dropped splitting-function terms order
    >= c, and computations are exact modulo p^N with N > c. Any coefficient
    whose computed valuation is below the certified bound is exact; the
    bound exceeds the whole polygon, so the hull is determined.
    """
    poly = poly or f.polytope
    ctx = weight_census(poly)
    V, n, D, p = ctx.V, ctx.n, ctx.D, f.p
    end = hodge_polygon(ctx).endpoint
    target = Fraction(math.floor(end) + 1)
    if k is None:
        k = int(target * D)
    N = max(precision or default_precision(ctx), int(target) + 1)
    M = nuclear_matrix(f, poly, k, N, cut=target)
    omitted = _next_level(poly, max(M.weights))
    certified = min(M.certified, omitted)
    if certified <= end:
        raise PrecisionError(f"certified order {certified} does not exceed the endpoint {end}")
    C = fredholm_series(_ring_ops(M.ring), M.entries, V)
    L = l_series_from_fredholm(M.ring, C, n, p, V)
    vals = tuple(M.ring.ord(c) for c in L)
    for x in (0, V):
        if vals[x] >= certified:
            raise PrecisionError(f"coefficient {x} not certified (order >= {certified}); "
                                 "a degree drop indicates that f is not regular")
    points = [(x, v) for x, v in enumerate(vals) if v < certified]
    polygon = lower_hull(points)
    rigid = tuple(rigid_levels(M, V))
    return DworkResult(polygon, vals, certified, M.size, rigid)


def dwork_np(f: LaurentPoly, poly: Polytope | None = None, k: int | None = None,
             precision: int | None = None) -> NewtonPolygon:
    return dwork_report(f, poly, k, precision).polygon


def mu_operation(g: Sequence[Fraction], q: int, length: int) -> list[Fraction]:
    """g(T)^mu = g(T) / g(qT) as a power series."""
    g = [Fraction(c) for c in g] + [Fraction(0)] * length
    num = g[:length]
    den = [c * q ** i for i, c in enumerate(g[:length])]
    return _ser_mul(FRACTION_OPS, num, _ser_inv(FRACTION_OPS, den, length), length)


# ---------------------------------------------------------------------------
# block decomposition over the open facial subdivision


@dataclass(frozen=True)
class BlockReport:
    applicable: bool
    reason: str
    blocks: tuple[tuple[int, int, Fraction | float, Fraction], ...]  # class, size, ord, beta
    total: Fraction | float | None
    off_block_excess: Fraction | float


def block_decomposition_check(matrix: FredholmMatrix, k: int) -> BlockReport:
    """Compare ord det M^[N_k] with the sum over open-face principal blocks.

    Classes are totally ordered by delta_order. A permutation avoiding every
    entry with r <_delta s cannot leave the block diagonal, so if each such
    entry exceeds its row bound by at least eps > 0 and the block excesses
    sum below eps, then det M^[N_k] = prod det(blocks) + O(sum beta + eps)
    and the valuations add; the sum is then asserted. Otherwise the
    decomposition is reported as not applicable.
    """
    sub = open_facial_subdivision(matrix.poly)
    rows = matrix.rows_at(k)
    classes: dict[int, list[int]] = {}
    for i in rows:
        classes.setdefault(sub.classify(matrix.index[i]), []).append(i)
    eps: Fraction | float = INF
    for i in rows:
        for j in rows:
            if delta_order(sub, matrix.index[i], matrix.index[j]) != "lt":
                continue
            eps = min(eps, matrix.normalized_lower_bound(i, j) - matrix.weights[i])
    blocks = []
    excess = Fraction(0)
    try:
        for c in sorted(classes):
            members = classes[c]
            beta = sum((matrix.weights[i] for i in members), Fraction(0))
            val = matrix.principal_valuation(members)
            blocks.append((c, len(members), val, beta))
            excess += val - beta
        total = matrix.principal_valuation(rows) if rows else Fraction(0)
    except PrecisionError:
        return BlockReport(False, "valuation beyond the certified precision", tuple(blocks), None, eps)
    if len(classes) <= 1:
        return BlockReport(True, "single block", tuple(blocks), total, eps)
    if eps <= 0:
        return BlockReport(False, "off-block entry meets its row bound", tuple(blocks), total, eps)
    if excess >= eps:
        return BlockReport(False, "block excess not below the off-block gap", tuple(blocks), total, eps)
    if total != sum(b[2] for b in blocks):
        raise AssertionError("block valuations do not add up")
    return BlockReport(True, "blocks rigid", tuple(blocks), total, eps)


# ---------------------------------------------------------------------------
# symbolic Fredholm polynomials


QPoly = dict  # exponent tuple -> Fraction


@dataclass(frozen=True)
class SymbolicFredholm:
    """F_v as a map (gamma exponent, exponent vector over variables) -> rational."""

    variables: tuple[Point, ...]
    terms: dict

    def is_zero(self) -> bool:
        return not self.terms

    def lowest_gamma(self) -> int | float:
        return min((g for g, _ in self.terms), default=INF)

    def graded(self, gamma_exp: int) -> QPoly:
        return {e: c for (g, e), c in self.terms.items() if g == gamma_exp}


def fredholm_symbolic(v: Sequence[int], gens: Sequence[Sequence[int]], p: int,
                      length_bound: int) -> SymbolicFredholm:
    """sum over representations u of v of prod(e_(u_j) gamma^(u_j) A_j^(u_j))."""
    gens = tuple(tuple(g) for g in gens)
    ah = artin_hasse(p, max(length_bound, 0))
    terms: dict = {}
    if not any(v):
        terms[(0, (0,) * len(gens))] = Fraction(1)
        return SymbolicFredholm(gens, terms)
    for u in representations(v, gens, length_bound):
        exps = tuple(u.get(g, 0) for g in gens)
        c = Fraction(1)
        for m in exps:
            c *= ah[m]
        key = (sum(exps), exps)
        terms[key] = terms.get(key, Fraction(0)) + c
    for (g, e) in terms:
        if g != sum(e):
            raise AssertionError("gamma exponent differs from the total degree")
    return SymbolicFredholm(gens, terms)


def graded_extract(F: SymbolicFredholm, poly: Polytope, p: int, r: Sequence[int],
                   s: Sequence[int], i: int, length_bound: int | None = None) -> QPoly:
    """G^(i)_{pr-s}: the part of M_{pr-s} at gamma^((p-1) w(r) + i).

    Since M = gamma^(w(s) - w(r)) F, this is the degree p w(r) - w(s) + i
    part of F, which equals w(pr - s) + i when pr - s shares a facet cone
    with r and s.
    """
    if i < 0:
        raise ValueError("i must be non-negative")
    deg = p * poly.weight(r) - poly.weight(s) + i
    if length_bound is not None and deg > length_bound:
        raise ValueError(f"degree {deg} is beyond the tracked length {length_bound}")
    if Fraction(deg).denominator != 1:
        return {}
    piece = F.graded(int(deg))
    for e in piece:
        if sum(e) != deg:
            raise AssertionError("graded piece is not homogeneous")
    return piece


def _padd(a: QPoly, b: QPoly, sign: int = 1) -> QPoly:
    out = dict(a)
    for e, c in b.items():
        x = out.get(e, Fraction(0)) + sign * c
        if x:
            out[e] = x
        else:
            out.pop(e, None)
    return out


def _pmul(a: QPoly, b: QPoly) -> QPoly:
    out: QPoly = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            e = tuple(x + y for x, y in zip(e1, e2))
            x = out.get(e, Fraction(0)) + c1 * c2
            if x:
                out[e] = x
            else:
                out.pop(e, None)
    return out


def _graded_entry(poly: Polytope, gens, p: int, r: Point, s: Point, extra: int) -> dict:
    """F_{pr-s} split by excess degree over p w(r) - w(s), up to ``extra``."""
    v = tuple(p * a - b for a, b in zip(r, s))
    base = p * poly.weight(r) - poly.weight(s)
    if poly.weight(v) == INF:
        return {}
    bound = math.floor(base + extra)
    F = fredholm_symbolic(v, gens, p, bound)
    out: dict = {}
    for (g, e), c in F.terms.items():
        x = g - base
        out.setdefault(x, {})[e] = c
    return out


def graded_determinant(entries: Sequence[Sequence[dict]], extra, nvars: int) -> dict[Fraction, QPoly]:
    """Leibniz expansion graded by excess, memoized on the used-column mask."""
    n = len(entries)
    memo: dict[tuple[int, int], dict] = {}

    def rec(i: int, mask: int) -> dict:
        if i == n:
            return {Fraction(0): {(0,) * nvars: Fraction(1)}}
        key = (i, mask)
        if key in memo:
            return memo[key]
        out: dict = {}
        free = 0
        for c in range(n):
            if mask >> c & 1:
                continue
            sign = -1 if free % 2 else 1
            free += 1
            entry = entries[i][c]
            if not entry:
                continue
            rest = rec(i + 1, mask | 1 << c)
            for x1, p1 in entry.items():
                for x2, p2 in rest.items():
                    x = x1 + x2
                    if x > extra:
                        continue
                    out[x] = _padd(out.get(x, {}), _pmul(p1, p2), sign)
        out = {x: q for x, q in out.items() if q}
        memo[key] = out
        return out

    return rec(0, 0)


# ---------------------------------------------------------------------------
# facet pieces and vertex residues


@dataclass(frozen=True)
class FacetPiece:
    """A simplex in a triangulation of an origin-less facet."""

    vertices: tuple[Point, ...]

    @cached_property
    def cone(self):
        return primitive_generating_set(self.vertices)

    def contains(self, v: Sequence[int]) -> bool:
        return self.cone.contains(v)

    def residue(self, p: int) -> tuple[int, ...]:
        return tuple(p % d for d in self.cone.scalings)


def facet_pieces(poly: Polytope, gens: Iterable[Point] = ()) -> list[FacetPiece]:
    out = []
    for f in poly.originless_facets:
        pts = poly.facet_points(f)
        verts = [poly.vertices[i] for i in sorted(f.vertex_ids)]
        if len(verts) == poly.dim:
            out.append(FacetPiece(tuple(sorted(verts))))
        else:
            for simplex in triangulate_facet(pts):
                out.append(FacetPiece(tuple(sorted(tuple(x) for x in simplex))))
    return out


def piece_index(poly: Polytope, piece: FacetPiece, k: int) -> list[Point]:
    return [v for _, v in _cone_index(poly, k) if piece.contains(v)]


def vertex_residue_matrix(poly: Polytope, piece: FacetPiece, gens: Sequence[Point], p: int,
                          k: int) -> tuple[list[list[tuple[int, ...] | None]], tuple[Point, ...]]:
    """Monomials of the glex-minimal residue representations R(pr - s) over S."""
    from .weights import vertex_representation

    idx = piece_index(poly, piece, k)
    S = None
    rows = []
    for r in idx:
        row = []
        for s in idx:
            v = tuple(p * a - b for a, b in zip(r, s))
            if not piece.contains(v):
                row.append(None)
                continue
            rep = vertex_representation(piece.vertices, gens, v, poly)
            S = rep.variables
            row.append(rep.exponent_vector())
        rows.append(row)
    return rows, S or ()


def lowest_glex_det_monomial(matrix: Sequence[Sequence[tuple[int, ...] | None]],
                             degree_bound: int | None = None
                             ) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Greedy crossing-off by increasing glex order; uniqueness is asserted.

    Requires distinct exponent vectors along every row and column. For
    small matrices the result is checked against all permutations.
    """
    n = len(matrix)
    for line in list(matrix) + [list(col) for col in zip(*matrix)]:
        vals = [e for e in line if e is not None]
        if len(set(vals)) != len(vals):
            raise HasseError("repeated exponent vector in a row or column")
    order = sorted((glex_key(e), i, j) for i, row in enumerate(matrix)
                   for j, e in enumerate(row) if e is not None)
    perm: list[int | None] = [None] * n
    used: set[int] = set()
    for _, i, j in order:
        if perm[i] is None and j not in used:
            perm[i] = j
            used.add(j)
    if None in perm:
        raise HasseError("no permutation with all entries nonzero")
    width = len(next(e for row in matrix for e in row if e is not None)) if n else 0
    mono = tuple(sum(matrix[i][perm[i]][t] for i in range(n)) for t in range(width))
    if degree_bound is not None and sum(mono) >= degree_bound:
        raise HasseError(f"lowest monomial has degree {sum(mono)} >= {degree_bound}")
    if n <= 7:
        found = {}
        for sigma in itertools.permutations(range(n)):
            if any(matrix[i][sigma[i]] is None for i in range(n)):
                continue
            m = tuple(sum(matrix[i][sigma[i]][t] for i in range(n)) for t in range(width))
            found.setdefault(m, []).append(sigma)
        best = min(found, key=glex_key)
        if best != mono or len(found[best]) != 1:
            raise HasseError("lowest monomial is not unique or not reached greedily")
    return tuple(perm), mono


# ---------------------------------------------------------------------------
# Hasse polynomials


@dataclass(frozen=True)
class HassePolynomial:
    variables: tuple[Point, ...]
    terms: dict
    provenance: str

    def is_zero(self) -> bool:
        return not self.terms

    def __mul__(self, other: "HassePolynomial") -> "HassePolynomial":
        if self.variables != other.variables:
            raise ValueError("variable sets differ")
        return HassePolynomial(self.variables, _pmul(self.terms, other.terms), self.provenance)

    def evaluate(self, values: dict, modulus: int | None = None):
        total: Fraction | int = 0
        for e, c in self.terms.items():
            term = Fraction(c)
            for var, x in zip(self.variables, e):
                term *= Fraction(values[var]) ** x
            total += term
        if modulus is None:
            return Fraction(total)
        return rational_mod(Fraction(total), modulus)

    def to_json(self) -> str:
        return json.dumps([{"coeff": str(c), "exps": {str(list(v)): str(x)
                                                       for v, x in zip(self.variables, e) if x}}
                           for e, c in sorted(self.terms.items())])

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items(), key=lambda t: glex_key(t[0])):
            mono = "*".join(f"A{list(v)}^{x}" if x != 1 else f"A{list(v)}"
                            for v, x in zip(self.variables, e) if x)
            if not mono:
                parts.append(str(c))
            else:
                parts.append(mono if c == 1 else f"-{mono}" if c == -1 else f"{c}*{mono}")
        return " + ".join(parts)


@dataclass(frozen=True)
class HasseComponent:
    kind: str  # "P" or "G"
    piece: FacetPiece
    label: tuple  # (k,) for P, (r, s) for G
    order: Fraction  # m_k or i(r, s)
    poly: QPoly


@dataclass(frozen=True)
class LocalHasse:
    p: int
    variables: tuple[Point, ...]
    P: HassePolynomial
    G: HassePolynomial
    components: tuple[HasseComponent, ...]


def _g_pairs(poly: Polytope, piece: FacetPiece) -> list[tuple[Point, Point]]:
    pts, _ = parallelepiped_points(_vertex_cone(piece))
    sub = open_facial_subdivision(poly)
    return [(r, s) for r in pts for s in pts if delta_order(sub, r, s) in ("ge", "eq")]


def _vertex_cone(piece: FacetPiece):
    """The cone generated by the piece vertices themselves (scalings 1)."""
    from .lattice import SimplexCone

    return SimplexCone(tuple(sorted(piece.vertices)), (1,) * len(piece.vertices))


def _local_pieces(poly: Polytope, gens: Sequence[Point], p: int, cap: int,
                  reduce: Callable[[QPoly], QPoly] | None = None,
                  levels: Iterable[int] | None = None) -> list[HasseComponent]:
    """Minimal nonzero graded pieces of the facet blocks and of the G entries.

    ``reduce`` (specialization and reduction) is applied before testing a
    piece for vanishing, so the minimal index refers to the reduced piece.
    """
    ctx = weight_census(poly)
    reduce = reduce or (lambda q: q)
    N_delta = ctx.N
    out = []
    for piece in facet_pieces(poly, gens):
        for k in (range(1, ctx.k_index + 1) if levels is None else levels):
            idx = piece_index(poly, piece, k)
            if len(idx) > cap:
                raise HasseError(f"block of size {len(idx)} exceeds the cap {cap}")
            extra = N_delta
            while True:
                entries = [[_graded_entry(poly, gens, p, r, s, extra) for s in idx] for r in idx]
                det = graded_determinant(entries, extra, len(gens))
                found = None
                for m in sorted(det):
                    q = reduce(det[m])
                    if q:
                        found = (m, q)
                        break
                if found or extra >= N_delta * len(idx):
                    break
                extra = N_delta * len(idx)
            if not found:
                raise HasseError(f"no nonzero graded piece for block k = {k} at p = {p}")
            out.append(HasseComponent("P", piece, (k,), found[0], found[1]))
        for r, s in _g_pairs(poly, piece):
            if not piece.contains(tuple(p * a - b for a, b in zip(r, s))):
                continue
            graded = _graded_entry(poly, gens, p, r, s, N_delta)
            found = None
            for x in sorted(graded):
                q = reduce(graded[x])
                if q:
                    found = (x, q)
                    break
            if found:
                out.append(HasseComponent("G", piece, (r, s), found[0], found[1]))
    return out


def _product(variables, comps: Iterable[HasseComponent], kind: str, provenance: str) -> HassePolynomial:
    acc: QPoly = {(0,) * len(variables): Fraction(1)}
    for c in comps:
        if c.kind == kind:
            acc = _pmul(acc, c.poly)
    return HassePolynomial(tuple(variables), acc, provenance)


def hasse_local(poly: Polytope, J: Iterable[Sequence[int]], p: int, k: int | None = None,
                cap: int = 8) -> LocalHasse:
    """P_{A^J,p} and G_{A^J,p} as products of minimal graded pieces.

    All levels 1..k_Delta enter P unless a single level k is requested.
    """
    gens = tuple(sorted(set(tuple(j) for j in J), key=lambda g: (poly.weight(g), g)))
    comps = _local_pieces(poly, gens, p, cap, levels=None if k is None else [k])
    return LocalHasse(p, gens, _product(gens, comps, "P", f"local({p})"),
                      _product(gens, comps, "G", f"local({p})"), tuple(comps))


def _specialize_mod(q: QPoly, variables: Sequence[Point], fixed: dict, p: int,
                    keep: Sequence[Point]) -> QPoly:
    """Set fixed variables to rationals and reduce mod p; returns integer coeffs."""
    pos = {v: i for i, v in enumerate(variables)}
    out: dict = {}
    for e, c in q.items():
        val = rational_mod(Fraction(c), p)
        for v, x in fixed.items():
            val = val * pow(rational_mod(Fraction(x), p), e[pos[v]], p) % p
        key = tuple(e[pos[v]] for v in keep)
        out[key] = (out.get(key, 0) + val) % p
    return {e: c for e, c in out.items() if c}


def _monic(q: dict, p: int) -> dict:
    lead = max(q, key=glex_key)
    inv = pow(q[lead], -1, p)
    return {e: c * inv % p for e, c in q.items()}


def _reconstruct(reductions: dict[int, dict]) -> dict:
    """One rational polynomial reducing to every given (monic) reduction."""
    supports = {frozenset(q) for q in reductions.values()}
    if len(supports) != 1:
        raise HasseError("reductions have different monomial supports")
    support = next(iter(supports))
    out = {}
    for e in support:
        r, m = 0, 1
        for p, q in reductions.items():
            r, m = crt_pair(r, m, q[e], p)
        x = rational_reconstruction(r, m)
        if x is None:
            raise HasseError(f"coefficient of {e} has no small rational lift modulo {m}")
        out[e] = x
    for p, q in reductions.items():
        for e, x in out.items():
            if x.denominator % p == 0 or rational_mod(x, p) != q[e]:
                raise HasseError(f"lift disagrees with the reduction at p = {p}")
    return out


@dataclass(frozen=True)
class GlobalHasse:
    P: HassePolynomial
    G: HassePolynomial
    classes: dict  # residue -> {label: polynomial}
    primes: dict


def _classify_primes(poly: Polytope, primes: Iterable[int]) -> dict[tuple, list[int]]:
    pieces = facet_pieces(poly)
    out: dict[tuple, list[int]] = {}
    for p in primes:
        if poly.denominator % p == 0 or any(d % p == 0 for piece in pieces for d in piece.cone.scalings):
            continue
        key = tuple(piece.residue(p) for piece in pieces)
        out.setdefault(key, []).append(p)
    return out


def _component_key(c: HasseComponent) -> tuple:
    return (c.kind, c.piece.vertices, c.label)


def _p_independent(poly, gens, keep, primes_by_class, cap, reducer_for, provenance):
    """Per residue class: reduce local pieces at each prime, lift to Q, check agreement."""
    classes = {}
    for residue, plist in sorted(primes_by_class.items()):
        if len(plist) < 2:
            raise HasseError(f"residue class {residue} needs two representative primes")
        per_prime = {}
        for p in plist:
            comps = _local_pieces(poly, gens, p, cap, reducer_for(p))
            per_prime[p] = {_component_key(c): (c.order, _monic(c.poly, p)) for c in comps}
        keys = {frozenset(d) for d in per_prime.values()}
        if len(keys) != 1:
            raise HasseError(f"components differ across primes in class {residue}")
        lifted = {}
        for key in next(iter(keys)):
            orders = {per_prime[p][key][0] for p in plist}
            if len(orders) != 1:
                raise HasseError(f"minimal index of {key} depends on p in class {residue}")
            lifted[key] = _reconstruct({p: per_prime[p][key][1] for p in plist})
        classes[residue] = lifted
    P: QPoly = {(0,) * len(keep): Fraction(1)}
    G: QPoly = {(0,) * len(keep): Fraction(1)}
    for lifted in classes.values():
        for key, q in lifted.items():
            if key[0] == "P":
                P = _pmul(P, q)
            else:
                G = _pmul(G, q)
    return (HassePolynomial(tuple(keep), P, provenance), HassePolynomial(tuple(keep), G, provenance),
            classes)


def hasse_global(poly: Polytope, J: Iterable[Sequence[int]], V: Iterable[Sequence[int]],
                 coeffs_V: dict, primes: Iterable[int], cap: int = 8) -> GlobalHasse:
    """P_{A_V^J} and G_{A_V^J}: local pieces specialized at V, reduced, lifted to Q.

    Each reduction is made monic before lifting (canonical rescaling), so
    the factors are determined up to nonzero constants.
    """
    J = tuple(sorted(set(tuple(j) for j in J)))
    V = tuple(sorted(set(tuple(v) for v in V)))
    if set(J) & set(V):
        raise HasseError("J and V must be disjoint")
    verts = set(poly.vertices) - {(0,) * poly.dim}
    if not verts <= set(V):
        raise HasseError("V must contain every nonzero vertex")
    for f in poly.originless_facets:
        if any(j in set(poly.facet_points(f)) for j in J):
            raise HasseError("J meets an origin-less facet")
    coeffs = {tuple(v): Fraction(c) for v, c in coeffs_V.items()}
    if set(coeffs) != set(V) or any(coeffs[v] == 0 for v in verts):
        raise HasseError("coefficients must be given on V and be nonzero at vertices")
    gens = tuple(sorted(set(J) | set(V), key=lambda g: (poly.weight(g), g)))

    def reducer_for(p):
        return lambda q: _specialize_mod(q, gens, coeffs, p, J)

    by_class = _classify_primes(poly, primes)
    P, G, classes = _p_independent(poly, gens, J, by_class, cap, reducer_for, "global")
    return GlobalHasse(P, G, classes, by_class)


def _reduce_mod(p: int) -> Callable[[QPoly], dict]:
    def reduce(q: QPoly) -> dict:
        out = {e: rational_mod(Fraction(c), p) for e, c in q.items()}
        return {e: c for e, c in out.items() if c}
    return reduce


def _reduce_vertex_exponents(q: QPoly, variables: Sequence[Point], vertex_pos: Sequence[int],
                             p: int, D: int, keep_p: int) -> dict:
    """u -> (k1 + k2) / D where u D = p k1 + k2 with k1 nearest to u D / p."""
    out: dict = {}
    for e, c in q.items():
        new = list(Fraction(x) for x in e)
        for i in vertex_pos:
            uD = e[i] * D
            k1 = (2 * uD + p) // (2 * p)
            k2 = uD - p * k1
            new[i] = Fraction(k1 + k2, D)
        key = tuple(new)
        out[key] = (out.get(key, 0) + rational_mod(Fraction(c), keep_p)) % keep_p
    return {e: c for e, c in out.items() if c}


def vertex_norm(q: QPoly, variables: Sequence[Point], vertex_pos: Sequence[int], D: int) -> QPoly:
    """Product of the distinct conjugates under y -> zeta y, y = A_v^(1/D), per vertex v.

    Exponents are carried in units of 1/D. For each vertex variable the
    polynomial is y^s P(y^g) with g | D, its m = D / g distinct conjugates
    multiply to y^(s m) Res_w(w^m - 1, P(w z)) with z = y^g, which is a
    polynomial in z^m = A_v. When m = 1 the map is the identity. Overall
    constants (roots of unity) are dropped.
    """
    import sympy

    nv = len(variables)
    units = {tuple(int(Fraction(x) * D) for x in e): Fraction(c) for e, c in q.items()}
    for i in vertex_pos:
        shift = min(e[i] for e in units)
        g = math.gcd(D, *(e[i] - shift for e in units))
        m = D // g
        if m == 1:
            continue
        syms = sympy.symbols(f"a0:{nv}")
        z, w = sympy.symbols("z w")
        lows = [min(e[j] for e in units) for j in range(nv)]
        expr = 0
        for e, c in units.items():
            term = sympy.Rational(c.numerator, c.denominator) * (w * z) ** ((e[i] - shift) // g)
            for j in range(nv):
                if j != i:
                    term *= syms[j] ** (e[j] - lows[j])
            expr += term
        res = sympy.Poly(sympy.resultant(w ** m - 1, sympy.expand(expr), w), z, *syms)
        out: dict = {}
        for mono, c in res.terms():
            if mono[0] % m:
                raise AssertionError("norm is not invariant under the conjugation")
            e = [0] * nv
            e[i] = mono[0] * g + shift * m
            for j in range(nv):
                if j != i:
                    e[j] = mono[1 + j] + lows[j] * m
            c = sympy.Rational(c)
            out[tuple(e)] = Fraction(int(c.p), int(c.q))
        units = out
    return _strip_monomial({tuple(Fraction(x, D) for x in e): c for e, c in units.items()})


def _strip_monomial(q: QPoly) -> QPoly:
    """Divide by the largest monomial dividing every term (exponents may be negative)."""
    if not q:
        return q
    low = [min(e[i] for e in q) for i in range(len(next(iter(q))))]
    return {tuple(x - l for x, l in zip(e, low)): c for e, c in q.items()}


@dataclass(frozen=True)
class StarHasse:
    P: HassePolynomial
    classes: dict
    primes: dict


def hasse_star(poly: Polytope, J: Iterable[Sequence[int]], primes: Iterable[int],
               cap: int = 8) -> StarHasse:
    """P*_{A^J}: vertex exponents reduced, norm on vertex variables, lifted to Q.

    A vertex exponent u is split as u D = p k1 + k2 with k1 nearest to
    u D / p, which recovers the p-independent split only once p exceeds
    twice the bounded part; small primes give mismatched supports and a
    HasseError. Monomial factors are stripped, since P* is only used to
    test non-vanishing at points with nonzero vertex coefficients.
    """
    gens = tuple(sorted(set(tuple(j) for j in J), key=lambda g: (poly.weight(g), g)))
    verts = set(poly.vertices) - {(0,) * poly.dim}
    if not verts <= set(gens):
        raise HasseError("J must contain every nonzero vertex")
    if any(j not in verts and poly.weight(j) >= 1 for j in gens):
        raise HasseError("J must lie in the interior of Delta or at its vertices")
    D = poly.denominator
    vpos = [i for i, g in enumerate(gens) if g in verts]
    by_class = _classify_primes(poly, primes)
    classes = {}
    total: QPoly = {(0,) * len(gens): Fraction(1)}
    for residue, plist in sorted(by_class.items()):
        if len(plist) < 2:
            raise HasseError(f"residue class {residue} needs two representative primes")
        per_prime = {}
        for p in plist:
            comps = _local_pieces(poly, gens, p, cap, _reduce_mod(p))
            per_prime[p] = {_component_key(c): _monic(
                _reduce_vertex_exponents(c.poly, gens, vpos, p, D, p), p)
                for c in comps if c.kind == "P"}
        keys = {frozenset(d) for d in per_prime.values()}
        if len(keys) != 1:
            raise HasseError(f"components differ across primes in class {residue}")
        lifted = {}
        for key in next(iter(keys)):
            q = _reconstruct({p: per_prime[p][key] for p in plist})
            normed = vertex_norm(q, gens, vpos, D)
            lifted[key] = normed
            total = _pmul(total, normed)
        classes[residue] = lifted
    return StarHasse(HassePolynomial(gens, total, "star"), classes, by_class)

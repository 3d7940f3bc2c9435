"""Exponential sums over finite fields by direct enumeration.

This is the oracle path: S_m(f) = sum over the torus of zeta_p^Tr(f(x)) is
computed exactly in Z[zeta_p], the L-function L*(f, T) is assembled from
S_1..S_V by Newton's identities, and its Newton polygon read off with the
exact valuation on Z[zeta_p].

Torus points are enumerated through discrete logarithms: with g a primitive
element of F_{q^m} and x = (g^k1, ..., g^kn), Tr(c x^j) is a table lookup at
log(c) + j.k, so no field arithmetic is needed for the plain sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from .ffield import (
    CyclotomicInteger,
    FiniteField,
    FieldTables,
    embed,
    make_field,
    norm_poly,
    ord_pi,
    poly_gcd,
    rational_mod,
)
from .lattice import (
    Point,
    Polytope,
    build_polytope,
    lattice_basis_of_span,
    newton_polytope,
    normalized_volume,
    rank,
    solve,
)
from .parallel import ordered_map
from .polygon import NewtonPolygon, compare, hodge_polygon, lower_hull, toric_hodge_numbers

DEFAULT_BUDGET = 5 * 10 ** 7
CHUNK = 1 << 18


class BudgetExceeded(RuntimeError):
    pass


class IrregularError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Laurent polynomials over F_q


@dataclass(frozen=True)
class LaurentPoly:
    """Sparse Laurent polynomial with coefficients stored as field codes."""

    field: FiniteField
    terms: tuple[tuple[Point, int], ...]

    @staticmethod
    def make(F: FiniteField, coeffs: dict) -> "LaurentPoly":
        terms = tuple(sorted((tuple(int(x) for x in j), int(c) % F.q if F.a == 1 else int(c))
                             for j, c in coeffs.items()))
        terms = tuple((j, c) for j, c in terms if c != 0)
        if not terms:
            raise ValueError("zero polynomial")
        n = len(terms[0][0])
        if any(len(j) != n for j, _ in terms):
            raise ValueError("exponents of mixed dimension")
        return LaurentPoly(F, terms)

    @staticmethod
    def from_rational(coeffs: dict, p: int, a: int = 1) -> "LaurentPoly":
        """Reduce a polynomial with rational coefficients modulo p."""
        F = make_field(p, a)
        out = {}
        for j, c in coeffs.items():
            c = Fraction(c)
            if c.denominator % p == 0:
                raise ValueError(f"coefficient {c} is not p-integral at p = {p}")
            out[tuple(j)] = rational_mod(c, p)
        return LaurentPoly.make(F, out)

    @property
    def n(self) -> int:
        return len(self.terms[0][0])

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def support(self) -> tuple[Point, ...]:
        return tuple(j for j, _ in self.terms)

    def coeff(self, j: Sequence[int]) -> int:
        return dict(self.terms).get(tuple(j), 0)

    @cached_property
    def polytope(self) -> Polytope:
        """Hull of the support together with the origin."""
        return newton_polytope(self.support)

    @cached_property
    def support_hull(self) -> Polytope:
        return build_polytope(self.support)

    def restrict(self, keep) -> "LaurentPoly":
        return LaurentPoly(self.field, tuple((j, c) for j, c in self.terms if keep(j)))

    def lift_toric(self) -> "LaurentPoly":
        """x_{n+1} f as a polynomial in n + 1 variables."""
        return LaurentPoly(self.field, tuple((j + (1,), c) for j, c in self.terms))

    def to_json(self) -> dict:
        return {"p": self.p, "a": self.field.a, "modulus": list(self.field.modulus),
                "terms": [[list(j), c] for j, c in self.terms]}

    def __str__(self) -> str:
        parts = []
        for j, c in self.terms:
            mono = "*".join(f"x{i + 1}^{e}" for i, e in enumerate(j) if e)
            parts.append(f"{c}*{mono}" if mono else str(c))
        return " + ".join(parts) + f" over F_{self.field.q}"


def newton_polytope_of(f: LaurentPoly) -> Polytope:
    return f.polytope


# ---------------------------------------------------------------------------
# evaluation machinery in an extension field


@dataclass(frozen=True, eq=False)
class Extension:
    """F_{q^m} tables together with the embedding of the base field."""

    base: FiniteField
    m: int
    big: FiniteField
    tables: FieldTables
    basis: tuple[int, ...]

    @property
    def Q(self) -> int:
        return self.big.q

    @property
    def order(self) -> int:
        return self.big.q - 1

    @cached_property
    def trace_by_log(self) -> np.ndarray:
        return self.tables.trace[self.tables.exp]

    def lift(self, code: int) -> int:
        if self.base.a == 1:
            return code
        total = 0
        for d, b in zip(self.base.digits(code), self.basis):
            if d:
                total = self.big.add(total, self.big.mul(d, b))
        return total

    def log_of(self, code: int) -> int:
        c = self.lift(code)
        if c == 0:
            raise ValueError("zero coefficient")
        return int(self.tables.log[c])


@lru_cache(maxsize=64)
def extension(base: FiniteField, m: int) -> Extension:
    big = make_field(base.p, base.a * m)
    basis = tuple(embed(base, big))
    return Extension(base, m, big, big.tables, basis)


def _term_arrays(ext: Extension, terms) -> tuple[np.ndarray, np.ndarray]:
    n = len(terms[0][0]) if terms else 0
    terms = [(j, c) for j, c in terms if c != 0]
    J = np.array([j for j, _ in terms], dtype=np.int64).reshape(-1, n)
    lc = np.array([ext.log_of(c) for _, c in terms], dtype=np.int64)
    return J, lc


def _torus_chunks(order: int, d: int, chunk: int = CHUNK) -> list[tuple[int, int]]:
    total = order ** d
    return [(s, min(total, s + chunk)) for s in range(0, total, chunk)]


def _grid(order: int, d: int, start: int, stop: int) -> np.ndarray:
    if d == 0:
        return np.zeros((stop - start, 0), dtype=np.int64)
    idx = np.arange(start, stop, dtype=np.int64)
    return np.stack(np.unravel_index(idx, (order,) * d), axis=1).astype(np.int64)


def _values(ext: Extension, J: np.ndarray, lc: np.ndarray, K: np.ndarray) -> np.ndarray:
    """Field codes of sum_t c_t x^{J_t} at the torus points g^K."""
    T = ext.tables
    if len(lc) == 0:
        return np.zeros(len(K), dtype=np.int64)
    logs = (lc[None, :] + K @ J.T) % ext.order
    digits = T.digit_array[T.exp[logs]].sum(axis=1) % ext.big.p
    return digits @ T.powers


def _traces(ext: Extension, J: np.ndarray, lc: np.ndarray, K: np.ndarray) -> np.ndarray:
    if len(lc) == 0:
        return np.zeros(len(K), dtype=np.int64)
    logs = (lc[None, :] + K @ J.T) % ext.order
    return ext.trace_by_log[logs].sum(axis=1) % ext.big.p


def _hist(values: np.ndarray, p: int) -> np.ndarray:
    return np.bincount(values, minlength=p).astype(object)


def _cyc(p: int, hist) -> CyclotomicInteger:
    return CyclotomicInteger.from_exponent_counts(p, [int(x) for x in hist])


# ---------------------------------------------------------------------------
# exponential sums


def exp_sum(f: LaurentPoly, m: int, budget: int = DEFAULT_BUDGET,
            method: str = "auto") -> CyclotomicInteger:
    """S_m(f) = sum over (F_{q^m}^*)^n of zeta_p^Tr(f(x)), exactly.

    ``method`` is "brute", "fiber" or "auto"; the fiber route sums over one
    variable in closed form when f is at most quadratic in it.
    """
    ext = extension(f.field, m)
    n, p = f.n, f.p
    fiber = _choose_fiber(f) if method in ("auto", "fiber") and n >= 2 else None
    if method == "fiber" and fiber is None:
        raise ValueError("no variable of degree <= 2 available for the fiber route")
    if fiber is None:
        cost = ext.order ** n
        if cost > budget:
            raise BudgetExceeded(f"torus of size {cost} exceeds budget {budget}")
        J, lc = _term_arrays(ext, f.terms)

        def part(rng):
            K = _grid(ext.order, n, *rng)
            return np.bincount(_traces(ext, J, lc, K), minlength=p)

        hist = sum(ordered_map(part, _torus_chunks(ext.order, n)))
        return _cyc(p, hist)
    cost = ext.order ** (n - 1)
    if cost > budget:
        raise BudgetExceeded(f"fiber torus of size {cost} exceeds budget {budget}")
    return _fiber_sum(f, ext, *fiber)


def _choose_fiber(f: LaurentPoly) -> tuple[int, int, int] | None:
    """(variable, sign, degree) of a variable in which f is linear or quadratic."""
    best = None
    for t in range(f.n):
        exps = {j[t] for j in f.support}
        for sign in (1, -1):
            if all(0 <= sign * e <= 2 for e in exps):
                deg = max(sign * e for e in exps)
                if deg == 2 and f.p == 2:
                    continue
                if best is None or deg < best[2]:
                    best = (t, sign, deg)
    return best


def _fiber_sum(f: LaurentPoly, ext: Extension, t: int, sign: int, deg: int) -> CyclotomicInteger:
    """Sum over y in the torus in closed form, then enumerate the other variables.

    Write f = A + B y + C y^2 with A, B, C in the remaining variables.
    Linear: sum_{y != 0} psi(A + B y) = psi(A) (Q [B = 0] - 1).
    Quadratic (p odd), with G = sum_{y in F} psi(y^2) and eta the quadratic
    character: sum_{y != 0} = eta(C) G psi(A - B^2/4C) when C != 0, and
    Q [B = 0] psi(A) when C = 0, minus the y = 0 term psi(A) in both cases.
    """
    p, Q, T = f.p, ext.Q, ext.tables
    parts: dict[int, list] = {0: [], 1: [], 2: []}
    for j, c in f.terms:
        e = sign * j[t]
        parts[e].append((j[:t] + j[t + 1:], c))
    d = f.n - 1
    arrays = {e: _term_arrays(ext, parts[e]) if parts[e] else None for e in parts}

    def evaluate(e, K):
        if arrays[e] is None:
            return np.zeros(len(K), dtype=np.int64)
        return _values(ext, arrays[e][0], arrays[e][1], K)

    def part(rng):
        K = _grid(ext.order, d, *rng)
        A, B = evaluate(0, K), evaluate(1, K)
        trA = T.trace[A]
        h_all = np.bincount(trA, minlength=p)
        if deg <= 1:
            h_b0 = np.bincount(trA[B == 0], minlength=p)
            return h_all, h_b0, None, None
        C = evaluate(2, K)
        zero_c = C == 0
        h_b0 = np.bincount(trA[zero_c & (B == 0)], minlength=p)
        nz = ~zero_c
        four_c = T.mul(np.full(nz.sum(), 4 % p, dtype=np.int64), C[nz])
        shift = T.mul(T.mul(B[nz], B[nz]), T.inv(four_c))
        E = T.add(A[nz], T.neg(shift))
        trE = T.trace[E]
        square = T.log[C[nz]] % 2 == 0
        h_plus = np.bincount(trE[square], minlength=p)
        h_minus = np.bincount(trE[~square], minlength=p)
        return h_all, h_b0, h_plus, h_minus

    results = ordered_map(part, _torus_chunks(ext.order, d))
    h_all = sum(r[0] for r in results)
    h_b0 = sum(r[1] for r in results)
    total = _cyc(p, h_b0) * Q - _cyc(p, h_all)
    if deg == 2:
        h_plus = sum(r[2] for r in results)
        h_minus = sum(r[3] for r in results)
        total = total + gauss_sum(ext) * (_cyc(p, h_plus) - _cyc(p, h_minus))
    return total


@lru_cache(maxsize=64)
def _gauss_cached(ext: Extension) -> CyclotomicInteger:
    p = ext.big.p
    k = np.arange(ext.order, dtype=np.int64)
    hist = np.bincount(ext.trace_by_log[(2 * k) % ext.order], minlength=p)
    hist[0] += 1  # y = 0
    return _cyc(p, hist)


def gauss_sum(ext: Extension) -> CyclotomicInteger:
    """sum over y in F_{q^m} of zeta_p^Tr(y^2)."""
    return _gauss_cached(ext)


# ---------------------------------------------------------------------------
# regularity


@dataclass(frozen=True)
class Regularity:
    regular: bool
    exact: bool
    searched_degree: int
    face: tuple[Point, ...] | None = None
    witness: object = None

    @property
    def status(self) -> str:
        if not self.regular:
            return "irregular"
        if self.exact:
            return "regular"
        return f"regular up to degree {self.searched_degree}"


def _coords_in_basis(basis: Sequence[Point], v: Sequence[int]) -> tuple[int, ...]:
    """Integer coordinates of v in a lattice basis (v must lie in its span)."""
    k = len(basis)
    if k == 0:
        return ()
    n = len(v)
    rows = list(range(n))
    # choose k independent coordinate rows
    chosen: list[int] = []
    for r in rows:
        trial = chosen + [r]
        if rank([[basis[l][i] for l in range(k)] for i in trial]) == len(trial):
            chosen = trial
        if len(chosen) == k:
            break
    sol = solve([[basis[l][i] for l in range(k)] for i in chosen], [v[i] for i in chosen])
    if any(x.denominator != 1 for x in sol):
        raise AssertionError("point is not in the lattice")
    if any(sum(sol[l] * basis[l][i] for l in range(k)) != v[i] for i in range(n)):
        raise AssertionError("point is not in the span")
    return tuple(int(x) for x in sol)


def _row_reduce_mod(rows: list[list[int]], p: int) -> list[list[int]]:
    m = [[x % p for x in r] for r in rows]
    out, col = [], 0
    ncols = len(m[0]) if m else 0
    for col in range(ncols):
        piv = next((i for i, r in enumerate(m) if r[col] != 0), None)
        if piv is None:
            continue
        r = m.pop(piv)
        inv = pow(r[col], -1, p)
        r = [x * inv % p for x in r]
        m = [[(a - b * row[col]) % p for a, b in zip(row, r)] for row in m]
        out = [[(a - b * o[col]) % p for a, b in zip(o, r)] for o in out]
        out.append(r)
    return out


def face_system(f: LaurentPoly, face_points: Sequence[Point], toric: bool):
    """Condition polynomials in saturated face coordinates z.

    Returns a list of term lists [(e, code)], one per independent linear
    combination of g, z_1 dg/dz_1, ..., z_k dg/dz_k that must vanish, and k.
    """
    F = f.field
    p = f.p
    terms = [(j, c) for j, c in f.terms if j in set(face_points)]
    j0 = terms[0][0]
    diffs = [tuple(a - b for a, b in zip(j, j0)) for j, _ in terms]
    E = lattice_basis_of_span([d for d in diffs if any(d)], f.n)
    k = len(E)
    coords = [_coords_in_basis(E, d) for d in diffs]
    M = [[j0[i]] + [E[l][i] for l in range(k)] for i in range(f.n)]
    if toric:
        M.append([1] + [0] * k)
    R = _row_reduce_mod(M, p)
    systems = []
    for rho in R:
        poly = []
        for (j, c), e in zip(terms, coords):
            s = (rho[0] + sum(rho[l + 1] * e[l] for l in range(k))) % p
            if s:
                poly.append((e, F.mul(c, s) if F.a > 1 else c * s % p))
        systems.append(poly)
    return systems, k


def is_regular(f: LaurentPoly, toric: bool = False, m_max: int = 3,
               budget: int = 2 * 10 ** 6) -> Regularity:
    """Check that no face system has a common zero on the torus.

    Plain variant: faces of Delta(f) not containing the origin, with the
    system of partial derivatives of f restricted to the face. Toric variant:
    every face of the support hull, with f_face added to the system. Over a
    prime field every face is decided exactly (a Groebner basis of the system
    plus w*z_1*...*z_k - 1 is [1] iff there is no torus zero over the algebraic
    closure). Over F_{p^a}, a > 1, faces of dimension >= 2 are searched over
    F_{q^m} for m <= m_max and the result is reported as partial.
    """
    if toric:
        hull = f.support_hull
        faces = hull.faces
    else:
        hull = f.polytope
        faces = hull.originless_faces
    exact, searched = True, m_max
    for ids in faces:
        pts = [j for j in f.support if hull.face_contains(ids, j)]
        systems, k = face_system(f, pts, toric)
        live = [s for s in systems if s]
        face = tuple(hull.vertices[i] for i in sorted(ids))
        if not live:
            return Regularity(False, True, 0, face, "system vanishes identically")
        if k == 0:
            continue
        if k == 1:
            g = _univariate_gcd(f.field, live)
            if len(g) > 1:
                return Regularity(False, True, 0, face, tuple(g))
            continue
        if f.field.a == 1:
            basis = _torus_ideal_basis(live, k, f.p)
            if basis is not None:
                return Regularity(False, True, 0, face, basis)
            continue
        found, deg = _search_zero(f.field, live, k, m_max, budget)
        if found is not None:
            return Regularity(False, True, deg, face, found)
        exact = False
        searched = min(searched, deg)
    return Regularity(True, exact, 0 if exact else searched)


def _univariate_gcd(F: FiniteField, systems) -> list[int]:
    """gcd over F_q of the condition polynomials, with powers of z removed."""
    polys = []
    for terms in systems:
        lo = min(e[0] for e, _ in terms)
        hi = max(e[0] for e, _ in terms)
        coeffs = [0] * (hi - lo + 1)
        for e, c in terms:
            coeffs[e[0] - lo] = c
        polys.append(coeffs)
    if F.a == 1:
        g = polys[0]
        for h in polys[1:]:
            g = poly_gcd(g, h, F.p)
        g = poly_gcd(g, g, F.p)
    else:
        g = polys[0]
        for h in polys[1:]:
            g = _gcd_ext(F, g, h)
        g = _gcd_ext(F, g, [0])
    while len(g) > 1 and g[0] == 0:
        g = g[1:]
    return g


def _gcd_ext(F: FiniteField, f: list[int], g: list[int]) -> list[int]:
    def trim(h):
        h = list(h)
        while h and h[-1] == 0:
            h.pop()
        return h

    f, g = trim(f), trim(g)
    while g:
        inv = F.inv(g[-1])
        r = list(f)
        while len(r) >= len(g) and r:
            c = F.mul(r[-1], inv)
            shift = len(r) - len(g)
            for i, gc in enumerate(g):
                r[shift + i] = F.add(r[shift + i], F.neg(F.mul(c, gc)))
            r = trim(r)
        f, g = g, r
    if f:
        inv = F.inv(f[-1])
        f = [F.mul(c, inv) for c in f]
    return f


def _torus_ideal_basis(systems, k: int, p: int):
    """Reduced Groebner basis over F_p of the system saturated by the torus, or None if it is [1]."""
    import sympy

    zs = sympy.symbols(f"z0:{k}")
    w = sympy.Symbol("w")
    exprs = []
    for terms in systems:
        lows = [min(e[l] for e, _ in terms) for l in range(k)]
        expr = 0
        for e, c in terms:
            mono = 1
            for l in range(k):
                mono *= zs[l] ** (e[l] - lows[l])
            expr += int(c) * mono
        exprs.append(expr)
    exprs.append(w * sympy.Mul(*zs) - 1)
    G = sympy.groebner(exprs, *zs, w, modulus=p, order="grevlex")
    if list(G.exprs) == [1]:
        return None
    return tuple(str(g) for g in G.exprs)


def _search_zero(F: FiniteField, systems, k: int, m_max: int, budget: int):
    """Search (F_{q^m}^*)^k for a common zero; returns (point or None, degree reached)."""
    reached = 0
    for m in range(1, m_max + 1):
        ext = extension(F, m)
        if ext.order ** k > budget:
            break
        arrays = [_term_arrays(ext, s) for s in systems]
        for start, stop in _torus_chunks(ext.order, k):
            K = _grid(ext.order, k, start, stop)
            zero = np.ones(len(K), dtype=bool)
            for J, lc in arrays:
                zero &= _values(ext, J, lc, K) == 0
            if zero.any():
                idx = int(np.argmax(zero))
                pt = tuple(int(ext.tables.exp[x]) for x in K[idx])
                return (m, pt), m
        reached = m
    return None, reached


# ---------------------------------------------------------------------------
# L-functions and Newton polygons


@dataclass(frozen=True)
class LPolynomial:
    """L*(f, T)^((-1)^(n-1)) with coefficients in Z[zeta_p]."""

    coeffs: tuple[CyclotomicInteger, ...]
    sums: tuple[CyclotomicInteger, ...]
    p: int
    a: int
    n: int

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def valuations(self) -> list:
        return [ord_pi(c, self.a) for c in self.coeffs]

    def newton_polygon(self) -> NewtonPolygon:
        return lower_hull(enumerate(self.valuations()))

    def to_json(self) -> dict:
        return {"p": self.p, "a": self.a, "n": self.n,
                "S": [c.to_list() for c in self.sums],
                "L": [c.to_list() for c in self.coeffs]}


def power_series_from_sums(sums: Sequence[CyclotomicInteger], sign: int,
                           length: int) -> list[CyclotomicInteger]:
    """Coefficients of exp(sign * sum S_m T^m / m) up to T^(length-1).

    Newton's identities i c_i = sum_m sign S_m c_{i-m}; each division by i
    must be exact, which is the integrality check.
    """
    p = sums[0].p
    c = [CyclotomicInteger.integer(p, 1)]
    for i in range(1, length):
        acc = CyclotomicInteger.integer(p, 0)
        for m in range(1, i + 1):
            acc = acc + sums[m - 1] * c[i - m]
        acc = acc * sign
        if any(x % i for x in acc.coeffs):
            raise AssertionError(f"coefficient {i} is not integral")
        c.append(CyclotomicInteger(p, tuple(x // i for x in acc.coeffs)))
    return c


def l_polynomial(f: LaurentPoly, check_regular: bool = True, extra: int = 0,
                 budget: int = DEFAULT_BUDGET, degree: int | None = None) -> LPolynomial:
    """L*(f, T)^((-1)^(n-1)) from S_1..S_V, V = n! Vol(Delta(f)).

    With ``extra`` > 0 the sums S_{V+1}.. are also computed and the matching
    coefficients are checked to vanish.
    """
    if check_regular:
        reg = is_regular(f)
        if not reg.regular:
            raise IrregularError(f"f is irregular on face {reg.face}")
    V = degree if degree is not None else normalized_volume(f.polytope)
    sums = tuple(exp_sum(f, m, budget) for m in range(1, V + extra + 1))
    sign = (-1) ** (f.n - 1)
    coeffs = power_series_from_sums(sums, sign, V + extra + 1)
    if any(not c.is_zero() for c in coeffs[V + 1:]):
        raise AssertionError("L-function has degree above V")
    if coeffs[V].is_zero() and check_regular:
        raise AssertionError("L-function has degree below V for a regular f")
    return LPolynomial(tuple(coeffs[: V + 1]), sums[:V], f.p, f.field.a, f.n)


def np_of_f(f: LaurentPoly | LPolynomial, **kw) -> NewtonPolygon:
    L = f if isinstance(f, LPolynomial) else l_polynomial(f, **kw)
    return L.newton_polygon()


# ---------------------------------------------------------------------------
# families and sampling


@dataclass(frozen=True)
class Family:
    """Coefficient space for sampling.

    kind "full": every lattice point of Delta except the origin, vertex
    coefficients nonzero. kind "toric": every lattice point of Delta (origin
    included when present). kind "AJV": free coefficients on J and fixed
    rational coefficients on V.
    """

    poly: Polytope
    kind: str = "full"
    J: tuple[Point, ...] = ()
    V: tuple[tuple[Point, Fraction], ...] = ()

    @cached_property
    def points(self) -> tuple[Point, ...]:
        if self.kind == "AJV":
            return tuple(sorted(set(self.J)))
        pts = self.poly.lattice_points()
        if self.kind == "full":
            pts = [j for j in pts if any(j)]
        return tuple(pts)

    @cached_property
    def vertex_set(self) -> frozenset[Point]:
        return frozenset(v for v in self.poly.vertices if any(v) or self.kind == "toric")

    def hodge(self) -> NewtonPolygon:
        if self.kind == "toric":
            return toric_hodge_numbers(self.poly).polygon
        return hodge_polygon(self.poly)

    def sample(self, F: FiniteField, rng: np.random.Generator) -> LaurentPoly:
        coeffs = {}
        for j in self.points:
            if j in self.vertex_set:
                coeffs[j] = int(rng.integers(1, F.q))
            else:
                coeffs[j] = int(rng.integers(0, F.q))
        if self.kind == "AJV":
            if F.a != 1:
                raise ValueError("fixed rational coefficients need a prime field")
            for j, c in self.V:
                val = rational_mod(Fraction(c), F.p)
                if val == 0:
                    raise ValueError(f"fixed coefficient at {j} vanishes mod {F.p}")
                coeffs[j] = val
        return LaurentPoly.make(F, coeffs)


def family_rng(seed: int, p: int, a: int) -> np.random.Generator:
    return np.random.default_rng([seed, p, a])


@dataclass
class GNPResult:
    polygon: NewtonPolygon
    hodge: NewtonPolygon
    attained: int
    samples: int
    attempts: int
    seed: int
    polygons: list[NewtonPolygon] = field(default_factory=list)

    @property
    def ordinary(self) -> bool:
        return self.polygon == self.hodge


def pointwise_min(polys: Sequence[NewtonPolygon]) -> NewtonPolygon:
    length = polys[0].length
    pts = [(x, min(P.value_at(x) for P in polys)) for x in range(length + 1)]
    return lower_hull(pts)


def sample_np(family: Family, f: LaurentPoly, budget: int = DEFAULT_BUDGET) -> NewtonPolygon:
    if family.kind == "toric":
        return toric_key_polynomial(f, check_regular=False, budget=budget).newton_polygon
    return np_of_f(f, check_regular=False, budget=budget)


def gnp_estimate(family: Family, p: int, a: int = 1, trials: int = 100, seed: int = 0,
                 budget: int = DEFAULT_BUDGET, max_attempts: int | None = None) -> GNPResult:
    """Pointwise infimum of NP over ``trials`` regular samples.

    Each sample is checked to lie above the Hodge polygon with the same
    endpoint; a violation raises AssertionError.
    """
    F = make_field(p, a)
    rng = family_rng(seed, p, a)
    hp = family.hodge()
    toric = family.kind == "toric"
    polys, attempts = [], 0
    max_attempts = max_attempts or 20 * trials + 20
    while len(polys) < trials and attempts < max_attempts:
        attempts += 1
        f = family.sample(F, rng)
        if not is_regular(f, toric=toric).regular:
            continue
        P = sample_np(family, f, budget)
        cmp = compare(P, hp)
        if not (cmp.lies_above and cmp.endpoints_meet):
            raise AssertionError(f"NP {P} of {f} is not above HP {hp}")
        polys.append(P)
    if not polys:
        raise ValueError("no regular sample found")
    gnp = pointwise_min(polys)
    attained = sum(P == gnp for P in polys)
    return GNPResult(gnp, hp, attained, len(polys), attempts, seed, polys)


# ---------------------------------------------------------------------------
# Artin-Schreier covers and toric hypersurfaces


def _series_mul(a: Sequence[int], b: Sequence[int], length: int) -> list[int]:
    out = [0] * length
    for i, x in enumerate(a[:length]):
        if x:
            for j, y in enumerate(b[: length - i]):
                out[i + j] += x * y
    return out


def _series_inv(a: Sequence[int], length: int) -> list[int]:
    if a[0] != 1:
        raise ValueError("constant term must be 1")
    out = [1] + [0] * (length - 1)
    for i in range(1, length):
        out[i] = -sum(a[k] * out[i - k] for k in range(1, min(i, len(a) - 1) + 1))
    return out


def _series_pow(a: Sequence[int], e: int, length: int) -> list[int]:
    base = list(a[:length]) + [0] * max(0, length - len(a))
    if e < 0:
        base, e = _series_inv(base, length), -e
    out = [1] + [0] * (length - 1)
    for _ in range(e):
        out = _series_mul(out, base, length)
    return out


def zeta_from_counts(counts: Sequence[int]) -> list[Fraction]:
    """exp(sum N_m T^m / m) up to T^len(counts)."""
    c = [Fraction(1)]
    for i in range(1, len(counts) + 1):
        c.append(sum(counts[m - 1] * c[i - m] for m in range(1, i + 1)) / Fraction(i))
    return c


@dataclass
class ArtinSchreierZeta:
    counts: list[int]
    zeta_series: list[Fraction]
    norm_poly: list[int]
    norm_exponent: int
    trivial_factors: dict[int, int]
    expected_series: list[int]
    closed_form_ratio: dict[int, int]
    newton_polygon: NewtonPolygon
    np_f: NewtonPolygon


def point_counts(f: LaurentPoly, M: int, budget: int = DEFAULT_BUDGET) -> list[int]:
    """#{(x, y) in torus x F_{q^m} : y^p - y = f(x)} for m = 1..M, counted literally."""
    out = []
    for m in range(1, M + 1):
        ext = extension(f.field, m)
        T = ext.tables
        if ext.order ** f.n > budget:
            raise BudgetExceeded(f"torus of size {ext.order ** f.n} exceeds budget")
        ys = np.arange(ext.Q, dtype=np.int64)
        yp = np.where(ys == 0, 0, T.exp[(T.log[ys] * f.p) % ext.order])
        preimages = np.bincount(T.add(yp, T.neg(ys)), minlength=ext.Q)
        J, lc = _term_arrays(ext, f.terms)
        total = 0
        for start, stop in _torus_chunks(ext.order, f.n):
            K = _grid(ext.order, f.n, start, stop)
            total += int(preimages[_values(ext, J, lc, K)].sum())
        out.append(total)
    return out


def artin_schreier_zeta(f: LaurentPoly, M: int | None = None,
                        budget: int = DEFAULT_BUDGET) -> ArtinSchreierZeta:
    """Zeta of y^p - y = f(x) over the torus, from point counts.

    Splitting the count over additive characters gives
    N_m = (q^m - 1)^n + sum_j sigma_j(S_m), hence
    Zeta = Norm(L*(f, T)) * prod_i (1 - q^i T)^((-1)^(n-i+1) C(n, i)).
    The counts fix the first M coefficients of that product (checked); the
    Newton polygon of the Norm factor, shrunk horizontally by p - 1, is
    checked against NP(f).
    """
    if not is_regular(f).regular:
        raise IrregularError("f is not regular")
    L = l_polynomial(f, check_regular=False, budget=budget)
    n, p, q = f.n, f.p, f.field.q
    if M is None:
        M = 1
        while M < 2 * L.degree and extension(f.field, M + 1).order ** n <= budget // 4:
            M += 1
    counts = point_counts(f, M, budget)
    series = zeta_from_counts(counts)
    normP = norm_poly(list(L.coeffs))
    sign = (-1) ** (n - 1)
    length = M + 1
    expected = _series_pow(normP, sign, length)
    trivial = {i: (-1) ** (n - i + 1) * math.comb(n, i) for i in range(n + 1)}
    for i, e in trivial.items():
        expected = _series_mul(expected, _series_pow([1, -(q ** i)], e, length), length)
    if [Fraction(x) for x in expected] != series:
        raise AssertionError(f"zeta from counts {series} differs from {expected}")
    vals = [ord_pi(CyclotomicInteger.integer(p, c), f.field.a) for c in normP]
    np_norm = lower_hull(enumerate(vals))
    if any(x % (p - 1) for x, _ in np_norm.vertices):
        raise AssertionError("Norm polygon breaks off multiples of p - 1")
    shrunk = NewtonPolygon(tuple((x // (p - 1), y / (p - 1)) for x, y in np_norm.vertices))
    np_f = L.newton_polygon()
    if shrunk != np_f:
        raise AssertionError("NP of the cover differs from NP(f)")
    # ratio of the count-based zeta to Norm(L*) / ((1 - T)(1 - q^n T)),
    # as exponents e_i of (1 - q^i T)^e_i
    ratio = dict(trivial)
    ratio[0] += 1
    ratio[n] += 1
    ratio = {i: e for i, e in ratio.items() if e}
    return ArtinSchreierZeta(counts, series, normP, sign, trivial, expected, ratio,
                             shrunk, np_f)


@dataclass(frozen=True)
class ToricKey:
    key_poly: tuple[int, ...]
    lifted_L: tuple[int, ...]
    newton_polygon: NewtonPolygon


def toric_key_polynomial(f: LaurentPoly, check_regular: bool = True,
                         budget: int = DEFAULT_BUDGET) -> ToricKey:
    """P_f with L*(x_{n+1} f; T)^((-1)^n) = P_f(qT)(1 - T).

    The returned polygon is NP of L*(x_{n+1} f)^((-1)^n), which is the
    Newton polygon attached to the hypersurface f = 0 in the torus.
    """
    if check_regular and not is_regular(f, toric=True).regular:
        raise IrregularError("hypersurface is not regular")
    g = f.lift_toric()
    L = l_polynomial(g, check_regular=False, budget=budget)
    if not all(c.is_rational() for c in L.coeffs):
        raise AssertionError("toric L-function is not rational")
    R = [c.coeffs[0] for c in L.coeffs]
    # divide by (1 - T): partial sums, which must end in zero
    partial, acc = [], 0
    for c in R:
        acc += c
        partial.append(acc)
    if partial[-1] != 0:
        raise AssertionError("L*(x f) is not divisible by 1 - T")
    b = partial[:-1]
    q = f.field.q
    key = []
    for i, c in enumerate(b):
        if c % q ** i:
            raise AssertionError("P_f(qT) coefficients not divisible by q^i")
        key.append(c // q ** i)
    return ToricKey(tuple(key), tuple(R), L.newton_polygon())

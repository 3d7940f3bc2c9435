"""Finite fields, exact cyclotomic integers Z[zeta_p] and p-adic helpers.

Elements of F_{p^a} are stored as integer codes: the base-p digits of a code,
little-endian, are the coefficients of the element on 1, x, ..., x^(a-1)
where x is a root of the field modulus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    return all(n % d for d in range(3, math.isqrt(n) + 1, 2))


def prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def vp(x: int, p: int) -> float | int:
    """p-adic valuation of an integer (inf for 0)."""
    if x == 0:
        return math.inf
    k = 0
    while x % p == 0:
        x //= p
        k += 1
    return k


def vp_fraction(x: Fraction, p: int) -> float | int:
    x = Fraction(x)
    if x == 0:
        return math.inf
    return vp(x.numerator, p) - vp(x.denominator, p)


# ---------------------------------------------------------------------------
# polynomials over F_p, little-endian coefficient lists


def _trim(f: list[int]) -> list[int]:
    while f and f[-1] == 0:
        f.pop()
    return f


def poly_mod(f: Sequence[int], g: Sequence[int], p: int) -> list[int]:
    f = _trim([c % p for c in f])
    g = _trim([c % p for c in g])
    inv = pow(g[-1], -1, p)
    while len(f) >= len(g):
        c = f[-1] * inv % p
        shift = len(f) - len(g)
        for i, gc in enumerate(g):
            f[shift + i] = (f[shift + i] - c * gc) % p
        _trim(f)
    return f


def poly_mul(f: Sequence[int], g: Sequence[int], p: int) -> list[int]:
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] = (out[i + j] + a * b) % p
    return _trim(out)


def poly_powmod(f: Sequence[int], e: int, m: Sequence[int], p: int) -> list[int]:
    result, base = [1], poly_mod(f, m, p)
    while e:
        if e & 1:
            result = poly_mod(poly_mul(result, base, p), m, p)
        base = poly_mod(poly_mul(base, base, p), m, p)
        e >>= 1
    return result


def poly_gcd(f: Sequence[int], g: Sequence[int], p: int) -> list[int]:
    f, g = _trim([c % p for c in f]), _trim([c % p for c in g])
    while g:
        f, g = g, poly_mod(f, g, p)
    if f:
        inv = pow(f[-1], -1, p)
        f = [c * inv % p for c in f]
    return f


def poly_sub(f: Sequence[int], g: Sequence[int], p: int) -> list[int]:
    n = max(len(f), len(g))
    return _trim([((f[i] if i < len(f) else 0) - (g[i] if i < len(g) else 0)) % p
                  for i in range(n)])


def is_irreducible(f: Sequence[int], p: int) -> bool:
    """Ben-Or test: gcd(x^(p^i) - x, f) = 1 for i <= deg/2."""
    f = _trim([c % p for c in f])
    deg = len(f) - 1
    if deg < 1:
        return False
    if deg == 1:
        return True
    xp = [0, 1]
    for _ in range(deg // 2):
        xp = poly_powmod(xp, p, f, p)
        if len(poly_gcd(f, poly_sub(xp, [0, 1], p), p)) > 1:
            return False
    return True


def is_primitive(f: Sequence[int], p: int) -> bool:
    """x generates the multiplicative group of F_p[x]/(f)."""
    deg = len(f) - 1
    order = p ** deg - 1
    if deg == 1:
        root = -f[0] * pow(f[1], -1, p) % p
        return root != 0 and all(pow(root, order // r, p) != 1 for r in prime_factors(order))
    return all(poly_powmod([0, 1], order // r, f, p) != [1] for r in prime_factors(order))


# ---------------------------------------------------------------------------
# finite fields


class FieldError(ValueError):
    pass


@dataclass(frozen=True)
class FiniteField:
    p: int
    a: int
    modulus: tuple[int, ...]  # monic, little-endian, length a + 1

    @property
    def q(self) -> int:
        return self.p ** self.a

    def digits(self, code: int) -> list[int]:
        out = []
        for _ in range(self.a):
            code, d = divmod(code, self.p)
            out.append(d)
        return out

    def code(self, digits: Sequence[int]) -> int:
        return sum((d % self.p) * self.p ** i for i, d in enumerate(digits))

    def add(self, u: int, v: int) -> int:
        return self.code([x + y for x, y in zip(self.digits(u), self.digits(v))])

    def neg(self, u: int) -> int:
        return self.code([-x for x in self.digits(u)])

    def mul(self, u: int, v: int) -> int:
        prod = poly_mul(self.digits(u), self.digits(v), self.p)
        return self.code(poly_mod(prod, self.modulus, self.p) + [0] * self.a)

    def pow(self, u: int, e: int) -> int:
        if self.a == 1:
            return pow(u, e, self.p)
        res = poly_powmod(self.digits(u), e, self.modulus, self.p)
        return self.code(res + [0] * self.a)

    def inv(self, u: int) -> int:
        if u == 0:
            raise ZeroDivisionError("inverse of 0")
        return self.pow(u, self.q - 2)

    def frobenius(self, u: int) -> int:
        return self.pow(u, self.p)

    def trace(self, u: int) -> int:
        """Absolute trace to F_p."""
        total, y = 0, u
        for _ in range(self.a):
            total = self.add(total, y)
            y = self.frobenius(y)
        if total >= self.p:
            raise AssertionError("trace left the prime field")
        return total

    def partial_trace(self, u: int, d: int) -> int:
        """Trace from F_{p^a} down to its subfield F_{p^d} (d divides a)."""
        if self.a % d:
            raise FieldError(f"{d} does not divide {self.a}")
        total, y = 0, u
        for _ in range(self.a // d):
            total = self.add(total, y)
            y = self.pow(y, self.p ** d)
        return total

    def elements(self) -> range:
        return range(self.q)

    @cached_property
    def tables(self) -> "FieldTables":
        return FieldTables.build(self)


def make_field(p: int, a: int = 1, modulus: Sequence[int] | None = None,
               primitive: bool = False) -> FiniteField:
    """F_{p^a} with the smallest (by little-endian code) irreducible modulus.

    With ``primitive=True`` the smallest primitive modulus is used instead, so
    the class of x generates the multiplicative group.
    """
    if not is_prime(p):
        raise FieldError(f"{p} is not prime")
    if a < 1:
        raise FieldError("extension degree must be positive")
    if modulus is not None:
        mod = tuple(c % p for c in modulus)
        if len(mod) != a + 1 or mod[-1] != 1 or not is_irreducible(mod, p):
            raise FieldError(f"modulus {tuple(modulus)} is not monic irreducible of degree {a}")
        return FiniteField(p, a, mod)
    return _default_field(p, a, primitive)


@lru_cache(maxsize=None)
def _default_field(p: int, a: int, primitive: bool) -> FiniteField:
    for code in range(p ** a):
        low = [(code // p ** i) % p for i in range(a)]
        mod = tuple(low) + (1,)
        if primitive:
            if is_irreducible(mod, p) and is_primitive(mod, p):
                return FiniteField(p, a, mod)
        elif is_irreducible(mod, p):
            return FiniteField(p, a, mod)
    raise AssertionError("no modulus found")


@dataclass(frozen=True)
class FieldTables:
    """Log/antilog/trace tables for a field with a primitive generator g.

    ``exp[k]`` is the code of g^k, ``log[c]`` its inverse (``log[0] = -1``),
    ``trace[c]`` the absolute trace of code c and ``digit_array`` the (q, a)
    digit matrix used for vectorised addition.
    """

    field: FiniteField
    generator: int
    exp: np.ndarray
    log: np.ndarray
    trace: np.ndarray
    digit_array: np.ndarray

    @staticmethod
    def build(F: FiniteField) -> "FieldTables":
        q, p, a = F.q, F.p, F.a
        order = q - 1
        gen = next(g for g in range(1, q) if _is_generator(F, g, order))
        exp = np.zeros(order, dtype=np.int64)
        log = np.full(q, -1, dtype=np.int64)
        mult = _mul_by_table(F, gen)
        c = 1
        for k in range(order):
            exp[k] = c
            log[c] = k
            c = mult(c)
        if (log[1:] < 0).any():
            raise AssertionError("generator is not primitive")
        codes = np.arange(q, dtype=np.int64)
        digit_array = np.stack([(codes // p ** i) % p for i in range(a)], axis=1)
        basis_traces = np.array([F.trace(p ** i) for i in range(a)], dtype=np.int64)
        trace = digit_array @ basis_traces % p
        return FieldTables(F, gen, exp, log, trace, digit_array)

    @cached_property
    def powers(self) -> np.ndarray:
        return np.array([self.field.p ** i for i in range(self.field.a)], dtype=np.int64)

    def add(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        d = (self.digit_array[u] + self.digit_array[v]) % self.field.p
        return d @ self.powers

    def neg(self, u: np.ndarray) -> np.ndarray:
        d = (-self.digit_array[u]) % self.field.p
        return d @ self.powers

    def mul(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        u, v = np.asarray(u), np.asarray(v)
        out = self.exp[(self.log[u] + self.log[v]) % (self.field.q - 1)]
        return np.where((u == 0) | (v == 0), 0, out)

    def inv(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u)
        if (u == 0).any():
            raise ZeroDivisionError("inverse of 0")
        return self.exp[(-self.log[u]) % (self.field.q - 1)]


def _is_generator(F: FiniteField, g: int, order: int) -> bool:
    return all(F.pow(g, order // r) != 1 for r in prime_factors(order))


def _mul_by_table(F: FiniteField, g: int):
    """Multiplication by the fixed element g as a fast closure."""
    if F.a == 1:
        return lambda c: c * g % F.p
    p, a = F.p, F.a
    # images of the basis elements x^i under multiplication by g
    images = [F.digits(F.mul(p ** i, g)) for i in range(a)]

    def mult(c: int) -> int:
        d = F.digits(c)
        out = [0] * a
        for i, di in enumerate(d):
            if di:
                img = images[i]
                for k in range(a):
                    out[k] += di * img[k]
        return sum((x % p) * p ** k for k, x in enumerate(out))

    return mult


def embed(small: FiniteField, big: FiniteField) -> list[int]:
    """Images in ``big`` of the basis 1, x, ..., x^(a-1) of ``small``.

    Uses the smallest root (by code) of the small modulus in the big field;
    any choice gives a field embedding.
    """
    if small.p != big.p or big.a % small.a:
        raise FieldError("no embedding between these fields")
    if small.a == 1:
        return [1]
    root = None
    for c in range(1, big.q):
        val, power = 0, 1
        for coeff in small.modulus:
            val = big.add(val, big.mul(coeff % big.p, power))
            power = big.mul(power, c)
        if val == 0:
            root = c
            break
    if root is None:
        raise AssertionError("small modulus has no root in the big field")
    out, power = [], 1
    for _ in range(small.a):
        out.append(power)
        power = big.mul(power, root)
    return out


def embed_element(u: int, small: FiniteField, big: FiniteField, basis=None) -> int:
    basis = basis or embed(small, big)
    total = 0
    for d, b in zip(small.digits(u), basis):
        if d:
            total = big.add(total, big.mul(d, b))
    return total


# ---------------------------------------------------------------------------
# cyclotomic integers


@dataclass(frozen=True)
class CyclotomicInteger:
    """Element of Z[zeta_p] on the basis 1, zeta, ..., zeta^(p-2)."""

    p: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.p - 1:
            raise ValueError("need p - 1 coefficients")

    @staticmethod
    def from_exponent_counts(p: int, counts: Sequence[int]) -> "CyclotomicInteger":
        """Sum of counts[r] * zeta^r for r = 0..p-1, reduced."""
        top = int(counts[p - 1]) if len(counts) >= p else 0
        return CyclotomicInteger(p, tuple(int(counts[r]) - top for r in range(p - 1)))

    @staticmethod
    def integer(p: int, n: int) -> "CyclotomicInteger":
        return CyclotomicInteger(p, (int(n),) + (0,) * (p - 2))

    @staticmethod
    def zeta(p: int, k: int = 1) -> "CyclotomicInteger":
        counts = [0] * p
        counts[k % p] = 1
        return CyclotomicInteger.from_exponent_counts(p, counts)

    def _check(self, other: "CyclotomicInteger") -> None:
        if self.p != other.p:
            raise ValueError("mixed primes")

    def __add__(self, other):
        if isinstance(other, int):
            other = CyclotomicInteger.integer(self.p, other)
        self._check(other)
        return CyclotomicInteger(self.p, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicInteger(self.p, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return CyclotomicInteger(self.p, tuple(other * a for a in self.coeffs))
        self._check(other)
        p = self.p
        full = [0] * p
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        full[(i + j) % p] += a * b
        return CyclotomicInteger.from_exponent_counts(p, full)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def conjugate(self, j: int) -> "CyclotomicInteger":
        """Image under zeta -> zeta^j (j coprime to p)."""
        if j % self.p == 0:
            raise ValueError("j must be coprime to p")
        full = [0] * self.p
        for i, a in enumerate(self.coeffs):
            full[i * j % self.p] += a
        return CyclotomicInteger.from_exponent_counts(self.p, full)

    def norm(self) -> int:
        return norm_to_Q(self)

    def ord_p(self) -> Fraction | float:
        return ord_pi(self)

    def to_list(self) -> list[int]:
        return list(self.coeffs)


def ord_pi(c: CyclotomicInteger, a: int = 1) -> Fraction | float:
    """Valuation normalised by ord(p) = 1, divided by a for ord_q with q = p^a.

    Rewrites c on the basis (zeta - 1)^k, k < p - 1; since (zeta - 1)^(p-1) is
    p times a unit, each term has valuation ord_p(b_k) + k/(p-1) and these are
    pairwise distinct, so the minimum is exact.
    """
    p = c.p
    if c.is_zero():
        return math.inf
    b = [sum(c.coeffs[i] * math.comb(i, k) for i in range(k, p - 1)) for k in range(p - 1)]
    cands = [Fraction(vp(bk, p) * (p - 1) + k, p - 1) for k, bk in enumerate(b) if bk]
    fracs = [x - math.floor(x) for x in cands]
    if len(set(fracs)) != len(fracs):
        raise AssertionError("valuation candidates collide")
    return min(cands) / a


def norm_to_Q(c: CyclotomicInteger) -> int:
    prod = CyclotomicInteger.integer(c.p, 1)
    for j in range(1, c.p):
        prod = prod * c.conjugate(j)
    if not prod.is_rational():
        raise AssertionError("norm is not rational")
    return prod.coeffs[0]


def cyclo_poly_mul(f: Sequence[CyclotomicInteger], g: Sequence[CyclotomicInteger],
                   p: int) -> list[CyclotomicInteger]:
    zero = CyclotomicInteger.integer(p, 0)
    out = [zero] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a.is_zero():
            continue
        for j, b in enumerate(g):
            out[i + j] = out[i + j] + a * b
    return out


def norm_poly(coeffs: Sequence[CyclotomicInteger]) -> list[int]:
    """Norm of a polynomial with cyclotomic coefficients: product of conjugates."""
    p = coeffs[0].p
    prod = [CyclotomicInteger.integer(p, 1)]
    for j in range(1, p):
        prod = cyclo_poly_mul(prod, [c.conjugate(j) for c in coeffs], p)
    if not all(c.is_rational() for c in prod):
        raise AssertionError("norm polynomial is not rational")
    return [c.coeffs[0] for c in prod]


# ---------------------------------------------------------------------------
# p-adic integers


def teichmuller(a: int, p: int, N: int) -> int:
    """The lift of a mod p fixed by x -> x^p, modulo p^N."""
    a %= p
    if a == 0:
        return 0
    mod = p ** N
    x = a
    while True:
        y = pow(x, p, mod)
        if y == x:
            return x
        x = y


def teichmuller_all(p: int, N: int) -> list[int]:
    return [teichmuller(a, p, N) for a in range(p)]


def rational_mod(x: Fraction, m: int) -> int:
    """Image of a rational with denominator coprime to m in Z/m."""
    x = Fraction(x)
    return x.numerator * pow(x.denominator, -1, m) % m


def crt_pair(r1: int, m1: int, r2: int, m2: int) -> tuple[int, int]:
    g = math.gcd(m1, m2)
    if g != 1:
        raise ValueError("moduli must be coprime")
    t = (r2 - r1) * pow(m1, -1, m2) % m2
    return r1 + m1 * t, m1 * m2


def rational_reconstruction(r: int, m: int) -> Fraction | None:
    """Wang's algorithm: the fraction n/d with |n|, d <= sqrt(m/2) and n = r d mod m."""
    bound = math.isqrt(m // 2)
    r0, r1 = m, r % m
    s0, s1 = 0, 1
    while r1 > bound:
        qq = r0 // r1
        r0, r1 = r1, r0 - qq * r1
        s0, s1 = s1, s0 - qq * s1
    if s1 == 0 or abs(s1) > bound or math.gcd(r1, abs(s1)) != 1:
        return None
    return Fraction(r1, s1)


"""Exact arithmetic in GF(q^2) for odd prime powers q = p^e.

GF(q^2) is modelled as GF(p)[x] / (m(x)) with deg m = 2e, and GF(q) is
recovered as the fixed field of the Frobenius x -> x^q.  Elements are plain
ints: the element with coefficient vector (c_0, ..., c_{2e-1}) in the power
basis 1, x, x^2, ... has index ``sum(c_i * p**i)``.  Enumeration order is
ascending index, and every downstream point/line index depends on it.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

# Largest q^2 for which full operation tables are built.
MAX_FIELD_ORDER = 1024


class FieldError(ValueError):
    pass


class EvenCharacteristic(FieldError):
    pass


class NotPrime(FieldError):
    pass


class FieldTooLarge(FieldError):
    pass


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin; exact for n < 3.3e24."""
    if n < 2:
        return False
    for b in _MR_BASES:
        if n % b == 0:
            return n == b
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for b in _MR_BASES:
        x = pow(b, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def is_prime_power(n: int) -> tuple[int, int] | None:
    """(p, e) with n = p^e and p prime, or None."""
    if n < 2:
        return None
    if is_prime(n):
        return (n, 1)
    p = 2
    while n % p:
        p += 1 if p == 2 else 2
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return (p, e) if n == 1 else None


# --- polynomials over GF(p), little-endian coefficient lists -------------

def _poly_trim(f: list[int]) -> list[int]:
    while f and f[-1] == 0:
        f.pop()
    return f


def _poly_mod(f: Sequence[int], g: Sequence[int], p: int) -> list[int]:
    f = _poly_trim(list(f))
    g = _poly_trim(list(g))
    inv_lead = pow(g[-1], -1, p)
    dg = len(g) - 1
    while len(f) - 1 >= dg and f:
        coef = (f[-1] * inv_lead) % p
        shift = len(f) - 1 - dg
        for i, gi in enumerate(g):
            f[shift + i] = (f[shift + i] - coef * gi) % p
        _poly_trim(f)
    return f


def _poly_mulmod(f: Sequence[int], g: Sequence[int], m: Sequence[int], p: int) -> list[int]:
    if not f or not g:
        return []
    prod = [0] * (len(f) + len(g) - 1)
    for i, fi in enumerate(f):
        if fi:
            for j, gj in enumerate(g):
                prod[i + j] = (prod[i + j] + fi * gj) % p
    return _poly_mod(prod, m, p)


def _monic_polys(degree: int, p: int) -> Iterable[list[int]]:
    """Monic polynomials of the given degree, lower coefficients in index order."""
    for code in range(p ** degree):
        coeffs = []
        for _ in range(degree):
            coeffs.append(code % p)
            code //= p
        yield coeffs + [1]


def poly_is_irreducible(f: Sequence[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree <= deg(f)/2."""
    f = _poly_trim(list(f))
    n = len(f) - 1
    if n < 1:
        return False
    for d in range(1, n // 2 + 1):
        for g in _monic_polys(d, p):
            if not _poly_mod(f, g, p):
                return False
    return True


def lowest_irreducible(degree: int, p: int) -> tuple[int, ...]:
    for f in _monic_polys(degree, p):
        if poly_is_irreducible(f, p):
            return tuple(f)
    raise FieldError(f"no irreducible polynomial of degree {degree} over GF({p})")


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


class FieldCtx:
    """GF(q) inside GF(q^2), q = p^e odd.

    All operations act on element indices and go through lookup tables built
    once at construction; the context is immutable afterwards.
    """

    def __init__(self, p: int, e: int):
        if e < 1:
            raise FieldError("extension degree e must be >= 1")
        if p == 2:
            raise EvenCharacteristic("q must be odd (characteristic 2 is not supported)")
        if not is_prime(p):
            raise NotPrime(f"{p} is not prime")
        self.p = p
        self.e = e
        self.q = p ** e
        self.degree = 2 * e
        self.order = self.q * self.q
        if self.order > MAX_FIELD_ORDER:
            raise FieldTooLarge(f"q^2 = {self.order} exceeds the table limit {MAX_FIELD_ORDER}")
        self.modulus = lowest_irreducible(self.degree, p)
        self._build_tables()

    # construction -----------------------------------------------------

    def _build_tables(self) -> None:
        p, n, d = self.p, self.order, self.degree
        digits = np.zeros((n, d), dtype=np.int64)
        for i in range(d):
            digits[:, i] = (np.arange(n) // p ** i) % p
        self._digits = digits
        weights = p ** np.arange(d, dtype=np.int64)

        summed = (digits[:, None, :] + digits[None, :, :]) % p
        self.add_table = (summed @ weights).astype(np.int64)
        self.neg_table = (((-digits) % p) @ weights).astype(np.int64)

        gen = self._primitive_element()
        exp = np.zeros(n - 1, dtype=np.int64)
        cur = [1]
        gen_poly = self.coeffs(gen)
        for i in range(n - 1):
            exp[i] = self._index_of(cur)
            cur = _poly_mulmod(cur, gen_poly, self.modulus, p)
        log = np.full(n, -1, dtype=np.int64)
        log[exp] = np.arange(n - 1)
        mul = np.zeros((n, n), dtype=np.int64)
        lx = log[1:]
        mul[1:, 1:] = exp[(lx[:, None] + lx[None, :]) % (n - 1)]
        self.mul_table = mul
        inv = np.zeros(n, dtype=np.int64)
        inv[1:] = exp[(-lx) % (n - 1)]
        self.inv_table = inv

        self._add = self.add_table.tolist()
        self._mul = mul.tolist()
        self._neg = self.neg_table.tolist()
        self._inv = inv.tolist()

        frob = [self.pow(x, self.q) for x in range(n)]
        self.frob_table = np.array(frob, dtype=np.int64)
        self._frob = frob
        self._trace = [self._add[x][frob[x]] for x in range(n)]
        self._norm = [self._mul[x][frob[x]] for x in range(n)]
        self.trace_table = np.array(self._trace, dtype=np.int64)
        self.norm_table = np.array(self._norm, dtype=np.int64)
        self._half_const = self._inv[self.from_int(2)]

        self._subfield = tuple(x for x in range(n) if frob[x] == x)
        rank = [-1] * n
        for i, x in enumerate(self._subfield):
            rank[x] = i
        self._subfield_rank = rank

    def _index_of(self, coeffs: Sequence[int]) -> int:
        return sum(int(c) * self.p ** i for i, c in enumerate(coeffs))

    def _primitive_element(self) -> int:
        n = self.order
        factors = _prime_factors(n - 1)
        for g in range(2, n):
            poly = self.coeffs(g)
            if all(self._poly_pow(poly, (n - 1) // f) != [1] for f in factors):
                return g
        raise FieldError("no primitive element found")

    def _poly_pow(self, base: Sequence[int], k: int) -> list[int]:
        result = [1]
        b = list(base)
        while k:
            if k & 1:
                result = _poly_mulmod(result, b, self.modulus, self.p)
            b = _poly_mulmod(b, b, self.modulus, self.p)
            k >>= 1
        return result

    # conversions ------------------------------------------------------

    def coeffs(self, x: int) -> list[int]:
        out = []
        for _ in range(self.degree):
            out.append(x % self.p)
            x //= self.p
        return out

    def from_coeffs(self, coeffs: Sequence[int]) -> int:
        if len(coeffs) > self.degree or any(not 0 <= c < self.p for c in coeffs):
            raise FieldError(f"bad coefficient vector {list(coeffs)}")
        return self._index_of(coeffs)

    def from_int(self, n: int) -> int:
        """Image of the integer n under Z -> GF(p) -> GF(q^2)."""
        return n % self.p

    def format_elem(self, x: int) -> str:
        return ",".join(str(c) for c in self.coeffs(x))

    def parse_elem(self, text: str) -> int:
        parts = [int(s) for s in text.split(",")]
        if len(parts) != self.degree:
            raise FieldError(f"expected {self.degree} coefficients, got {text!r}")
        return self.from_coeffs(parts)

    def describe(self) -> str:
        return ",".join(str(v) for v in (self.p, self.e, *self.modulus))

    # arithmetic -------------------------------------------------------

    def add(self, x: int, y: int) -> int:
        return self._add[x][y]

    def sub(self, x: int, y: int) -> int:
        return self._add[x][self._neg[y]]

    def neg(self, x: int) -> int:
        return self._neg[x]

    def mul(self, x: int, y: int) -> int:
        return self._mul[x][y]

    def inv(self, x: int) -> int:
        if x == 0:
            raise ZeroDivisionError("0 has no inverse")
        return self._inv[x]

    def div(self, x: int, y: int) -> int:
        return self._mul[x][self.inv(y)]

    def pow(self, x: int, k: int) -> int:
        if k < 0:
            x, k = self.inv(x), -k
        result = 1
        mul = self._mul
        while k:
            if k & 1:
                result = mul[result][x]
            x = mul[x][x]
            k >>= 1
        return result

    def frobenius(self, x: int) -> int:
        """x -> x^q."""
        return self._frob[x]

    def trace(self, x: int) -> int:
        """Relative trace x + x^q, an element of GF(q)."""
        return self._trace[x]

    def norm(self, x: int) -> int:
        """Relative norm x^(q+1), an element of GF(q)."""
        return self._norm[x]

    def half(self, x: int) -> int:
        return self._mul[x][self._half_const]

    def is_in_subfield(self, x: int) -> bool:
        return self._frob[x] == x

    def subfield_rank(self, x: int) -> int:
        """Position of x in the enumeration of GF(q); -1 if x is not in GF(q)."""
        return self._subfield_rank[x]

    # enumeration ------------------------------------------------------

    def elements(self) -> range:
        """GF(q^2) in canonical order."""
        return range(self.order)

    def subfield(self) -> tuple[int, ...]:
        """GF(q) in canonical order."""
        return self._subfield

    def is_irreducible_cubic(self, c2: int, c1: int, c0: int) -> bool:
        """Whether y^3 + c2 y^2 + c1 y + c0 is irreducible over GF(q^2).

        A cubic is irreducible exactly when it has no root.
        """
        add, mul = self._add, self._mul
        for y in range(self.order):
            val = add[mul[add[mul[add[y][c2]][y]][c1]][y]][c0]
            if val == 0:
                return False
        return True

    def __repr__(self) -> str:
        return f"FieldCtx(p={self.p}, e={self.e}, modulus={self.modulus})"

    def __reduce__(self):
        return (make_field, (self.p, self.e))


def make_field(p: int, e: int = 1) -> FieldCtx:
    """Cached field context for GF(p^e) inside GF(p^(2e))."""
    return _cached_field(p, e)


@lru_cache(maxsize=None)
def _cached_field(p: int, e: int) -> FieldCtx:
    return FieldCtx(p, e)


def field_of_order(q: int) -> FieldCtx:
    """Field context with subfield GF(q)."""
    pe = is_prime_power(q)
    if pe is None:
        raise NotPrime(f"q={q} is not a prime power")
    return make_field(*pe)


def parse_field(text: str) -> FieldCtx:
    """Inverse of :meth:`FieldCtx.describe`."""
    vals = [int(s) for s in text.split(",")]
    ctx = make_field(vals[0], vals[1])
    if tuple(vals[2:]) != ctx.modulus:
        raise FieldError(f"modulus {vals[2:]} does not match the canonical {ctx.modulus}")
    return ctx

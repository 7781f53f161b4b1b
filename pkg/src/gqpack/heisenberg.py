"""The Heisenberg group E of order q^5 on GF(q^2) x GF(q) x GF(q^2).

Group law::

    (a, g, b) * (a', g', b') = (a + a', g + g' + trace(b^q a'), b + b')

Elements are value triples of field indices.  The canonical index of
(a, g, b) is ``(rank(g) * q^2 + b) * q^2 + a`` where rank(g) is the position
of g in the enumeration of GF(q); so the order is gamma-major, then b, then a.
Vectorised versions of the group law work directly on index arrays.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .finite_field import FieldCtx, make_field

Element = tuple[int, int, int]


class HeisenbergGroup:
    def __init__(self, field: FieldCtx):
        self.field = field
        self.q = field.q
        n = field.order
        self.n = n
        self.order = self.q ** 5
        self.identity: Element = (0, 0, 0)

        idx = np.arange(self.order, dtype=np.int64)
        self.a_of = idx % n
        self.b_of = (idx // n) % n
        sub = np.array(field.subfield(), dtype=np.int64)
        self.gamma_of = sub[idx // (n * n)]
        self._rank = np.array([field.subfield_rank(x) for x in range(n)], dtype=np.int64)
        self._inverse_idx: np.ndarray | None = None

    # indexing ---------------------------------------------------------

    def index(self, g: Element) -> int:
        a, gamma, b = g
        r = self.field.subfield_rank(gamma)
        if r < 0:
            raise ValueError(f"gamma={gamma} is not in GF(q)")
        return (r * self.n + b) * self.n + a

    def element(self, i: int) -> Element:
        return (int(self.a_of[i]), int(self.gamma_of[i]), int(self.b_of[i]))

    def elements(self) -> list[Element]:
        return [self.element(i) for i in range(self.order)]

    def indices_of(self, a, gamma, b) -> np.ndarray:
        return (self._rank[gamma] * self.n + b) * self.n + a

    def is_valid(self, g: Element) -> bool:
        a, gamma, b = g
        n = self.n
        return 0 <= a < n and 0 <= b < n and 0 <= gamma < n and self.field.is_in_subfield(gamma)

    # group law on triples ---------------------------------------------

    def compose(self, g: Element, h: Element) -> Element:
        F = self.field
        a, gamma, b = g
        a2, gamma2, b2 = h
        twist = F.trace(F.mul(F.frobenius(b), a2))
        return (F.add(a, a2), F.add(F.add(gamma, gamma2), twist), F.add(b, b2))

    def inverse(self, g: Element) -> Element:
        F = self.field
        a, gamma, b = g
        return (F.neg(a), F.add(F.neg(gamma), F.trace(F.mul(F.frobenius(b), a))), F.neg(b))

    def commutator(self, g: Element, h: Element) -> Element:
        """g^-1 h^-1 g h."""
        gi, hi = self.inverse(g), self.inverse(h)
        return self.compose(self.compose(gi, hi), self.compose(g, h))

    def power(self, g: Element, k: int) -> Element:
        result = self.identity
        for _ in range(k):
            result = self.compose(result, g)
        return result

    # group law on index arrays ----------------------------------------

    def compose_idx(self, i, j) -> np.ndarray:
        """Broadcasting composition of index arrays."""
        F = self.field
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        a1, g1, b1 = self.a_of[i], self.gamma_of[i], self.b_of[i]
        a2, g2, b2 = self.a_of[j], self.gamma_of[j], self.b_of[j]
        twist = F.trace_table[F.mul_table[F.frob_table[b1], a2]]
        a = F.add_table[a1, a2]
        b = F.add_table[b1, b2]
        gamma = F.add_table[F.add_table[g1, g2], twist]
        return (self._rank[gamma] * self.n + b) * self.n + a

    def inverse_idx(self, i) -> np.ndarray:
        if self._inverse_idx is None:
            F = self.field
            a, g, b = self.a_of, self.gamma_of, self.b_of
            gamma = F.add_table[F.neg_table[g], F.trace_table[F.mul_table[F.frob_table[b], a]]]
            self._inverse_idx = self.indices_of(F.neg_table[a], gamma, F.neg_table[b])
        return self._inverse_idx[np.asarray(i, dtype=np.int64)]

    def cayley_table(self) -> np.ndarray:
        """Full order x order composition table; only sensible for q = 3."""
        idx = np.arange(self.order)
        return self.compose_idx(idx[:, None], idx[None, :])

    # structure --------------------------------------------------------

    def generators(self) -> list[Element]:
        """(e_i, 0, 0) and (0, 0, e_i) for the GF(p)-basis e_i of GF(q^2)."""
        basis = [self.field.p ** i for i in range(self.field.degree)]
        return [(x, 0, 0) for x in basis] + [(0, 0, x) for x in basis]

    def centre(self, exhaustive: bool | None = None) -> frozenset[Element]:
        """Elements commuting with everything.

        With ``exhaustive`` (default for q = 3) every element is tested against
        all of E; otherwise against a generating set.
        """
        if exhaustive is None:
            exhaustive = self.q == 3
        idx = np.arange(self.order)
        if exhaustive:
            others = idx
        else:
            others = np.array([self.index(g) for g in self.generators()])
        left = self.compose_idx(idx[:, None], others[None, :])
        right = self.compose_idx(others[None, :], idx[:, None])
        central = np.all(left == right, axis=1)
        return frozenset(self.element(int(i)) for i in np.flatnonzero(central))

    def expected_centre(self) -> frozenset[Element]:
        return frozenset((0, gamma, 0) for gamma in self.field.subfield())

    def format_element(self, g: Element) -> str:
        F = self.field
        return "|".join(F.format_elem(x) for x in g)

    def parse_element(self, text: str) -> Element:
        a, gamma, b = (self.field.parse_elem(s) for s in text.split("|"))
        g = (a, gamma, b)
        if not self.is_valid(g):
            raise ValueError(f"{text!r} is not an element of E")
        return g

    def __repr__(self) -> str:
        return f"HeisenbergGroup(q={self.q})"

    def __reduce__(self):
        return (heisenberg_group, (self.field.p, self.field.e))


def heisenberg_group(p: int, e: int = 1) -> HeisenbergGroup:
    """Cached group for q = p^e."""
    return _cached_group(p, e)


@lru_cache(maxsize=None)
def _cached_group(p: int, e: int) -> HeisenbergGroup:
    return HeisenbergGroup(make_field(p, e))

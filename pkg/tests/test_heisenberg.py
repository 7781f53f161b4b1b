import itertools
import pickle

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gqpack.heisenberg import heisenberg_group


def naive_compose(F, g, h):
    """Group law straight from the definition, using only field operations."""
    a, c, b = g
    a2, c2, b2 = h
    bq = F.pow(b, F.q)
    cross = F.mul(bq, a2)
    tr = F.add(cross, F.pow(cross, F.q))
    return (F.add(a, a2), F.add(F.add(c, c2), tr), F.add(b, b2))


def test_sizes(E3, E5):
    assert E3.order == 243 and len(E3.elements()) == 243
    assert E5.order == 3125


def test_index_bijection(E3, E5):
    for G in (E3, E5):
        seen = set()
        for i in range(G.order):
            g = G.element(i)
            assert G.is_valid(g)
            assert G.index(g) == i
            seen.add(g)
        assert len(seen) == G.order


def test_invalid_gamma(E3):
    i = E3.field.from_coeffs([0, 1])
    assert not E3.is_valid((0, i, 0))
    with pytest.raises(ValueError):
        E3.index((0, i, 0))


def test_compose_examples(E3):
    assert E3.compose((1, 0, 0), (0, 0, 1)) == (1, 0, 1)
    assert E3.compose((0, 0, 1), (1, 0, 0)) == (1, 2, 1)
    for g in E3.elements():
        assert E3.compose(E3.identity, g) == g
        assert E3.compose(g, E3.identity) == g
        gi = E3.inverse(g)
        assert E3.compose(g, gi) == E3.identity
        assert E3.compose(gi, g) == E3.identity


def test_compose_matches_definition_q3(E3):
    F = E3.field
    table = E3.cayley_table()
    for i, g in enumerate(E3.elements()):
        for j, h in enumerate(E3.elements()):
            want = naive_compose(F, g, h)
            assert E3.compose(g, h) == want
            assert E3.element(int(table[i, j])) == want


def test_associativity_exhaustive_q3(E3):
    T = E3.cayley_table()
    idx = np.arange(E3.order)
    for a in range(E3.order):
        left = T[T[a][:, None], idx[None, :]]       # (a b) c
        right = T[a][T]                             # a (b c)
        assert np.array_equal(left, right)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_associativity_sampled(p):
    G = heisenberg_group(p)
    rng = np.random.default_rng(1)
    g, h, k = rng.integers(0, G.order, size=(3, 100_000))
    assert np.array_equal(G.compose_idx(G.compose_idx(g, h), k), G.compose_idx(g, G.compose_idx(h, k)))
    assert np.all(G.compose_idx(g, G.inverse_idx(g)) == 0)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([3, 5]), st.data())
def test_scalar_and_array_paths_agree(p, data):
    G = heisenberg_group(p)
    i = data.draw(st.integers(0, G.order - 1))
    j = data.draw(st.integers(0, G.order - 1))
    g, h = G.element(i), G.element(j)
    assert G.element(int(G.compose_idx(i, j))) == G.compose(g, h) == naive_compose(G.field, g, h)
    assert G.element(int(G.inverse_idx(i))) == G.inverse(g)


def test_centre_q3(E3):
    Z = E3.centre()
    assert Z == E3.expected_centre()
    assert len(Z) == 3
    assert E3.centre(exhaustive=False) == Z


def test_centre_q5(E5):
    assert E5.centre(exhaustive=False) == E5.expected_centre()
    assert E5.centre(exhaustive=True) == E5.expected_centre()


def test_commutators_generate_centre_q3(E3):
    comms = {E3.commutator(g, h) for g in E3.elements() for h in E3.generators()}
    assert comms == E3.expected_centre()
    assert all(E3.commutator(g, g) == E3.identity for g in E3.elements())


def test_exponent_p_quotient(E3):
    # E is special: g^p is central
    Z = E3.expected_centre()
    for g in E3.elements():
        assert E3.power(g, 3) in Z


def test_decomposition_a0_astar_inf(E3):
    F = E3.field
    a0 = [(a, 0, 0) for a in F.elements()]
    star_inf = [(0, c, b) for c in F.subfield() for b in F.elements()]
    products = {E3.compose(x, y) for x, y in itertools.product(a0, star_inf)}
    assert len(products) == E3.order == len(a0) * len(star_inf)


def test_serialisation(E3):
    for g in E3.elements():
        assert E3.parse_element(E3.format_element(g)) == g
    assert E3.format_element((3, 1, 2)) == "0,1|1,0|2,0"
    assert pickle.loads(pickle.dumps(E3)) is E3
    with pytest.raises(ValueError):
        E3.parse_element("0,0|0,1|0,0")

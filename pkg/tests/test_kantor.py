import itertools

import numpy as np
import pytest

from gqpack.finite_field import make_field
from gqpack.heisenberg import heisenberg_group
from gqpack.kantor import (
    INF, InvalidKappa, KantorFamily, NoKappaFound, TwistParams, base_family, coset, cubic_is_irreducible,
    dump_subgroup, find_kappa, is_subgroup, kappa_cubic, kappa_is_valid, kappa_trace_failure,
    kappa_via_cubic, tau_apply, tau_map, twisted_family, twisted_subgroup, verify_k2,
    verify_kantor_axioms, verify_tau,
)
from gqpack.report import all_passed


def naive_compose(F, g, h):
    a, c, b = g
    a2, c2, b2 = h
    cross = F.mul(F.pow(b, F.q), a2)
    return (F.add(a, a2), F.add(F.add(c, c2), F.add(cross, F.pow(cross, F.q))), F.add(b, b2))


# --- base family ----------------------------------------------------------------

def test_base_family_members_q3(E3):
    F = E3.field
    fam = base_family(E3)
    assert fam.labels == [*F.subfield(), INF]
    assert {E3.element(int(i)) for i in fam.members[0]} == {(a, 0, 0) for a in F.elements()}
    assert {E3.element(int(i)) for i in fam.members[INF]} == {(0, 0, a) for a in F.elements()}
    for t in F.subfield():
        want = {(a, F.mul(F.norm(a), t), F.mul(a, t)) for a in F.elements()}
        assert {E3.element(int(i)) for i in fam.members[t]} == want


@pytest.mark.parametrize("p", [3, 5])
def test_base_family_axioms(p):
    G = heisenberg_group(p)
    reports = verify_kantor_axioms(G, base_family(G))
    assert [r.name for r in reports] == ["subgroups", "orders", "K0", "K1", "K2"]
    assert all_passed(reports), [r for r in reports if not r]


def test_k2_detects_duplicated_member(E3):
    fam = base_family(E3)
    members = dict(fam.members)
    members["dup"] = members[0]
    rep = verify_k2(E3, KantorFamily(members))
    assert not rep
    assert {rep.counterexample["i"], rep.counterexample["j"], rep.counterexample["k"]} & {0, "dup"}


def test_k1_detects_overlap(E3):
    fam = base_family(E3)
    stars = dict(fam.star_members)
    stars[INF] = np.arange(E3.order)          # contains everything
    reports = {r.name: r for r in verify_kantor_axioms(E3, KantorFamily(fam.members, stars))}
    assert not reports["K1"]
    assert not reports["orders"]


def test_is_subgroup(E3):
    assert is_subgroup(E3, base_family(E3).members[1])
    assert not is_subgroup(E3, np.array([0, 1]))
    assert not is_subgroup(E3, np.array([1, 2]))


# --- kappa ----------------------------------------------------------------------

@pytest.mark.parametrize("q", [3, 5, 7, 9, 11, 13])
def test_find_kappa(q):
    from gqpack.finite_field import field_of_order
    F = field_of_order(q)
    k = find_kappa(F)
    e = 2 * q - 1
    for a in range(1, F.order):
        assert F.trace(F.add(F.mul(k, a), F.pow(a, e))) != 0
    assert all(not kappa_is_valid(F, x) for x in range(k))
    kc = kappa_via_cubic(F)
    assert kappa_is_valid(F, kc)


def test_kappa_zero_fails_at_q3():
    F = make_field(3)
    # a = 1: trace(1) = 2 != 0, but some a has trace(a^5) = 0
    bad = kappa_trace_failure(F, 0)
    assert bad is not None and F.trace(F.pow(bad, 5)) == 0


def cubic_roots(F, kappa):
    c2, c1, c0 = kappa_cubic(F, kappa)
    out = []
    for y in range(F.order):
        y2 = F.mul(y, y)
        if F.add(F.add(F.mul(y2, y), F.mul(c2, y2)), F.add(F.mul(c1, y), c0)) == 0:
            out.append(y)
    return out


@pytest.mark.parametrize("p", [3, 5])
def test_cubic_route_inside_trace_route(p):
    F = make_field(p)
    for kappa in range(F.order):
        roots = cubic_roots(F, kappa)
        assert cubic_is_irreducible(F, kappa) == (not roots)
        if not roots:
            assert kappa_is_valid(F, kappa)
        # trace-valid exactly when no root has norm 1
        assert kappa_is_valid(F, kappa) == all(F.norm(y) != 1 for y in roots)


@pytest.mark.parametrize("p", [3, 5])
def test_trace_failure_has_norm_one_root(p):
    F = make_field(p)
    failing = [k for k in range(F.order) if not kappa_is_valid(F, k)]
    assert failing
    for kappa in failing:
        assert any(F.norm(y) == 1 for y in cubic_roots(F, kappa))
        assert not cubic_is_irreducible(F, kappa)


def test_no_kappa_after_end():
    F = make_field(3)
    with pytest.raises(NoKappaFound):
        find_kappa(F, start=F.order)
    with pytest.raises(NoKappaFound):
        kappa_via_cubic(F, start=F.order)


def test_twist_params_validation(E3, kappa3):
    F = E3.field
    with pytest.raises(InvalidKappa):
        TwistParams(F, 1, 0)
    with pytest.raises(ValueError):
        TwistParams(F, F.order, kappa3)
    TwistParams(F, 0, kappa3)


# --- tau --------------------------------------------------------------------------

def tau_by_decomposition(G, params, g):
    """tau on (a,0,0), then the fixed factor (0, gamma, b) composed on the right."""
    F = G.field
    a, gamma, b = g
    lam, kap = params.lam, params.kappa
    aq = F.pow(a, F.q)
    inner = F.add(F.add(F.mul(lam, a), F.mul(F.mul(kap, lam), aq)),
                  F.mul(F.inv(F.from_int(2)), F.mul(F.pow(lam, F.q), F.mul(a, a))))
    image_a = (a, F.add(inner, F.pow(inner, F.q)), F.mul(lam, aq))
    assert naive_compose(F, (a, 0, 0), (0, gamma, b)) == g
    return naive_compose(F, image_a, (0, gamma, b))


def test_tau_closed_form_matches_decomposition(E3, kappa3):
    F = E3.field
    for lam in F.elements():
        params = TwistParams(F, lam, kappa3)
        tm = tau_map(E3, params)
        for i, g in enumerate(E3.elements()):
            img = tau_by_decomposition(E3, params, g)
            assert tau_apply(E3, params, g) == img
            assert E3.element(int(tm[i])) == img


def test_tau_identity_at_lambda_zero(E3, kappa3):
    tm = tau_map(E3, TwistParams(E3.field, 0, kappa3))
    assert np.array_equal(tm, np.arange(E3.order))


@pytest.mark.parametrize("lam", range(9))
def test_tau_is_automorphism_q3(E3, kappa3, lam):
    params = TwistParams(E3.field, lam, kappa3)
    reports = verify_tau(E3, params)
    assert all_passed(reports), reports
    assert reports[1].stats["pairs"] == 243 ** 2


def test_tau_homomorphism_naive_q5(E5, kappa5):
    F = E5.field
    rng = np.random.default_rng(5)
    for lam in (1, 7, 24):
        params = TwistParams(F, lam, kappa5)
        for _ in range(300):
            g, h = (E5.element(int(i)) for i in rng.integers(0, E5.order, size=2))
            lhs = tau_apply(E5, params, naive_compose(F, g, h))
            rhs = naive_compose(F, tau_apply(E5, params, g), tau_apply(E5, params, h))
            assert lhs == rhs
        assert all_passed(verify_tau(E5, params, samples=20_000))


def test_verify_tau_detects_broken_map(E3, kappa3, monkeypatch):
    import gqpack.kantor as kantor
    params = TwistParams(E3.field, 1, kappa3)
    real = kantor.tau_map(E3, params)
    broken = real.copy()
    broken[[5, 6]] = broken[[6, 5]]
    monkeypatch.setattr(kantor, "tau_map", lambda g, p: broken)
    reports = {r.name: r for r in kantor.verify_tau(E3, params)}
    assert reports["tau_bijective"]
    assert not reports["tau_homomorphism"]


# --- twisted subgroups --------------------------------------------------------------

def test_twisted_subgroups_q3(E3, kappa3):
    F = E3.field
    base = base_family(E3)
    subs = {}
    for lam in F.elements():
        params = TwistParams(F, lam, kappa3)
        tm = tau_map(E3, params)
        for t in F.subfield():
            A = twisted_subgroup(E3, t, params)
            assert A.size == 9 and is_subgroup(E3, A)
            assert np.array_equal(A, np.sort(tm[base.members[t]]))
            if lam == 0:
                assert np.array_equal(A, base.members[t])
            subs[(lam, t)] = set(A.tolist())
    for (l1, t1), (l2, t2) in itertools.product(subs, repeat=2):
        if l1 != l2:
            assert subs[(l1, t1)] & subs[(l2, t2)] == {0}
    with pytest.raises(ValueError):
        twisted_subgroup(E3, 3, TwistParams(F, 0, kappa3))


@pytest.mark.parametrize("lam", range(9))
def test_twisted_family_k2_q3(E3, kappa3, lam):
    fam = twisted_family(E3, TwistParams(E3.field, lam, kappa3))
    assert len(fam.labels) == 4
    assert verify_k2(E3, fam)


def test_twisted_family_k2_q5(E5, kappa5):
    for lam in (0, 1, 13, 24):
        assert verify_k2(E5, twisted_family(E5, TwistParams(E5.field, lam, kappa5)))


def test_second_kappa_also_works(E3, kappa3):
    F = E3.field
    k2 = find_kappa(F, start=kappa3 + 1)
    assert k2 != kappa3
    for lam in (1, 4):
        params = TwistParams(F, lam, k2)
        assert all_passed(verify_tau(E3, params))
        assert verify_k2(E3, twisted_family(E3, params))


def test_coset_is_right_coset(E3, kappa3):
    A = twisted_subgroup(E3, 1, TwistParams(E3.field, 2, kappa3))
    g = 100
    c = coset(E3, A, g)
    assert c.size == 9 and g in c
    for x in c.tolist():
        # x g^-1 lies in A
        assert int(E3.compose_idx(x, E3.inverse_idx(g))) in set(A.tolist())


def test_dump_subgroup(E3, kappa3):
    params = TwistParams(E3.field, 1, kappa3)
    A = twisted_subgroup(E3, 0, params)
    text = dump_subgroup(E3, 0, params, A)
    rows = text.splitlines()
    assert rows[0] == "label=0,0 lambda=1,0 kappa=1,1"
    assert len(rows) == 10
    assert [E3.index(E3.parse_element(r)) for r in rows[1:]] == A.tolist()

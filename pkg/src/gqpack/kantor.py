"""Kantor family of the Heisenberg group and its twisted copies.

Subgroups are materialised as sorted numpy arrays of canonical element
indices.  Labels are field indices t in GF(q) plus the string ``"inf"``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .finite_field import FieldCtx
from .heisenberg import Element, HeisenbergGroup
from .report import Report

INF = "inf"
Label = Union[int, str]


class NoKappaFound(RuntimeError):
    pass


class InvalidKappa(ValueError):
    pass


@dataclass
class KantorFamily:
    members: dict[Label, np.ndarray]
    star_members: dict[Label, np.ndarray] | None = None

    @property
    def labels(self) -> list[Label]:
        return list(self.members)


def _sorted(idx) -> np.ndarray:
    return np.unique(np.asarray(idx, dtype=np.int64))


def base_family(group: HeisenbergGroup) -> KantorFamily:
    """A_t = {(a, N(a)t, at)}, A*_t = {(a, g, at)}, A_inf = {(0,0,a)}, A*_inf = {(0,g,a)}."""
    F = group.field
    a = np.arange(F.order, dtype=np.int64)
    sub = np.array(F.subfield(), dtype=np.int64)
    zeros = np.zeros_like(a)
    aa, gg = np.meshgrid(a, sub, indexing="ij")
    aa, gg = aa.ravel(), gg.ravel()

    members: dict[Label, np.ndarray] = {}
    stars: dict[Label, np.ndarray] = {}
    for t in F.subfield():
        at = F.mul_table[a, t]
        members[t] = _sorted(group.indices_of(a, F.mul_table[F.norm_table[a], t], at))
        stars[t] = _sorted(group.indices_of(aa, gg, F.mul_table[aa, t]))
    members[INF] = _sorted(group.indices_of(zeros, zeros, a))
    stars[INF] = _sorted(group.indices_of(np.zeros_like(aa), gg, aa))
    return KantorFamily(members, stars)


def is_subgroup(group: HeisenbergGroup, subset: np.ndarray) -> bool:
    subset = np.asarray(subset, dtype=np.int64)
    mask = np.zeros(group.order, dtype=bool)
    mask[subset] = True
    if not mask[0]:
        return False
    prods = group.compose_idx(subset[:, None], subset[None, :])
    return bool(mask[prods].all())


def _first_nontrivial(mask: np.ndarray, subset: np.ndarray):
    hits = subset[mask[subset]]
    hits = hits[hits != 0]
    return int(hits[0]) if hits.size else None


def verify_kantor_axioms(group: HeisenbergGroup, fam: KantorFamily) -> list[Report]:
    """Check subgroup closure, orders, and axioms K0, K1, K2.

    K0 and K1 need the starred subgroups and are skipped without them.
    Counterexamples name the labels involved and the offending element.
    """
    q = group.q
    s, t_ord = q * q, q
    labels = fam.labels
    stars = fam.star_members
    reports = []

    bad = [lab for lab in labels if not is_subgroup(group, fam.members[lab])]
    if stars is not None:
        bad += [("*", lab) for lab in stars if not is_subgroup(group, stars[lab])]
    reports.append(Report("subgroups", not bad, bad[0] if bad else None,
                          {"checked": len(labels) + (len(stars) if stars else 0)}))

    wrong = [(lab, len(fam.members[lab])) for lab in labels if len(fam.members[lab]) != s]
    if stars is not None:
        wrong += [(("*", lab), len(stars[lab])) for lab in stars if len(stars[lab]) != s * t_ord]
    reports.append(Report("orders", not wrong, wrong[0] if wrong else None))

    if stars is not None:
        cex = None
        for lab in labels:
            missing = np.setdiff1d(fam.members[lab], stars[lab])
            if missing.size:
                cex = {"label": lab, "element": group.element(int(missing[0]))}
                break
        reports.append(Report("K0", cex is None, cex))

        cex = None
        for i in labels:
            for j in labels:
                if i == j:
                    continue
                common = np.intersect1d(fam.members[i], stars[j])
                common = common[common != 0]
                if common.size:
                    cex = {"i": i, "j": j, "element": group.element(int(common[0]))}
                    break
            if cex:
                break
        reports.append(Report("K1", cex is None, cex))

    reports.append(verify_k2(group, fam))
    return reports


def verify_k2(group: HeisenbergGroup, fam: KantorFamily) -> Report:
    """A_i A_j cap A_k = {1} for pairwise distinct labels i, j, k."""
    labels = fam.labels
    checked = 0
    for i in labels:
        for j in labels:
            if i == j:
                continue
            prod = group.compose_idx(fam.members[i][:, None], fam.members[j][None, :])
            mask = np.zeros(group.order, dtype=bool)
            mask[prod.ravel()] = True
            for k in labels:
                if k == i or k == j:
                    continue
                checked += 1
                hit = _first_nontrivial(mask, fam.members[k])
                if hit is not None:
                    cex = {"i": i, "j": j, "k": k, "element": group.element(hit)}
                    return Report("K2", False, cex, {"triples": checked})
    return Report("K2", True, stats={"triples": checked})


# --- kappa ------------------------------------------------------------------

def kappa_trace_failure(F: FieldCtx, kappa: int) -> int | None:
    """First nonzero a with trace(kappa a + a^(2q-1)) = 0, else None."""
    e = 2 * F.q - 1
    for a in range(1, F.order):
        if F.trace(F.add(F.mul(kappa, a), F.pow(a, e))) == 0:
            return a
    return None


def kappa_is_valid(F: FieldCtx, kappa: int) -> bool:
    return kappa_trace_failure(F, kappa) is None


def find_kappa(F: FieldCtx, start: int = 0) -> int:
    """First kappa (in canonical order, from ``start``) passing the trace test."""
    for kappa in range(start, F.order):
        if kappa_is_valid(F, kappa):
            return kappa
    raise NoKappaFound(f"no kappa at q={F.q}")


def kappa_cubic(F: FieldCtx, kappa: int) -> tuple[int, int, int]:
    """Coefficients (c2, c1, c0) of y^3 - kappa^q y^2 + kappa y - 1."""
    return F.neg(F.frobenius(kappa)), kappa, F.neg(1)


def cubic_is_irreducible(F: FieldCtx, kappa: int) -> bool:
    return F.is_irreducible_cubic(*kappa_cubic(F, kappa))


def kappa_via_cubic(F: FieldCtx, start: int = 0) -> int:
    """First kappa whose associated cubic is irreducible over GF(q^2)."""
    for kappa in range(start, F.order):
        if cubic_is_irreducible(F, kappa):
            return kappa
    raise NoKappaFound(f"no kappa with an irreducible cubic at q={F.q}")


@dataclass(frozen=True)
class TwistParams:
    """lambda and a validated kappa for the automorphism tau_lambda."""

    field: FieldCtx = field(repr=False, compare=False)
    lam: int
    kappa: int

    def __post_init__(self):
        if not (0 <= self.lam < self.field.order and 0 <= self.kappa < self.field.order):
            raise ValueError("lambda and kappa must be elements of GF(q^2)")
        if not _kappa_ok(self.field, self.kappa):
            raise InvalidKappa(f"kappa={self.kappa} fails the trace condition at q={self.field.q}")


_valid_cache: dict[tuple[int, int, int], bool] = {}


def _kappa_ok(F: FieldCtx, kappa: int) -> bool:
    key = (F.p, F.e, kappa)
    if key not in _valid_cache:
        _valid_cache[key] = kappa_is_valid(F, kappa)
    return _valid_cache[key]


def twist_term(F: FieldCtx, params: TwistParams, a: int) -> int:
    """trace(lam a + kappa lam a^q + lam^q a^2 / 2)."""
    lam, kappa = params.lam, params.kappa
    aq = F.frobenius(a)
    x = F.add(F.mul(lam, a), F.mul(F.mul(kappa, lam), aq))
    x = F.add(x, F.half(F.mul(F.frobenius(lam), F.mul(a, a))))
    return F.trace(x)


def tau_apply(group: HeisenbergGroup, params: TwistParams, g: Element) -> Element:
    """tau_lambda(a, g, b) = (a, g + twist(a), b + lam a^q)."""
    F = group.field
    a, gamma, b = g
    return (a, F.add(gamma, twist_term(F, params, a)), F.add(b, F.mul(params.lam, F.frobenius(a))))


def _twist_arrays(F: FieldCtx, params: TwistParams, a: np.ndarray):
    lam, kappa = params.lam, params.kappa
    aq = F.frob_table[a]
    x = F.add_table[F.mul_table[lam, a], F.mul_table[F.mul(kappa, lam), aq]]
    sq = F.mul_table[a, a]
    half_lam_q = F.half(F.frobenius(lam))
    x = F.add_table[x, F.mul_table[half_lam_q, sq]]
    return F.trace_table[x], F.mul_table[lam, aq]


def tau_map(group: HeisenbergGroup, params: TwistParams) -> np.ndarray:
    """tau_lambda as an index permutation of E."""
    F = group.field
    a, gamma, b = group.a_of, group.gamma_of, group.b_of
    tw, shift = _twist_arrays(F, params, a)
    return group.indices_of(a, F.add_table[gamma, tw], F.add_table[b, shift])


def verify_tau(group: HeisenbergGroup, params: TwistParams, samples: int | None = None,
               rng: np.random.Generator | None = None, chunk: int = 256) -> list[Report]:
    """tau_lambda is a bijective homomorphism and maps A_t onto A_t^lambda.

    The homomorphism check covers all ordered pairs unless ``samples`` is given.
    """
    tm = tau_map(group, params)
    reports = [Report("tau_bijective", np.unique(tm).size == group.order,
                      stats={"image_size": int(np.unique(tm).size)})]

    cex = None
    if samples is None:
        idx = np.arange(group.order)
        checked = 0
        for start in range(0, group.order, chunk):
            g = idx[start:start + chunk, None]
            lhs = tm[group.compose_idx(g, idx[None, :])]
            rhs = group.compose_idx(tm[g], tm[idx][None, :])
            checked += lhs.size
            bad = np.argwhere(lhs != rhs)
            if bad.size:
                gi, hi = bad[0]
                cex = (group.element(int(g[gi, 0])), group.element(int(hi)))
                break
    else:
        rng = rng if rng is not None else np.random.default_rng(0)
        g = rng.integers(0, group.order, size=samples)
        h = rng.integers(0, group.order, size=samples)
        bad = np.flatnonzero(tm[group.compose_idx(g, h)] != group.compose_idx(tm[g], tm[h]))
        checked = samples
        if bad.size:
            cex = (group.element(int(g[bad[0]])), group.element(int(h[bad[0]])))
    reports.append(Report("tau_homomorphism", cex is None, cex, {"pairs": int(checked)}))

    base = base_family(group)
    cex = None
    for t in group.field.subfield():
        if not np.array_equal(np.sort(tm[base.members[t]]), twisted_subgroup(group, t, params)):
            cex = {"t": t}
            break
    reports.append(Report("tau_image_of_A_t", cex is None, cex))
    return reports


def twisted_subgroup(group: HeisenbergGroup, t: int, params: TwistParams) -> np.ndarray:
    """A_t^lambda = {(a, N(a)t + twist(a), at + lam a^q)} as sorted indices."""
    F = group.field
    if not F.is_in_subfield(t):
        raise ValueError(f"t={t} is not in GF(q)")
    a = np.arange(F.order, dtype=np.int64)
    tw, shift = _twist_arrays(F, params, a)
    gamma = F.add_table[F.mul_table[F.norm_table[a], t], tw]
    b = F.add_table[F.mul_table[a, t], shift]
    return _sorted(group.indices_of(a, gamma, b))


def twisted_family(group: HeisenbergGroup, params: TwistParams) -> KantorFamily:
    """{A_t^lambda : t in GF(q)} together with A_inf (no starred members)."""
    members: dict[Label, np.ndarray] = {
        t: twisted_subgroup(group, t, params) for t in group.field.subfield()
    }
    members[INF] = base_family_inf(group)
    return KantorFamily(members)


def base_family_inf(group: HeisenbergGroup) -> np.ndarray:
    a = np.arange(group.field.order, dtype=np.int64)
    zeros = np.zeros_like(a)
    return _sorted(group.indices_of(zeros, zeros, a))


def coset(group: HeisenbergGroup, subgroup: np.ndarray, g: int) -> np.ndarray:
    """The right coset subgroup * g, sorted."""
    return _sorted(group.compose_idx(subgroup, g))


def format_label(F: FieldCtx, label: Label) -> str:
    return INF if label == INF else F.format_elem(label)


def dump_subgroup(group: HeisenbergGroup, label: Label, params: TwistParams | None,
                  subgroup: np.ndarray) -> str:
    F = group.field
    lam = F.format_elem(params.lam) if params else F.format_elem(0)
    kappa = F.format_elem(params.kappa) if params else "-"
    lines = [f"label={format_label(F, label)} lambda={lam} kappa={kappa}"]
    lines += [group.format_element(group.element(int(i))) for i in subgroup]
    return "\n".join(lines) + "\n"

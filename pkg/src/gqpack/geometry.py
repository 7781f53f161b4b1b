"""Point-line geometries built from coset lines of the twisted subgroups.

Orders here are partial-linear-space orders: ``order_s`` is points per line
minus one and ``order_t`` lines per point minus one.  The geometry built for a
single lambda has order (q^2 - 1, q - 1), one less in each slot than the
generalised quadrangle the cosets come from.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Any, Sequence

import numpy as np

from .heisenberg import HeisenbergGroup
from .kantor import KantorFamily, TwistParams, base_family, format_label, twisted_subgroup, verify_k2
from .report import Report

Line = tuple[int, ...]


class DuplicateLambda(ValueError):
    pass


class TooManyColours(ValueError):
    pass


@dataclass
class IncidenceStructure:
    num_points: int
    lines: list[Line]
    order_s: int
    order_t: int
    meta: dict[str, Any] = field(default_factory=dict)

    @cached_property
    def point_to_lines(self) -> list[list[int]]:
        index: list[list[int]] = [[] for _ in range(self.num_points)]
        for li, line in enumerate(self.lines):
            for pt in line:
                index[pt].append(li)
        return index

    @cached_property
    def line_sets(self) -> list[frozenset[int]]:
        return [frozenset(line) for line in self.lines]

    @property
    def num_lines(self) -> int:
        return len(self.lines)


def coset_lines(group: HeisenbergGroup, subgroup: np.ndarray) -> list[Line]:
    """All distinct right cosets subgroup*g, ordered by their minimal element."""
    allg = np.arange(group.order, dtype=np.int64)
    table = group.compose_idx(subgroup[:, None], allg[None, :])
    reps = table.min(axis=0)
    _, first = np.unique(reps, return_index=True)
    cosets = np.sort(table[:, first], axis=0).T
    return [tuple(int(x) for x in row) for row in cosets]


def build_line_set(group: HeisenbergGroup, params: TwistParams) -> IncidenceStructure:
    """Lines {A_t^lambda g : g in E, t in GF(q)} on the points of E."""
    q = group.q
    lines: list[Line] = []
    for t in group.field.subfield():
        lines.extend(coset_lines(group, twisted_subgroup(group, t, params)))
    return IncidenceStructure(
        num_points=group.order,
        lines=lines,
        order_s=q * q - 1,
        order_t=q - 1,
        meta={"q": q, "lambda": params.lam, "kappa": params.kappa},
    )


def build_union(group: HeisenbergGroup, kappa: int, lambdas: Sequence[int]):
    """One geometry per lambda plus their union on the shared point set.

    Returns ``(structures, union)``.  The union's ``meta["colour"]`` maps each
    union line to its 1-based colour.
    """
    F = group.field
    if len(set(lambdas)) != len(lambdas):
        raise DuplicateLambda(f"lambda values must be distinct: {list(lambdas)}")
    if len(lambdas) > F.order:
        raise TooManyColours(f"r={len(lambdas)} exceeds q^2={F.order}")
    if not lambdas:
        raise ValueError("need at least one lambda")
    structures = [build_line_set(group, TwistParams(F, lam, kappa)) for lam in lambdas]
    lines: list[Line] = []
    colour: list[int] = []
    for i, st in enumerate(structures, start=1):
        lines.extend(st.lines)
        colour.extend([i] * st.num_lines)
    first = structures[0]
    union = IncidenceStructure(
        num_points=group.order,
        lines=lines,
        order_s=first.order_s,
        order_t=len(structures) * (first.order_t + 1) - 1,
        meta={"q": group.q, "kappa": kappa, "lambdas": list(lambdas), "colour": colour},
    )
    return structures, union


# --- verification -------------------------------------------------------------

def verify_pls(structure: IncidenceStructure) -> Report:
    """Every pair of distinct points lies on at most one common line."""
    n = structure.num_points
    seen: dict[int, int] = {}
    pairs = 0
    for li, line in enumerate(structure.lines):
        for u, v in combinations(sorted(line), 2):
            key = u * n + v
            pairs += 1
            other = seen.setdefault(key, li)
            if other != li:
                return Report("pls", False, {"points": (u, v), "lines": (other, li)},
                              {"pairs_checked": pairs})
    return Report("pls", True, stats={"pairs_covered": pairs,
                                      "point_pairs": n * (n - 1) // 2})


def verify_regularity(structure: IncidenceStructure) -> Report:
    want_line = structure.order_s + 1
    want_deg = structure.order_t + 1
    for li, line in enumerate(structure.lines):
        if len(line) != want_line:
            return Report("regularity", False, {"line": li, "size": len(line), "expected": want_line})
    for pt, through in enumerate(structure.point_to_lines):
        if len(through) != want_deg:
            return Report("regularity", False, {"point": pt, "degree": len(through), "expected": want_deg})
    return Report("regularity", True, stats={"points_per_line": want_line, "lines_per_point": want_deg})


def verify_double_counting(structure: IncidenceStructure) -> Report:
    lhs = structure.num_lines * (structure.order_s + 1)
    rhs = structure.num_points * (structure.order_t + 1)
    return Report("double_counting", lhs == rhs, None if lhs == rhs else {"lines*(s+1)": lhs, "points*(t+1)": rhs},
                  {"lines*(s+1)": lhs, "points*(t+1)": rhs})


def _meeting_lines(structure: IncidenceStructure) -> list[set[int]]:
    nbr: list[set[int]] = [set() for _ in range(structure.num_lines)]
    for through in structure.point_to_lines:
        for a, b in combinations(through, 2):
            nbr[a].add(b)
            nbr[b].add(a)
    return nbr


def _triangle_at(structure, nbr, l1: int, l2: int):
    """A triangle containing lines l1, l2 (which must meet), or None.

    A third line meeting both is part of a triangle unless it passes
    through their common point.
    """
    sets = structure.line_sets
    p = min(sets[l1] & sets[l2])
    for l3 in sorted(nbr[l1] & nbr[l2]):
        if p not in sets[l3]:
            pts = (p, min(sets[l2] & sets[l3]), min(sets[l1] & sets[l3]))
            return {"lines": (l1, l2, l3), "points": pts}
    return None


def verify_triangle_free(structure: IncidenceStructure, samples: int | None = None,
                         rng: np.random.Generator | None = None, batch: int = 20000) -> Report:
    """No three lines pairwise meeting in three distinct points.

    Exhaustive over all meeting line pairs by default.  With ``samples``,
    probes that many random meeting pairs instead: lines l1, l2 meeting at p
    lie in a triangle iff more lines meet both of them than the deg(p) - 2
    other lines through p.
    """
    nbr = _meeting_lines(structure)
    if samples is None:
        probes = 0
        for l1 in range(structure.num_lines):
            for l2 in sorted(nbr[l1]):
                if l2 < l1:
                    continue
                probes += 1
                tri = _triangle_at(structure, nbr, l1, l2)
                if tri:
                    return Report("triangle_free", False, tri, {"pairs_probed": probes})
        return Report("triangle_free", True, stats={"pairs_probed": probes, "mode": "exhaustive"})

    return _sampled_triangle_scan(structure, nbr, samples, rng, batch)


def _sampled_triangle_scan(structure, nbr, samples: int, rng, batch: int) -> Report:
    # Dense line-by-line matrices; fine up to a few thousand lines.
    rng = rng if rng is not None else np.random.default_rng(0)
    nl = structure.num_lines
    adj = np.zeros((nl, nl), dtype=bool)
    meet = np.full((nl, nl), -1, dtype=np.int64)
    for pt, through in enumerate(structure.point_to_lines):
        for a, b in combinations(through, 2):
            adj[a, b] = adj[b, a] = True
            meet[a, b] = meet[b, a] = pt
    packed = np.packbits(adj, axis=1)
    degree = np.array([len(x) for x in structure.point_to_lines], dtype=np.int64)
    # neighbour lists in CSR form
    nbr_count = np.array([len(x) for x in nbr], dtype=np.int64)
    offsets = np.concatenate(([0], np.cumsum(nbr_count)[:-1]))
    flat = np.array([m for x in nbr for m in sorted(x)], dtype=np.int64)

    done = probed = 0
    while done < samples:
        size = min(batch, samples - done)
        l1 = rng.integers(0, nl, size=size)
        picks = rng.random(size)
        done += size
        keep = nbr_count[l1] > 0
        l1, picks = l1[keep], picks[keep]
        if l1.size == 0:
            continue
        probed += l1.size
        l2 = flat[offsets[l1] + (picks * nbr_count[l1]).astype(np.int64)]
        common = np.bitwise_count(packed[l1] & packed[l2]).sum(axis=1, dtype=np.int64)
        concurrent = degree[meet[l1, l2]] - 2
        bad = np.flatnonzero(common > concurrent)
        if bad.size:
            tri = _triangle_at(structure, nbr, int(l1[bad[0]]), int(l2[bad[0]]))
            return Report("triangle_free", False, tri, {"pairs_probed": probed})
    return Report("triangle_free", True, stats={"pairs_probed": probed, "mode": "sampled"})


def verify_triangle_free_algebraic(group: HeisenbergGroup, params: TwistParams) -> Report:
    """AB cap C = {1} for distinct A, B, C among {A_t^lambda : t in GF(q)}.

    A triangle with vertices f, g, h would put f h^-1 = (f g^-1)(g h^-1) in AB cap C.
    """
    fam = KantorFamily({t: twisted_subgroup(group, t, params) for t in group.field.subfield()})
    rep = verify_k2(group, fam)
    rep.name = "triangle_free_algebraic"
    return rep


def verify_disjoint_line_sets(structures: Sequence[IncidenceStructure]) -> Report:
    owner: dict[Line, int] = {}
    for i, st in enumerate(structures):
        for line in st.lines:
            j = owner.setdefault(line, i)
            if j != i:
                return Report("disjoint_line_sets", False, {"colours": (j + 1, i + 1), "line": line})
    return Report("disjoint_line_sets", True, stats={"lines": len(owner)})


def right_translate(group: HeisenbergGroup, structure: IncidenceStructure, h: int) -> set[Line]:
    """Image of the line set under right multiplication by h."""
    pts = group.compose_idx(np.arange(group.order), h)
    return {tuple(sorted(int(pts[x]) for x in line)) for line in structure.lines}


# --- reference elation generalised quadrangle ---------------------------------

def build_elation_gq(group: HeisenbergGroup, fam: KantorFamily | None = None) -> IncidenceStructure:
    """The elation GQ of a Kantor family, as a reference geometry.

    Points: elements of E, cosets A*_i g, and one point at infinity.
    Lines: cosets A_i g and one symbol [A_i] per family member.  Orders are
    the GQ orders (q^2, q).  Not used by the packing; cross-check only.
    """
    fam = fam if fam is not None else base_family(group)
    stars = fam.star_members
    if stars is None:
        raise ValueError("elation GQ needs the starred subgroups")
    q = group.q
    npts = group.order

    star_cosets: dict = {}
    star_point: dict[tuple, int] = {}
    for lab in fam.labels:
        for c in coset_lines(group, stars[lab]):
            star_point[(lab, c[0])] = npts
            star_cosets[npts] = (lab, frozenset(c))
            npts += 1
    infinity = npts
    npts += 1

    lines: list[Line] = []
    for lab in fam.labels:
        star_of = {}
        for pt, (slab, members) in star_cosets.items():
            if slab == lab:
                for g in members:
                    star_of[g] = pt
        for c in coset_lines(group, fam.members[lab]):
            lines.append(tuple(sorted(c + (star_of[c[0]],))))
    for lab in fam.labels:
        pts = [pt for pt, (slab, _) in star_cosets.items() if slab == lab]
        lines.append(tuple(sorted(pts + [infinity])))

    return IncidenceStructure(npts, lines, order_s=q * q, order_t=q,
                              meta={"q": q, "kind": "elation_gq",
                                    "labels": [format_label(group.field, lab) for lab in fam.labels]})


def verify_gq_axioms(structure: IncidenceStructure) -> list[Report]:
    """GQ axioms: regularity, two points/lines share at most one line/point,
    and each point off a line is collinear with exactly one of its points."""
    reports = [verify_regularity(structure), verify_pls(structure)]

    meets = Counter()
    for through in structure.point_to_lines:
        for a, b in combinations(through, 2):
            meets[(a, b)] += 1
    bad = next((pair for pair, c in meets.items() if c > 1), None)
    reports.append(Report("lines_meet_once", bad is None, bad))

    collinear: list[set[int]] = []
    for pt, through in enumerate(structure.point_to_lines):
        s: set[int] = set()
        for li in through:
            s.update(structure.lines[li])
        s.discard(pt)
        collinear.append(s)
    cex = None
    for pt in range(structure.num_points):
        on = set(structure.point_to_lines[pt])
        for li, line in enumerate(structure.line_sets):
            if li in on:
                continue
            count = len(line & collinear[pt])
            if count != 1:
                cex = {"point": pt, "line": li, "collinear_points": count}
                break
        if cex:
            break
    reports.append(Report("unique_collinear_point", cex is None, cex))
    return reports


# --- text dumps -----------------------------------------------------------------

def dump_geometry(group: HeisenbergGroup, structure: IncidenceStructure) -> str:
    F = group.field
    head = [str(group.q), F.format_elem(structure.meta["kappa"]),
            F.format_elem(structure.meta["lambda"]), str(structure.num_points), str(structure.num_lines)]
    rows = [" ".join(head)]
    rows += [" ".join(str(x) for x in line) for line in structure.lines]
    return "\n".join(rows) + "\n"


def dump_union(group: HeisenbergGroup, union: IncidenceStructure) -> str:
    """Union dump: lambdas joined by ';' in the header, colour prefix per line."""
    F = group.field
    lams = ";".join(F.format_elem(x) for x in union.meta["lambdas"])
    head = [str(group.q), F.format_elem(union.meta["kappa"]), lams,
            str(union.num_points), str(union.num_lines)]
    rows = [" ".join(head)]
    for colour, line in zip(union.meta["colour"], union.lines):
        rows.append(f"{colour} " + " ".join(str(x) for x in line))
    return "\n".join(rows) + "\n"



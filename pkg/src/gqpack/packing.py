"""Turan-graph packings built on top of triangle-free partial linear spaces.

Each colour i gets a graph G_i: every line of that colour is cut into k
near-equal blocks at random and the complete k-partite graph on the blocks is
added.  Because lines of one colour never form triangles and lines of
different colours share at most one point, G_i is K_{k+1}-free and the G_i are
pairwise edge-disjoint.

Randomness: every line gets its own PCG64 stream seeded with
``SeedSequence([seed, 0, colour, line])``; colouring trial j in an experiment
uses ``SeedSequence([seed, 1, j])``.  Results are therefore reproducible
across platforms and independent of evaluation order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator, Sequence

import numpy as np

from .finite_field import field_of_order
from .geometry import IncidenceStructure, Line, build_union
from .heisenberg import heisenberg_group
from .kantor import find_kappa
from .report import Report

Graph = list[set[int]]
Partition = tuple[tuple[int, ...], ...]

STRATEGIES = ("uniform-random", "balanced-random", "greedy-adversarial")


class KTooLarge(ValueError):
    pass


class BadColour(ValueError):
    pass


class PackingError(ValueError):
    pass


def block_sizes(n: int, k: int) -> list[int]:
    """k' blocks of size floor(n/k) followed by k - k' of size ceil(n/k)."""
    if k < 1:
        raise ValueError("k must be positive")
    if k > n:
        raise KTooLarge(f"k={k} exceeds the line size {n}")
    small = n // k
    n_small = k * (small + 1) - n
    return [small] * n_small + [small + 1] * (k - n_small)


def line_rng(seed: int, colour: int, line: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 0, colour, line])))


def random_partition(line: Sequence[int], k: int, rng: np.random.Generator) -> Partition:
    """Shuffle the line uniformly and cut it at the fixed block sizes."""
    sizes = block_sizes(len(line), k)
    perm = rng.permutation(len(line))
    shuffled = [line[i] for i in perm]
    blocks = []
    start = 0
    for size in sizes:
        blocks.append(tuple(sorted(shuffled[start:start + size])))
        start += size
    return tuple(blocks)


@dataclass
class PackedGraphs:
    num_vertices: int
    k: int
    seed: int
    lines: list[list[Line]]
    partitions: list[list[Partition]]
    graphs: list[Graph]
    provenance: dict[tuple[int, int], tuple[int, int]] = field(repr=False)

    @property
    def r(self) -> int:
        return len(self.graphs)

    def edges(self, colour: int) -> list[tuple[int, int]]:
        """Sorted edge list of G_colour (1-based colour)."""
        adj = self.graphs[colour - 1]
        return sorted((u, v) for u in range(self.num_vertices) for v in adj[u] if u < v)


def build_packing(structures: Sequence[IncidenceStructure], k: int, seed: int) -> PackedGraphs:
    """Assemble G_1..G_r from per-line Turan graphs.

    Raises PackingError if two per-line Turan graphs would share an edge,
    which means the inputs were not a partial linear space.
    """
    if not structures:
        raise ValueError("need at least one structure")
    n = structures[0].num_points
    if any(st.num_points != n for st in structures):
        raise PackingError("structures must share the point set")
    graphs: list[Graph] = []
    partitions: list[list[Partition]] = []
    provenance: dict[tuple[int, int], tuple[int, int]] = {}
    for colour, st in enumerate(structures, start=1):
        adj: Graph = [set() for _ in range(n)]
        parts = []
        for li, line in enumerate(st.lines):
            part = random_partition(line, k, line_rng(seed, colour, li))
            parts.append(part)
            for b1, b2 in combinations(part, 2):
                for u in b1:
                    for v in b2:
                        key = (u, v) if u < v else (v, u)
                        prev = provenance.setdefault(key, (colour, li))
                        if prev != (colour, li):
                            raise PackingError(f"edge {key} from line {li} of colour {colour} "
                                               f"already added by {prev}")
                        adj[u].add(v)
                        adj[v].add(u)
        graphs.append(adj)
        partitions.append(parts)
    return PackedGraphs(n, k, seed, [list(st.lines) for st in structures], partitions, graphs, provenance)


def verify_edge_disjoint(packed: PackedGraphs) -> Report:
    edge_sets = [set(packed.edges(i)) for i in range(1, packed.r + 1)]
    for i, j in combinations(range(packed.r), 2):
        common = edge_sets[i] & edge_sets[j]
        if common:
            return Report("edge_disjoint", False, {"colours": (i + 1, j + 1), "edge": min(common)})
    total = sum(len(s) for s in edge_sets)
    ok = total == len(packed.provenance)
    return Report("edge_disjoint", ok, None if ok else {"edges": total, "provenance": len(packed.provenance)},
                  {"edges": [len(s) for s in edge_sets]})


def verify_partitions(packed: PackedGraphs) -> Report:
    """Every line's partition has the equitable block-size shape."""
    for colour, (lines, parts) in enumerate(zip(packed.lines, packed.partitions), start=1):
        for li, (line, part) in enumerate(zip(lines, parts)):
            sizes = sorted(len(b) for b in part)
            covered = sorted(x for b in part for x in b)
            if sizes != sorted(block_sizes(len(line), packed.k)) or covered != sorted(line):
                return Report("partitions", False, {"colour": colour, "line": li, "sizes": sizes})
    return Report("partitions", True)


# --- cliques --------------------------------------------------------------------

def find_clique(graph: Graph, m: int) -> tuple[int, ...] | None:
    """An m-clique of the graph, or None.

    Bron-Kerbosch with Tomita pivoting; branches that cannot reach size m are
    cut, and the search stops at the first clique of size m.
    """
    if m < 1:
        raise ValueError("m must be positive")

    def expand(r: list[int], p: set[int], x: set[int]):
        if len(r) >= m:
            return tuple(sorted(r[:m]))
        if len(r) + len(p) < m:
            return None
        pivot = max(p | x, key=lambda u: len(p & graph[u]))
        for v in sorted(p - graph[pivot]):
            found = expand(r + [v], p & graph[v], x & graph[v])
            if found:
                return found
            p.remove(v)
            x.add(v)
        return None

    return expand([], set(range(len(graph))), set())


def verify_clique_free(graph: Graph, m: int) -> Report:
    """Pass iff the graph has no clique on m vertices."""
    if m < 2:
        raise ValueError("m must be at least 2")
    clique = find_clique(graph, m)
    return Report(f"K{m}_free", clique is None, clique)


def enumerate_cliques(graph: Graph, size: int) -> Iterator[tuple[int, ...]]:
    """Every clique with exactly ``size`` vertices, as increasing tuples."""
    def grow(clique: list[int], cands: list[int]):
        if len(clique) == size:
            yield tuple(clique)
            return
        for i, v in enumerate(cands):
            yield from grow(clique + [v], [u for u in cands[i + 1:] if u in graph[v]])

    yield from grow([], list(range(len(graph))))


# --- colourings -------------------------------------------------------------------

@dataclass(frozen=True)
class Witness:
    colour: int
    line: int
    vertices: tuple[int, ...]


def _check_values(packed: PackedGraphs, colouring: Sequence[int]) -> None:
    if len(colouring) != packed.num_vertices:
        raise BadColour(f"colouring has {len(colouring)} entries, expected {packed.num_vertices}")
    for v, c in enumerate(colouring):
        if not 1 <= c <= packed.r:
            raise BadColour(f"vertex {v} has colour {c}, outside [1, {packed.r}]")


def _witness_in_colour(packed: PackedGraphs, colouring: Sequence[int], colour: int) -> Witness | None:
    for li, part in enumerate(packed.partitions[colour - 1]):
        picks = []
        for block in part:
            hit = next((v for v in block if colouring[v] == colour), None)
            if hit is None:
                break
            picks.append(hit)
        else:
            return Witness(colour, li, tuple(picks))
    return None


def check_colouring(packed: PackedGraphs, colouring: Sequence[int]) -> Witness | None:
    """First (colour, line, one vertex per block) with every block hit in that
    colour, scanning colours then lines in order; None if there is none."""
    _check_values(packed, colouring)
    for colour in range(1, packed.r + 1):
        w = _witness_in_colour(packed, colouring, colour)
        if w:
            return w
    return None


def colour_witnesses(packed: PackedGraphs, colouring: Sequence[int]) -> list[Witness | None]:
    _check_values(packed, colouring)
    return [_witness_in_colour(packed, colouring, c) for c in range(1, packed.r + 1)]


def uniform_colouring(n: int, r: int, rng: np.random.Generator) -> list[int]:
    return (rng.integers(0, r, size=n) + 1).tolist()


def balanced_colouring(n: int, r: int, rng: np.random.Generator) -> list[int]:
    """Class sizes differ by at most one; assignment uniformly random."""
    perm = rng.permutation(n)
    out = [0] * n
    for pos, v in enumerate(perm.tolist()):
        out[v] = pos % r + 1
    return out


def greedy_adversarial_colouring(packed: PackedGraphs, rng: np.random.Generator) -> list[int]:
    """Colour vertices in random order, each taking the colour that completes
    the fewest block transversals.

    Ties go to the colour that touches the fewest uncovered blocks, then the
    smaller colour class, then the smaller colour.
    """
    n, r, k = packed.num_vertices, packed.r, packed.k
    # for each colour and vertex: (line, block) pairs containing the vertex
    where: list[list[list[tuple[int, int]]]] = []
    for parts in packed.partitions:
        w: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for li, part in enumerate(parts):
            for bi, block in enumerate(part):
                for v in block:
                    w[v].append((li, bi))
        where.append(w)
    covered = [[set() for _ in parts] for parts in packed.partitions]
    sizes = [0] * r
    colouring = [0] * n
    for v in rng.permutation(n).tolist():
        best = None
        for c in range(r):
            completes = touches = 0
            for li, bi in where[c][v]:
                cov = covered[c][li]
                if bi not in cov:
                    touches += 1
                    if len(cov) == k - 1:
                        completes += 1
            key = (completes, touches, sizes[c], c)
            if best is None or key < best:
                best = key
        c = best[3]
        colouring[v] = c + 1
        sizes[c] += 1
        for li, bi in where[c][v]:
            covered[c][li].add(bi)
    return colouring


# --- bound and experiments ----------------------------------------------------------

def failure_exponent(s: int, t: int, r: int, k: int, num_points: int) -> float:
    return num_points * ((1 + math.log(r)) / r + (t + 1) / (s + 1) * math.log(k) - (t + 1) / (r * k))


def estimate_failure_bound(s: int, t: int, r: int, k: int, num_points: int) -> float:
    """exp(|P| ((1 + ln r)/r + (t+1)/(s+1) ln k - (t+1)/(rk))); inf on overflow."""
    if min(s, t, r, k, num_points) <= 0:
        raise ValueError("all parameters must be positive")
    x = failure_exponent(s, t, r, k, num_points)
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 1, trial])))


def run_trials(packed: PackedGraphs, trials: int, strategy: str, seed: int) -> dict:
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    per_colour = [0] * packed.r
    hits = 0
    for j in range(trials):
        rng = trial_rng(seed, j)
        if strategy == "uniform-random":
            col = uniform_colouring(packed.num_vertices, packed.r, rng)
        elif strategy == "balanced-random":
            col = balanced_colouring(packed.num_vertices, packed.r, rng)
        else:
            col = greedy_adversarial_colouring(packed, rng)
        found = colour_witnesses(packed, col)
        for i, w in enumerate(found):
            if w is not None:
                per_colour[i] += 1
        hits += any(w is not None for w in found)
    return {
        "witness_rate": hits / trials if trials else None,
        "per_colour_counts": per_colour,
    }


def packing_experiment(q: int, r: int, k: int, trials: int, strategy: str, seed: int,
                       lambdas: Sequence[int] | None = None) -> dict:
    """Build the packing once, colour it ``trials`` times, report statistics.

    Sampled colourings do not certify the packing property, which quantifies
    over every colouring; the analytic bound is reported alongside.
    """
    F = field_of_order(q)
    group = heisenberg_group(F.p, F.e)
    kappa = find_kappa(F)
    lams = list(lambdas) if lambdas is not None else list(range(r))
    if len(lams) != r:
        raise ValueError("need exactly r lambda values")
    structures, _ = build_union(group, kappa, lams)
    packed = build_packing(structures, k, seed)
    stats = run_trials(packed, trials, strategy, seed)
    s, t = q * q - 1, q - 1
    bound = estimate_failure_bound(s, t, r, k, q ** 5)
    return {
        "q": q,
        "r": r,
        "k": k,
        "seed": seed,
        "strategy": strategy,
        "trials": trials,
        "witness_rate": stats["witness_rate"],
        "bound": bound if math.isfinite(bound) else "inf",
        "log_bound": failure_exponent(s, t, r, k, q ** 5),
        "per_colour_counts": stats["per_colour_counts"],
    }


def dump_dimacs(packed: PackedGraphs, colour: int) -> str:
    edges = packed.edges(colour)
    rows = [f"c colour {colour} of {packed.r} k={packed.k} seed={packed.seed}",
            f"p edge {packed.num_vertices} {len(edges)}"]
    rows += [f"e {u + 1} {v + 1}" for u, v in edges]
    return "\n".join(rows) + "\n"


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"

"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage error.  Human-readable
summaries go to stdout; machine output (JSON reports, DIMACS graphs, geometry
dumps) goes to files.  GQPACK_THREADS caps the number of worker processes used
by ``verify``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import BoundAssertionError, bound_report
from .finite_field import FieldError, field_of_order, is_prime_power
from .geometry import (
    build_line_set, build_union, dump_geometry, dump_union, verify_disjoint_line_sets,
    verify_double_counting, verify_pls, verify_regularity, verify_triangle_free,
    verify_triangle_free_algebraic,
)
from .heisenberg import heisenberg_group
from .kantor import (
    INF, TwistParams, base_family, cubic_is_irreducible, dump_subgroup, find_kappa, kappa_is_valid,
    kappa_via_cubic, twisted_family, twisted_subgroup, verify_kantor_axioms, verify_k2, verify_tau,
)
from .packing import (
    STRATEGIES, KTooLarge, build_packing, dump_dimacs, packing_experiment, report_json,
)
from .report import Report


class UsageError(Exception):
    pass


def _field(q: int):
    pe = is_prime_power(q)
    if pe is None:
        raise UsageError(f"q={q} is not a prime power")
    if pe[0] == 2:
        raise UsageError("q must be odd")
    try:
        return field_of_order(q)
    except FieldError as exc:
        raise UsageError(str(exc)) from exc


def _lambdas(F, r: int, given: list[int] | None) -> list[int]:
    if r < 1:
        raise UsageError("r must be positive")
    if r > F.order:
        raise UsageError(f"r={r} exceeds q^2={F.order}")
    if given is None:
        return list(range(r))
    if len(given) != r:
        raise UsageError(f"--lambdas needs exactly r={r} values")
    if len(set(given)) != r:
        raise UsageError("--lambdas must be distinct")
    if any(not 0 <= x < F.order for x in given):
        raise UsageError(f"--lambdas are element indices in [0, {F.order})")
    return list(given)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("GQPACK_THREADS", "1")))
    except ValueError:
        return 1


# --- kappa ---------------------------------------------------------------------

def cmd_kappa(args) -> int:
    F = _field(args.q)
    print(f"q={F.q} field={F.describe()}")
    ok = True
    for name, search in (("find_kappa", find_kappa), ("kappa_via_cubic", kappa_via_cubic)):
        kappa = search(F)
        trace_ok = kappa_is_valid(F, kappa)
        ok &= trace_ok
        print(f"{name}: kappa={F.format_elem(kappa)} trace-check {'PASS' if trace_ok else 'FAIL'} "
              f"cubic-irreducible {'yes' if cubic_is_irreducible(F, kappa) else 'no'}")
    return 0 if ok else 1


# --- verify --------------------------------------------------------------------

def _check_lambda(p: int, e: int, kappa: int, lam: int, exhaustive: bool, samples: int,
                  seed: int) -> list[dict]:
    group = heisenberg_group(p, e)
    params = TwistParams(group.field, lam, kappa)
    rng = np.random.default_rng([seed, lam])
    tag = f"lambda={group.field.format_elem(lam)}"
    out: list[Report] = []
    out.append(verify_k2(group, twisted_family(group, params)))
    out += verify_tau(group, params, samples=None if exhaustive else samples, rng=rng)
    st = build_line_set(group, params)
    out += [verify_regularity(st), verify_pls(st), verify_double_counting(st)]
    out.append(verify_triangle_free(st, samples=None if exhaustive else samples, rng=rng))
    out.append(verify_triangle_free_algebraic(group, params))
    dicts = []
    for rep in out:
        d = rep.to_dict()
        d["name"] = f"{tag}/{d['name']}"
        dicts.append(d)
    return dicts


def _subgroup_intersections(group, kappa: int, lambdas: list[int]) -> Report:
    F = group.field
    subs = {lam: [twisted_subgroup(group, t, TwistParams(F, lam, kappa)) for t in F.subfield()]
            for lam in lambdas}
    pairs = 0
    for i, l1 in enumerate(lambdas):
        for l2 in lambdas[i + 1:]:
            for a in subs[l1]:
                for b in subs[l2]:
                    pairs += 1
                    common = np.intersect1d(a, b)
                    if common.size != 1 or common[0] != 0:
                        return Report("subgroup_intersections", False,
                                      {"lambdas": (l1, l2), "common": common.tolist()})
    return Report("subgroup_intersections", True, stats={"pairs": pairs})


def cmd_verify(args) -> int:
    F = _field(args.q)
    lambdas = _lambdas(F, args.r, args.lambdas)
    group = heisenberg_group(F.p, F.e)
    kappa = find_kappa(F)
    exhaustive = args.depth == "exhaustive"

    checks: list[dict] = []
    for rep in verify_kantor_axioms(group, base_family(group)):
        d = rep.to_dict()
        d["name"] = f"base/{d['name']}"
        checks.append(d)

    jobs = [(F.p, F.e, kappa, lam, exhaustive, args.samples, args.seed) for lam in lambdas]
    workers = min(_threads(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_check_lambda, *zip(*jobs)))
    else:
        results = [_check_lambda(*job) for job in jobs]
    for res in results:
        checks.extend(res)

    structures, union = build_union(group, kappa, lambdas)
    for rep in (_subgroup_intersections(group, kappa, lambdas), verify_disjoint_line_sets(structures),
                verify_pls(union), verify_regularity(union), verify_double_counting(union)):
        d = rep.to_dict()
        d["name"] = f"union/{d['name']}"
        checks.append(d)

    passed = all(c["passed"] for c in checks)
    report = {
        "version": __version__,
        "q": F.q,
        "field": F.describe(),
        "r": args.r,
        "kappa": F.format_elem(kappa),
        "lambdas": [F.format_elem(x) for x in lambdas],
        "depth": args.depth,
        "samples": None if exhaustive else args.samples,
        "seed": args.seed,
        "passed": passed,
        "checks": checks,
    }
    Path(args.report).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    for c in checks:
        print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}")
    print(f"{'all checks passed' if passed else 'verification FAILED'}; report written to {args.report}")
    return 0 if passed else 1


# --- pack / experiment / bound / export ------------------------------------------

def cmd_pack(args) -> int:
    F = _field(args.q)
    lambdas = _lambdas(F, args.r, args.lambdas)
    if args.r > 1 and "{i}" not in args.out:
        raise UsageError("--out must contain {i} when r > 1")
    group = heisenberg_group(F.p, F.e)
    structures, _ = build_union(group, find_kappa(F), lambdas)
    try:
        packed = build_packing(structures, args.k, args.seed)
    except KTooLarge as exc:
        raise UsageError(str(exc)) from exc
    for i in range(1, packed.r + 1):
        path = args.out.format(i=i)
        Path(path).write_text(dump_dimacs(packed, i))
        print(f"G_{i}: {len(packed.edges(i))} edges -> {path}")
    return 0


def cmd_experiment(args) -> int:
    F = _field(args.q)
    lambdas = _lambdas(F, args.r, args.lambdas)
    if args.trials < 0:
        raise UsageError("--trials must be non-negative")
    try:
        report = packing_experiment(F.q, args.r, args.k, args.trials, args.strategy, args.seed, lambdas)
    except KTooLarge as exc:
        raise UsageError(str(exc)) from exc
    text = report_json(report)
    if args.out:
        Path(args.out).write_text(text)
        print(f"witness_rate={report['witness_rate']} over {args.trials} trials; "
              f"bound={report['bound']}; report written to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_bound(args) -> int:
    if args.r < 2 or args.k < 3:
        raise UsageError("need r >= 2 and k >= 3")
    try:
        rep = bound_report(args.r, args.k)
    except BoundAssertionError as exc:
        print(f"assertion failed: {exc}", file=sys.stderr)
        return 1
    text = rep.to_json()
    if args.out:
        Path(args.out).write_text(text)
        print(f"s_{args.r}(K_{args.k}): q*={rep.q_star} constructive={rep.num_points} "
              f"main={rep.main_bound:.6g} refined={rep.refined_bound:.6g}; report written to {args.out}")
    else:
        sys.stdout.write(text)
    return 0 if all(rep.conditions.values()) else 1


def cmd_export(args) -> int:
    F = _field(args.q)
    group = heisenberg_group(F.p, F.e)
    kappa = find_kappa(F)
    if args.kind == "union":
        lambdas = _lambdas(F, args.r, args.lambdas)
        _, union = build_union(group, kappa, lambdas)
        text = dump_union(group, union)
    else:
        if not 0 <= args.lam < F.order:
            raise UsageError(f"--lambda is an element index in [0, {F.order})")
        params = TwistParams(F, args.lam, kappa)
        if args.kind == "geometry":
            text = dump_geometry(group, build_line_set(group, params))
        else:
            fam = twisted_family(group, params)
            text = "\n".join(dump_subgroup(group, lab, None if lab == INF else params, fam.members[lab])
                             for lab in fam.labels)
    Path(args.out).write_text(text)
    print(f"{args.kind} dump written to {args.out}")
    return 0


# --- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gqpack", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def lambdas_arg(p):
        p.add_argument("--lambdas", type=int, nargs="+", default=None,
                       help="lambda values as element indices (default: the first r elements)")

    p = sub.add_parser("kappa", help="search for kappa by both routes")
    p.add_argument("--q", type=int, required=True)
    p.set_defaults(func=cmd_kappa)

    p = sub.add_parser("verify", help="verify axioms, PLS and triangle-freeness")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--depth", choices=("exhaustive", "sampled"), default="exhaustive")
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0, help="seed for sampled checks")
    p.add_argument("--report", default="verify-report.json")
    lambdas_arg(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("pack", help="build the packing and write DIMACS graphs")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default="g{i}.dimacs", help="path template with {i} for the colour")
    lambdas_arg(p)
    p.set_defaults(func=cmd_pack)

    p = sub.add_parser("experiment", help="colouring experiments on one packing")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--strategy", choices=STRATEGIES, default="uniform-random")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None)
    lambdas_arg(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("bound", help="evaluate the bounds for s_r(K_k)")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("export", help="dump a geometry, a union, or the twisted subgroups")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--kind", choices=("geometry", "union", "subgroups"), default="geometry")
    p.add_argument("--lambda", dest="lam", type=int, default=0, help="lambda index for geometry/subgroups")
    p.add_argument("--r", type=int, default=1, help="colours for --kind union")
    p.add_argument("--out", required=True)
    lambdas_arg(p)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

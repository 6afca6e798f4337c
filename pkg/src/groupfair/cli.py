"""``groupfair`` command-line interface.

Exit status: 0 on success, 1 on malformed input, 2 when an exhaustive
oracle would exceed its ``--cap``.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import formats
from .discrepancy import brute_min_bicolor, brute_min_multicolor
from .instances import (
    gen_cd_lower_instance,
    gen_hardness_fairdiv,
    gen_prop_lower_instance,
    gen_setsplit_gadget,
    gen_wdisc_lower,
    hadamard_amplify,
    planted_setsplit,
    random_instance,
    random_rational_instance,
    split_coloring_from_solution,
    sylvester_hadamard,
    w_matrix,
    wdisc_target,
)
from .model import Allocation, Notion, certify, exhaustive_optimum
from .solver import SolveParams, solve_for_notion

DEFAULT_CAP = 2**24
BENCH_HEADER = ["instance", "n", "m", "k", "notion", "c", "c_over_sqrt_n", "seconds", "seed"]


class CapExceeded(Exception):
    pass


def _num(v):
    if isinstance(v, Fraction):
        return str(v)
    return float(v)


def _emit(obj, output: str | None) -> None:
    text = formats.dumps(obj)
    if output:
        Path(output).write_text(text)
    sys.stdout.write(text)


def _exactify(A: np.ndarray) -> np.ndarray:
    out = np.empty(A.shape, dtype=object)
    for idx, v in np.ndenumerate(A):
        out[idx] = Fraction(v)
    return out


# ---------------------------------------------------------------- solve / verify

def cmd_solve(args) -> int:
    inst = formats.read_instance(args.input)
    params = SolveParams(initial_T=args.t0, max_doublings=args.max_doublings,
                         seed=args.seed, reseeds=args.reseeds)
    out = solve_for_notion(inst, Notion(args.notion), params)
    formats.write_json(args.output, formats.allocation_to_json(out.allocation))
    cert = out.certificate()
    cert_path = args.certificate or str(Path(args.output).with_suffix("")) + ".cert.json"
    formats.write_json(cert_path, cert)
    sys.stdout.write(formats.dumps(cert))
    return 0


def verify_report(inst, alloc) -> dict:
    reports = certify(inst, alloc)
    out = {n.value: reports[n].c for n in (Notion.EF, Notion.PROP, Notion.CD)}
    out["reports"] = {n.value: formats.report_to_json(reports[n])
                      for n in (Notion.EF, Notion.PROP, Notion.CD)}
    return out


def cmd_verify(args) -> int:
    inst = formats.read_instance(args.input)
    alloc = formats.read_allocation(args.alloc)
    alloc.validate(inst)
    _emit(verify_report(inst, alloc), args.output)
    return 0


# ---------------------------------------------------------------- gen

def _write_instance(path, inst):
    formats.write_json(path, formats.instance_to_json(inst))


def _input_matrix(args) -> np.ndarray:
    if not args.matrix:
        raise ValueError(f"--kind {args.kind} needs --matrix")
    A = formats.read_matrix(args.matrix)
    if args.columns is not None:
        if not 0 <= args.columns <= A.shape[1]:
            raise ValueError(f"--columns must lie in 0..{A.shape[1]}")
        A = A[:, :args.columns]
    return A


def cmd_gen(args) -> int:
    kind = args.kind
    if kind in ("hadamard-w", "wdisc-lower"):
        if args.order is None:
            raise ValueError(f"--kind {kind} needs --order")
        W = gen_wdisc_lower(args.order) if kind == "wdisc-lower" else w_matrix(sylvester_hadamard(args.order))
        if args.exact:
            W = _exactify(W)
        meta = {}
        if kind == "wdisc-lower":
            target = wdisc_target(args.order, args.p)
            meta = {"p": args.p, "target": target}
        formats.write_matrix(args.output, W, **meta)
    elif kind in ("cd-lower", "prop-lower"):
        if args.k is None:
            raise ValueError(f"--kind {kind} needs --k")
        A = _input_matrix(args)
        fn = gen_cd_lower_instance if kind == "cd-lower" else gen_prop_lower_instance
        _write_instance(args.output, fn(A, args.k))
    elif kind in ("gadget", "hardness"):
        if args.k is None or args.N is None or args.M is None:
            raise ValueError(f"--kind {kind} needs --k, --N and --M")
        S, T = planted_setsplit(args.M, args.N, args.seed)
        bundle = gen_setsplit_gadget(S, args.k, args.dprime, args.seed)
        chi = split_coloring_from_solution(T, bundle)
        if kind == "gadget":
            formats.write_json(args.output, {
                "M": S.M, "N": S.N, "k": args.k, "dprime": args.dprime, "seed": args.seed,
                "subsets": [sorted(int(e) for e in s) for s in S.subsets],
                "T": sorted(int(t) for t in T),
                "edges": bundle.edges.tolist(),
                "column_bound": str(bundle.column_bound),
                "gamma": bundle.gamma,
                "coloring": formats.coloring_to_json(chi),
                "B": formats.matrix_to_json(_exactify(bundle.B)),
            })
        else:
            A = hadamard_amplify(bundle, exact=True)
            _write_instance(args.output, gen_hardness_fairdiv(A, args.k))
            if args.alloc_output:
                formats.write_json(args.alloc_output, formats.allocation_to_json(Allocation(chi)))
    elif kind == "random":
        if args.group_sizes is None or args.m is None:
            raise ValueError("--kind random needs --group-sizes and --m")
        sizes = tuple(int(s) for s in args.group_sizes.split(","))
        if args.denominator:
            inst = random_rational_instance(sizes, args.m, args.seed, args.denominator)
        else:
            inst = random_instance(sizes, args.m, args.seed, args.distribution, args.q)
        _write_instance(args.output, inst)
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(f"unknown kind {kind}")
    return 0


# ---------------------------------------------------------------- brute

def cmd_brute(args) -> int:
    if args.mode == "alloc":
        inst = formats.read_instance(args.input)
        total = inst.k**inst.m
        if total > args.cap:
            raise CapExceeded(f"{inst.k}^{inst.m} = {total} allocations exceeds cap {args.cap}")
        notions = [Notion(args.notion)] if args.notion else [Notion.EF, Notion.PROP, Notion.CD]
        optima = {}
        for notion in notions:
            res = exhaustive_optimum(inst, notion, cap=args.cap)
            optima[notion.value] = {"c": res.c, "assignment": [int(a) for a in res.allocation.assignment]}
        _emit({"mode": "alloc", "k": inst.k, "m": inst.m, "optima": optima}, args.output)
        return 0

    A = formats.read_matrix(args.input)
    m = A.shape[1]
    if args.mode == "disc":
        if 2**m > args.cap:
            raise CapExceeded(f"2^{m} colorings exceeds cap {args.cap}")
        x, value = brute_min_bicolor(A, args.p, cap=m)
        _emit({"mode": "disc", "p": args.p, "value": _num(value),
               "x": [int(v) for v in x]}, args.output)
    else:
        if args.k is None:
            raise ValueError("--mode multicolor needs --k")
        if args.k < 1:
            raise ValueError("k must be at least 1")
        if args.k**m > args.cap:
            raise CapExceeded(f"{args.k}^{m} colorings exceeds cap {args.cap}")
        chi, value = brute_min_multicolor(A, args.k, cap=args.k**m)
        _emit({"mode": "multicolor", "k": args.k, "value": _num(value),
               "coloring": formats.coloring_to_json(chi)}, args.output)
    return 0


# ---------------------------------------------------------------- bench

def _bench_one(job):
    path, notion, seed = job
    inst = formats.read_instance(path)
    start = time.perf_counter()
    out = solve_for_notion(inst, notion, SolveParams(seed=seed))
    seconds = time.perf_counter() - start
    c = out.report.c
    return [Path(path).name, inst.n, inst.m, inst.k, notion, c,
            f"{c / math.sqrt(inst.n):.6f}", f"{seconds:.3f}", seed]


def cmd_bench(args) -> int:
    corpus = Path(args.corpus)
    if not corpus.is_dir():
        raise ValueError(f"{corpus} is not a directory")
    paths = sorted(str(p) for p in corpus.glob("*.json"))
    jobs = [(p, args.notion, args.seed) for p in paths]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_bench_one, jobs))
    else:
        rows = [_bench_one(j) for j in jobs]
    with open(args.report, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(BENCH_HEADER)
        writer.writerows(rows)
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="groupfair",
                                     description="Group fair division via discrepancy.")
    sub = parser.add_subparsers(dest="command", required=True)
    notions = [n.value for n in Notion]

    p = sub.add_parser("solve", help="compute and certify an allocation")
    p.add_argument("--notion", choices=notions, default="cd")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--certificate", help="certificate path (default: <output>.cert.json)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--t0", type=int, default=None)
    p.add_argument("--max-doublings", type=int, default=10)
    p.add_argument("--reseeds", type=int, default=0)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="exact fairness values of an allocation")
    p.add_argument("--input", required=True)
    p.add_argument("--alloc", required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="generate instances and matrices")
    p.add_argument("--kind", required=True, choices=[
        "hadamard-w", "wdisc-lower", "cd-lower", "prop-lower", "gadget", "hardness", "random"])
    p.add_argument("--output", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--order", type=int)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--exact", action="store_true", help="write matrix entries as rationals")
    p.add_argument("--matrix")
    p.add_argument("--columns", type=int, help="keep only the first C columns of --matrix")
    p.add_argument("--k", type=int)
    p.add_argument("--M", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--dprime", type=int, default=2)
    p.add_argument("--alloc-output", help="hardness: also write the planted allocation")
    p.add_argument("--group-sizes")
    p.add_argument("--m", type=int)
    p.add_argument("--distribution", choices=["uniform", "bernoulli"], default="uniform")
    p.add_argument("--q", type=float, default=0.5)
    p.add_argument("--denominator", type=int, help="random: exact utilities a/denominator")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("brute", help="exhaustive oracles")
    p.add_argument("--mode", required=True, choices=["disc", "multicolor", "alloc"])
    p.add_argument("--input", required=True)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP,
                   help="maximum number of colorings or allocations to enumerate")
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--k", type=int)
    p.add_argument("--notion", choices=notions)
    p.add_argument("--output")
    p.set_defaults(func=cmd_brute)

    p = sub.add_parser("bench", help="solve every instance of a corpus directory")
    p.add_argument("--corpus", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--notion", choices=notions, default="cd")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CapExceeded, OverflowError) as exc:
        print(f"groupfair: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, TypeError, OSError) as exc:
        print(f"groupfair: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

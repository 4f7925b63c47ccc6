"""Command line front end over the library.

Every subcommand is a pure input to output mapping on JSON files: check
runs the decision pipeline on one permutation, census counts a whole
level, compose fuses two permutations, order chases powers, trees prints
the shape table and normalform canonicalizes a generator expression.
Exit codes: 0 for a decided result, 2 when a verdict stays undecided
within the budget, 1 for bad input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any, Dict, List, Optional

from .algebra import element_to_json, format_element, parse_element
from .census import brute_census, orbit_census, shape_census
from .endo import DiagonalVerdict
from .permdecide import (
    AutVerdict,
    PermUnitary,
    ReducedMapFamily,
    decide_automorphism,
    decide_diagonal,
    fusion_table,
    power_order,
)
from .words import word_from_index, word_to_string


def _load_perm(path: str) -> PermUnitary:
    with open(path, "r", encoding="utf-8") as fh:
        return PermUnitary.from_json(fh.read())


def _emit(payload: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(payload + "\n")
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")


def _fixes_generator(pu: PermUnitary, letter: int) -> bool:
    # lambda_u(S_i) = S_i iff sigma fixes every word starting with i.
    block = pu.n ** (pu.k - 1) if pu.k >= 1 else 0
    lo = (letter - 1) * block
    return all(pu.table[w] == w for w in range(lo, lo + block))


def _check_payload(pu: PermUnitary, budget: Optional[int]) -> Dict[str, Any]:
    trees: List[Dict[str, Any]] = []
    if pu.k >= 1:
        for i, diag in enumerate(
            ReducedMapFamily.from_perm(pu).diagnostics(), start=1
        ):
            record: Dict[str, Any] = {"generator": i, "is_tree": diag.is_tree}
            if diag.is_tree:
                assert diag.root is not None
                record.update(
                    root=word_to_string(word_from_index(pu.n, pu.k - 1, diag.root)),
                    height=diag.height,
                    leaves=diag.leaf_count,
                    shape=diag.shape,
                )
            trees.append(record)
    dv: DiagonalVerdict = decide_diagonal(pu)
    av: AutVerdict = decide_automorphism(pu, budget_m=budget)
    payload: Dict[str, Any] = {
        "schema": 1,
        "n": pu.n,
        "k": pu.k,
        "trees": trees,
        "diagonal": {"is_aut": dv.is_aut, "depth": dv.depth, "level": dv.level},
        "aut": {"status": av.status, "m": av.m, "reason": av.reason},
    }
    if av.inverse is not None:
        payload["aut"]["inverse_level"] = av.inverse.k
        payload["aut"]["inverse_map"] = list(av.inverse.table)
    if av.is_aut:
        aut_order, out_order = power_order(pu)
        payload["aut_order"] = aut_order
        payload["out_order"] = out_order
    for i in range(1, pu.n + 1):
        payload[f"fixes_S{i}"] = _fixes_generator(pu, i)
    return payload


def _cmd_check(args: argparse.Namespace) -> int:
    pu = _load_perm(args.perm)
    payload = _check_payload(pu, args.budget)
    _emit(json.dumps(payload, indent=2), args.out)
    return 2 if payload["aut"]["status"] == "undecided" else 0


def _cmd_census(args: argparse.Namespace) -> int:
    if args.classes and args.checkpoint:
        print(
            "warning: --checkpoint is ignored with --classes "
            "(class merging needs every sweep in one run)",
            file=sys.stderr,
        )
    if args.mode == "brute":
        report = brute_census(args.n, args.k, budget_m=args.budget)
    else:
        report = orbit_census(
            args.n,
            args.k,
            budget_m=args.budget,
            workers=args.workers,
            classes=args.classes,
            checkpoint=args.checkpoint,
            csv_path=args.csv,
            progress=(lambda msg: print(msg, file=sys.stderr))
            if args.verbose
            else None,
        )
    _emit(report.to_json(), args.out)
    return 2 if report.undecided else 0


def _cmd_compose(args: argparse.Namespace) -> int:
    left = _load_perm(args.a)
    right = _load_perm(args.b)
    _emit(fusion_table(left, right).to_json(), args.out)
    return 0


def _cmd_order(args: argparse.Namespace) -> int:
    pu = _load_perm(args.perm)
    verdict = decide_automorphism(pu, materialize=False)
    aut_order = out_order = None
    if verdict.is_aut:
        aut_order, out_order = power_order(pu, max_order=args.max)
    payload = {
        "schema": 1,
        "status": verdict.status,
        "aut_order": aut_order,
        "out_order": out_order,
    }
    _emit(json.dumps(payload, indent=2), args.out)
    if verdict.status == "undecided":
        return 2
    if verdict.is_aut and aut_order is None:
        return 2  # order exceeded the requested bound
    return 0


def _cmd_trees(args: argparse.Namespace) -> int:
    records = shape_census(args.n, args.k)
    payload = [
        {
            "shape": rec.shape,
            "leaves": rec.leaves,
            "endo": rec.endo,
            "diagonal": rec.diagonal,
            "aut": rec.aut,
        }
        for rec in records
    ]
    _emit(json.dumps({"schema": 1, "n": args.n, "k": args.k, "shapes": payload}, indent=2), args.out)
    return 0


def _infer_alphabet(text: str) -> int:
    best = 2
    for token in text.split():
        if token.startswith("S"):
            for ch in token[1:].rstrip("*"):
                if ch.isdigit():
                    best = max(best, int(ch))
    return best


def _cmd_normalform(args: argparse.Namespace) -> int:
    with open(args.expr, "r", encoding="utf-8") as fh:
        text = fh.read()
    n = args.n if args.n is not None else _infer_alphabet(text)
    element = parse_element(n, text)
    if args.json:
        _emit(element_to_json(element), args.out)
    else:
        _emit(format_element(element), args.out)
    return 0


def _default_workers() -> int:
    env = os.environ.get("CUNTZCAL_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cuntzcal",
        description="decision procedures and censuses for permutative "
        "endomorphisms of the Cuntz algebras",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="full diagnostic for one permutation")
    check.add_argument("--perm", required=True, help="permutation JSON file")
    check.add_argument("--budget", type=int, default=None, help="stabilization depth cap")
    check.add_argument("--out", default=None)
    check.set_defaults(func=_cmd_check)

    census = sub.add_parser("census", help="count a whole word level")
    census.add_argument("--n", type=int, required=True)
    census.add_argument("--k", type=int, required=True)
    census.add_argument("--mode", choices=["brute", "orbit"], default="orbit")
    census.add_argument("--budget", type=int, default=None)
    census.add_argument("--workers", type=int, default=_default_workers())
    census.add_argument("--classes", action="store_true", help="count classes modulo inners")
    census.add_argument("--checkpoint", default=None, help="resumable sweep log (orbit mode)")
    census.add_argument("--csv", default=None, help="per-orbit records (orbit mode)")
    census.add_argument("--verbose", action="store_true")
    census.add_argument("--out", default=None)
    census.set_defaults(func=_cmd_census)

    compose = sub.add_parser("compose", help="fuse two permutative endomorphisms")
    compose.add_argument("--a", required=True)
    compose.add_argument("--b", required=True)
    compose.add_argument("--out", default=None)
    compose.set_defaults(func=_cmd_compose)

    order = sub.add_parser("order", help="automorphism order and order modulo inners")
    order.add_argument("--perm", required=True)
    order.add_argument("--max", type=int, default=24)
    order.add_argument("--out", default=None)
    order.set_defaults(func=_cmd_order)

    trees = sub.add_parser("trees", help="shape census at one level")
    trees.add_argument("--n", type=int, required=True)
    trees.add_argument("--k", type=int, required=True)
    trees.add_argument("--out", default=None)
    trees.set_defaults(func=_cmd_trees)

    normalform = sub.add_parser("normalform", help="canonical form of an expression")
    normalform.add_argument("--expr", required=True, help="expression text file")
    normalform.add_argument("--n", type=int, default=None, help="alphabet size (inferred if omitted)")
    normalform.add_argument("--json", action="store_true", help="emit JSON instead of text")
    normalform.add_argument("--out", default=None)
    normalform.set_defaults(func=_cmd_normalform)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        # Long sweeps are meant to be interruptible; 130 follows the
        # shell convention for SIGINT.
        print("interrupted", file=sys.stderr)
        return 130
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

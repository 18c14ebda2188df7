"""Command-line front end.

Exit codes: 0 = holds/pass, 1 = fails/does-not-hold (valid computation),
2 = usage or input error, 3 = resource cap hit.  Diagnostics go to standard
error; JSON output is written to standard output and never mixed with
diagnostics.

Resource caps can be overridden through environment variables named
FINALG_<CAP>, e.g. FINALG_MAX_TUPLES=...; see the relations and variety
modules for the available caps.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from . import relations as _relations_mod
from . import variety as _variety_mod
from .core import Algebra, algebra_from_dict, algebra_to_dict, term_to_str
from .dsl import check_inclusion, eval_expr, parse_expr, parse_roles, parse_statement
from .errors import InputError, ResourceError
from .lattice import (
    baker_companion_dict,
    baker_instance,
    c2_generator,
    chain,
    lambda_tolerance,
    psi_tolerance,
)
from .relations import rel_from_dict, rel_to_dict
from .scenarios import (
    SCENARIO_INDEX,
    SCENARIOS,
    format_reports,
    run_all,
    run_scenario,
)
from .variety import find_term, spectrum, variety_relation_check

_ALIASES = {"c2b": lambda: c2_generator("b"), "c2u": lambda: c2_generator("u"), "c2lat": lambda: chain(1)}

_CAP_MODULES = (_relations_mod, _variety_mod)


def _apply_env_caps():
    for key, value in os.environ.items():
        if not key.startswith("FINALG_MAX"):
            continue
        name = key[len("FINALG_"):]
        try:
            cap = int(value)
        except ValueError:
            raise InputError(f"environment cap {key} is not an integer: {value!r}")
        hit = False
        for mod in _CAP_MODULES:
            if hasattr(mod, name):
                setattr(mod, name, cap)
                hit = True
        if not hit:
            raise InputError(f"unknown resource cap {key}")


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None


def _load_algebra(spec: str) -> Algebra:
    if spec in _ALIASES:
        return _ALIASES[spec]()
    d = _load_json(spec)
    if "algebra" in d:
        d = d["algebra"]
    return algebra_from_dict(d)


def _load_rels(path: str, size: int) -> dict:
    d = _load_json(path)
    if "relations" in d:
        d = d["relations"]
    env = {}
    for name, rd in d.items():
        rel = rel_from_dict(rd)
        if rel.size != size:
            raise InputError(
                f"relation {name!r} is over {rel.size} elements, algebra has {size}"
            )
        env[name] = rel
    return env


def _emit(text: str, out: Optional[str]):
    if out is None:
        print(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_make_baker(args) -> int:
    inst = baker_instance(args.n, args.sig, minus=args.minus)
    rels = {
        "alpha": rel_to_dict(inst.alpha),
        "beta": rel_to_dict(inst.beta),
        "gamma": rel_to_dict(inst.gamma),
        "psi": rel_to_dict(psi_tolerance(inst)),
    }
    if inst.signature == "b":
        rels["lambda"] = rel_to_dict(lambda_tolerance(inst))
    # short aliases for one-line check invocations
    rels["al"], rels["be"], rels["ga"] = rels["alpha"], rels["beta"], rels["gamma"]
    doc = {
        "algebra": algebra_to_dict(inst.algebra),
        "relations": rels,
        "companion": baker_companion_dict(inst),
        "n": inst.n,
        "sig": inst.signature,
        "minus": inst.minus,
    }
    _emit(json.dumps(doc, indent=None), args.out)
    if args.json:
        print(json.dumps({"out": args.out, "size": inst.algebra.size}))
    else:
        print(f"wrote instance n={inst.n} sig={inst.signature} "
              f"({inst.algebra.size} elements) to {args.out}", file=sys.stderr)
    return 0


def _cmd_eval(args) -> int:
    alg = _load_algebra(args.algebra)
    env = _load_rels(args.rels, alg.size)
    expr = parse_expr(args.expr)
    rel = eval_expr(alg, env, expr)
    _emit(json.dumps(rel_to_dict(rel)), args.out)
    return 0


def _cmd_check(args) -> int:
    alg = _load_algebra(args.algebra)
    env = _load_rels(args.rels, alg.size)
    stmt = parse_statement(args.stmt, parse_roles(args.roles))
    res = check_inclusion(alg, env, stmt)
    if args.json:
        print(json.dumps({"holds": res.holds, "witness": res.witness,
                          "direction": res.direction}))
    elif res.holds:
        print("holds")
    else:
        msg = "fails"
        if args.witness:
            msg += f" (witness: {res.witness}, direction: {res.direction})"
        print(msg)
    return 0 if res.holds else 1


def _cmd_variety_check(args) -> int:
    alg = _load_algebra(args.algebra)
    stmt = parse_statement(args.stmt, parse_roles(args.roles))
    res = variety_relation_check(alg, stmt, args.n)
    if args.json:
        print(json.dumps({"holds": res.holds, "witness": res.witness,
                          "free_size": res.free_size, "env_sizes": res.env_sizes}))
    else:
        print("holds in the variety" if res.holds
              else f"fails in the variety (witness: {res.witness})")
    return 0 if res.holds else 1


def _cmd_spectrum(args) -> int:
    alg = _load_algebra(args.algebra)
    k = spectrum(alg, args.n, args.max_k)
    if args.json:
        print(json.dumps({"n": args.n, "spectrum": k, "max_k": args.max_k}))
    else:
        print("none" if k is None else k)
    return 0 if k is not None else 1


def _only_lattice_ops(term) -> bool:
    if isinstance(term, int):
        return True
    op, children = term
    return op in ("meet", "join") and all(_only_lattice_ops(c) for c in children)


def _cmd_find_term(args) -> int:
    alg = _load_algebra(args.algebra)
    term = find_term(alg, args.kind, args.arity)
    if args.json:
        print(json.dumps({"kind": args.kind, "arity": args.arity,
                          "term": None if term is None else term_to_str(term)}))
        return 0 if term is not None else 1
    if term is None:
        print("none")
        return 1
    print(term_to_str(term))
    if _only_lattice_ops(term):
        from .lattice import lattice_poly_str

        print(lattice_poly_str(term))
    return 0


def _cmd_replicate(args) -> int:
    max_n = args.n if args.n is not None else 4
    if args.scenario is not None:
        if args.scenario not in SCENARIO_INDEX:
            raise InputError(f"unknown scenario {args.scenario!r}")
        scenario = SCENARIO_INDEX[args.scenario]
        reports = []
        for params in scenario.grid(max_n):
            if args.seed is not None and "seed" in params:
                params = {**params, "seed": args.seed}
            reports.append(run_scenario(scenario.id, **params))
    else:
        reports = run_all(max_n)
    if args.json:
        print(json.dumps([r.to_dict() for r in reports]))
    else:
        print(format_reports(reports))
    if any(r.status == "fail" for r in reports):
        return 1
    if any(r.status == "skipped(resource)" for r in reports):
        return 3
    return 0


def _cmd_list_scenarios(args) -> int:
    if args.json:
        print(json.dumps([{"id": s.id, "summary": s.summary} for s in SCENARIOS]))
    else:
        width = max(len(s.id) for s in SCENARIOS)
        for s in SCENARIOS:
            print(f"{s.id.ljust(width)}  {s.summary}")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="finalg",
        description="Finite universal-algebra verification engine.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("make-baker", help="construct an order instance and write it as JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sig", choices=("b", "u"), required=True)
    p.add_argument("--minus", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_make_baker)

    p = sub.add_parser("eval", help="evaluate a relation expression")
    p.add_argument("--algebra", required=True)
    p.add_argument("--rels", required=True)
    p.add_argument("--expr", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("check", help="check a relation identity on one algebra")
    p.add_argument("--algebra", required=True)
    p.add_argument("--rels", required=True)
    p.add_argument("--stmt", required=True)
    p.add_argument("--roles", required=True)
    p.add_argument("--witness", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_check)

    p = sub.add_parser("variety-check", help="check an identity throughout the generated variety")
    p.add_argument("--algebra", required=True)
    p.add_argument("--stmt", required=True)
    p.add_argument("--roles", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_variety_check)

    p = sub.add_parser("spectrum", help="least alternation level at chain length n")
    p.add_argument("--algebra", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--max-k", type=int, default=64)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_spectrum)

    p = sub.add_parser("find-term", help="search the clone for a term of the given kind")
    p.add_argument("--algebra", required=True)
    p.add_argument("--kind", required=True)
    p.add_argument("--arity", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_find_term)

    p = sub.add_parser("replicate", help="run the replication scenarios")
    p.add_argument("--scenario")
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_replicate)

    p = sub.add_parser("list-scenarios", help="list scenario ids and summaries")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=_cmd_list_scenarios)

    return parser


def main(argv: Optional[list] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        _apply_env_caps()
        return args.fn(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ResourceError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

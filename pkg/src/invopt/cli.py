"""Command-line front end.

Exit codes: 0 success, 1 infeasible or failed verification, 2 input error.
JSON payloads go to stdout, diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import sys

from . import codec
from .errors import InstanceError, NegativeCycleError, NoPerfectMatchingError, TruncatedFamilyError, UnreachableError
from .generate import generate
from .graphs import KINDS, PATH, instance_to_dict, parse_instance
from .multi import solve_inverse_multi, verify_deviation
from .numeric import dump_lp, format_rational
from .oracle import (
    brute_force_optimum,
    brute_force_restricted,
    check_mildly_adequate_condition,
    enumerate_feasible,
    synthesize_counterexample_weight,
)
from .single import solve_inverse_single

OK, INFEASIBLE, INPUT_ERROR = 0, 1, 2


class _Exit(Exception):
    def __init__(self, code, message, payload=None):
        self.code = code
        self.message = message
        self.payload = payload
        super().__init__(message)


def _read(path):
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _Exit(INPUT_ERROR, f"cannot read {path}: {exc.strerror}")


def _load_instance(path):
    try:
        return parse_instance(_read(path))
    except InstanceError as exc:
        raise _Exit(INPUT_ERROR, f"{path}: {exc}")


def _cycle_payload(exc: NegativeCycleError):
    doc = {"error": "non-conservative", "cycle": list(exc.cycle), "cycle_weight": format_rational(exc.weight)}
    if getattr(exc, "index", None) is not None:
        doc["weight_index"] = exc.index + 1
    return doc


def cmd_solve(args):
    inst = _load_instance(args.instance)
    try:
        if args.single:
            if inst.k != 1:
                raise _Exit(INPUT_ERROR, f"--single needs exactly one weight function, found {inst.k}")
            result = solve_inverse_single(inst)
        else:
            kwargs = {"allow_nonconservative": True} if inst.kind == PATH else {}
            result = solve_inverse_multi(inst, **kwargs)
    except NegativeCycleError as exc:
        raise _Exit(INFEASIBLE, str(exc), _cycle_payload(exc))
    doc = {"kind": inst.kind, "mode": "single" if args.single else "multi"}
    doc.update(codec.result_to_dict(result, args.emit_witness))
    if args.emit_lp and not args.single:
        doc["lp"] = [dump_lp(lp) for lp, _ in result.lps]
    return OK, doc


def cmd_verify(args):
    inst = _load_instance(args.instance)
    try:
        p = codec.parse_deviation(_read(args.deviation), inst)
    except InstanceError as exc:
        raise _Exit(INPUT_ERROR, f"{args.deviation}: {exc}")
    verdicts = verify_deviation(inst, p)
    feasible = all(v.feasible for v in verdicts)
    doc = {
        "feasible": feasible,
        "norm": format_rational(p.norm1),
        "verdicts": [
            {
                "weight": v.index + 1,
                "status": v.status,
                "solution_weight": format_rational(v.solution_weight),
                "optimum": None if v.optimum is None else format_rational(v.optimum),
            }
            for v in verdicts
        ],
    }
    return (OK if feasible else INFEASIBLE), doc


def cmd_oracle(args):
    inst = _load_instance(args.instance)
    family = enumerate_feasible(inst, args.cap, args.semantics)
    if family.truncated:
        raise _Exit(INFEASIBLE, f"family truncated at {args.cap} members", {"error": "family truncated", "cap": args.cap})
    if args.restrict == "none":
        res = brute_force_optimum(inst, family)
    else:
        if args.bound is not None and args.bound < 0:
            raise _Exit(INPUT_ERROR, "--bound must be nonnegative")
        res = brute_force_restricted(inst, args.restrict, args.bound, family)
    doc = {
        "optimum": None if res.optimum is None else format_rational(res.optimum),
        "restricted_mode": args.restrict,
        "family_size": res.family_size,
        "semantics": args.semantics,
    }
    if res.bound is not None:
        doc["bound"] = res.bound
    if res.p is not None:
        doc.update(codec.deviation_to_dict(res.p))
    if res.optimum is None:
        what = f"no integral p within bound {res.bound}" if args.restrict == "integral" else "no restricted p exists"
        raise _Exit(INFEASIBLE, what, doc)
    return OK, doc


def cmd_adequacy(args):
    inst = _load_instance(args.instance)
    family = enumerate_feasible(inst, args.cap)
    if family.truncated:
        raise _Exit(INFEASIBLE, f"family truncated at {args.cap} members", {"error": "family truncated", "cap": args.cap})
    report = check_mildly_adequate_condition(inst, family)
    doc = {
        "holds": report.holds,
        "violating": report.violating,
        "pairing": report.pairing,
        "family_size": report.family_size,
    }
    if not report.holds:
        w = synthesize_counterexample_weight(inst, report.violating, family)
        doc["counterexample_weight"] = {e: format_rational(v) for e, v in w.items()}
    return OK, doc


def cmd_gen(args):
    try:
        instances = generate(args.kind, args.vertices, args.k, args.wmin, args.wmax, args.extra, args.count, args.seed)
    except ValueError as exc:
        raise _Exit(INPUT_ERROR, str(exc))
    docs = [instance_to_dict(inst) for inst in instances]
    return OK, docs[0] if args.count == 1 else docs


def build_parser():
    ap = argparse.ArgumentParser(prog="invopt", description="Inverse optimization with multiple weight functions under the l1-norm.")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="optimal deviation vector and its certificate")
    s.add_argument("instance", help="instance JSON file, or - for stdin")
    mode = s.add_mutually_exclusive_group()
    mode.add_argument("--single", action="store_true", help="single-weight solver (k must be 1)")
    mode.add_argument("--multi", action="store_true", help="multi-weight LP solver (default)")
    s.add_argument("--emit-witness", action="store_true", help="include the dual witness")
    s.add_argument("--emit-lp", action="store_true", help="include the solved LPs as text")
    s.set_defaults(run=cmd_solve)

    v = sub.add_parser("verify", help="check a deviation vector against every weight function")
    v.add_argument("instance")
    v.add_argument("deviation", help='JSON file {"p": {"id": "num/den"}}')
    v.set_defaults(run=cmd_verify)

    o = sub.add_parser("oracle", help="brute-force optimum over the enumerated feasible family")
    o.add_argument("instance")
    o.add_argument("--restrict", choices=["none", "mild", "integral"], default="none")
    o.add_argument("--bound", type=int, default=None, help="entry bound for --restrict=integral")
    o.add_argument("--cap", type=int, default=100_000, help="enumeration cap")
    o.add_argument("--semantics", choices=["simple", "flow"], default="simple",
                   help="competitors for path instances: simple paths, or unit s-t flows")
    o.set_defaults(run=cmd_oracle)

    a = sub.add_parser("adequacy", help="check the condition for mildly adequate optima")
    a.add_argument("instance")
    a.add_argument("--cap", type=int, default=100_000)
    a.set_defaults(run=cmd_adequacy)

    g = sub.add_parser("gen", help="seeded random instances")
    g.add_argument("kind", choices=KINDS)
    g.add_argument("--vertices", type=int, default=6)
    g.add_argument("--k", type=int, default=2)
    g.add_argument("--wmin", type=int, default=0)
    g.add_argument("--wmax", type=int, default=5)
    g.add_argument("--extra", type=int, default=4, help="arcs or edges added beyond the planted solution")
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(run=cmd_gen)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code, doc = args.run(args)
    except _Exit as exc:
        print(f"invopt: {exc.message}", file=sys.stderr)
        if exc.payload is not None:
            sys.stdout.write(codec.dumps(exc.payload))
        return exc.code
    except (TruncatedFamilyError, NoPerfectMatchingError, UnreachableError) as exc:
        print(f"invopt: {exc}", file=sys.stderr)
        return INFEASIBLE
    sys.stdout.write(codec.dumps(doc))
    return code


if __name__ == "__main__":
    sys.exit(main())

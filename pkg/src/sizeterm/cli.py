"""Command-line interface.

Exit codes: 0 success, 1 negative verdict, 2 input error, 3 solver
budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .constraints import ResourceExhausted, Solver
from .parser import ParseError, Program, parse_constraint, parse_environment, parse_program, parse_term, parse_type
from .pretty import show_constraint, show_term
from .rewriter import DEFAULT_FUEL, normalize
from .syntax import SortError, TOP
from .termination import ERROR, TERMINATING, Verdict, check_program
from .typecheck import ACCEPTED, UNKNOWN, typecheck_gate

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 2
EXIT_EXHAUSTED = 3

DEFAULT_BUDGET = 10**7


class InputError(Exception):
    pass


def _load(path: str) -> Program:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    try:
        return parse_program(text)
    except ParseError as e:
        raise InputError(f"{path}: {e}") from None


def _parse(fn, text: str, what: str, *args):
    try:
        return fn(text, *args)
    except (ParseError, SortError) as e:
        raise InputError(f"{what}: {e}") from None


def _trusted(program: Program, specs: Sequence[str]) -> dict:
    out = {}
    for spec in specs:
        name, sep, text = spec.partition(":")
        name = name.strip()
        if not sep or program.kind(name) != "function":
            raise InputError(f"--trust-measure expects FUNCTION:CONSTRAINT with a declared function, got {spec!r}")
        out[name] = _parse(parse_constraint, text, "--trust-measure")
    return out


def _verdict_lines(v: Verdict, explain: bool, trace: bool) -> list[str]:
    lines = []
    for fv in v.functions:
        if fv.status == TERMINATING:
            lines.append(f"{fv.name}: TERMINATING")
        else:
            lines.append(f"{fv.name}: {fv.status.upper()} ({'; '.join(fv.reasons)})")
    lines.extend(f"warning: {w}" for w in v.warnings)
    lines.extend(f"error: {d}" for d in v.diagnostics)
    if explain:
        lines.append("obligations:")
        lines.extend(o.show() for o in v.obligations)
    if trace:
        lines.append("trace:")
        n = 0
        for fv in v.functions:
            for rep in fv.rules:
                for step in rep.trace:
                    n += 1
                    lines.append(f"RULE {step.rule} AT {fv.name}@{rep.rule.line}:{step.path} => C{n}")
                    if explain:
                        lines.append(f"  C{n} = {show_constraint(step.constraint)}")
    lines.append(f"result: {v.status.upper()}")
    return lines


def _verdict_json(v: Verdict, path: str, trace: bool) -> dict:
    doc = {"file": path, **v.to_json()}
    if trace:
        doc["trace"] = [
            {
                "rule": step.rule,
                "function": fv.name,
                "line": rep.rule.line,
                "path": step.path,
                "constraint": show_constraint(step.constraint),
            }
            for fv in v.functions
            for rep in fv.rules
            for step in rep.trace
        ]
    return doc


def cmd_check(args) -> int:
    program = _load(args.file)
    trusted = _trusted(program, args.trust_measure)
    v = check_program(program, Solver(args.budget), trusted)
    if args.json:
        print(json.dumps(_verdict_json(v, args.file, args.trace), indent=2, sort_keys=True, ensure_ascii=False))
    else:
        print("\n".join(_verdict_lines(v, args.explain, args.trace)))
    if v.exhausted:
        return EXIT_EXHAUSTED
    if v.status == ERROR and not v.functions:
        return EXIT_INPUT
    return EXIT_OK if v.status == TERMINATING else EXIT_NEGATIVE


def cmd_typecheck(args) -> int:
    program = _load(args.file)
    env = _parse(parse_environment, args.env, "--env") if args.env else {}
    hyp = _parse(parse_constraint, args.assume, "--assume") if args.assume else TOP
    term = _parse(parse_term, args.term, "term", program)
    ty = _parse(parse_type, args.type, "type")
    res = typecheck_gate(program.tau(), hyp, env, term, ty, Solver(args.budget))
    if res.obligation is not None:
        print(f"obligation: {show_constraint(res.obligation)}")
    if args.trace:
        for step in res.trace:
            print(f"RULE {step.rule} AT {step.path} => {show_constraint(step.constraint)}")
    if res.status == ACCEPTED:
        print("ACCEPTED")
        return EXIT_OK
    print(f"{res.status.upper()}: {res.reason}")
    if res.counterexample:
        print("counterexample: " + ", ".join(f"{k.name} = {show_value(val)}" for k, val in sorted(res.counterexample.items(), key=lambda kv: kv[0].name)))
    return EXIT_EXHAUSTED if res.status == UNKNOWN else EXIT_NEGATIVE


def show_value(v) -> str:
    if isinstance(v, bool):
        return "tt" if v else "ff"
    return str(v)


def cmd_eval(args) -> int:
    program = _load(args.file)
    terms = [_parse(parse_term, args.term, "term", program)] if args.term else list(program.queries)
    if not terms:
        raise InputError(f"{args.file} has no eval queries; pass a term")
    code = EXIT_OK
    for t in terms:
        out = normalize(t, program.rules, args.fuel, trace=args.trace)
        for s in out.trace:
            print(f"{s.position}: {show_term(s.redex)} => {show_term(s.contractum)}")
        if out.normal:
            print(f"{show_term(out.term)}  ({out.steps} steps)")
        else:
            print(f"fuel exhausted after {out.steps} steps: {show_term(out.term)}")
            code = EXIT_NEGATIVE
    return code


def cmd_solve(args) -> int:
    c = _parse(parse_constraint, args.constraint, "constraint")
    solver = Solver(args.budget)
    if solver.is_valid(c):
        print("VALID")
    elif solver.is_satisfiable(c):
        print("SATISFIABLE-ONLY")
    else:
        print("UNSATISFIABLE")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sizeterm", description="Termination checking with sized types.")
    sub = p.add_subparsers(dest="command", required=True)

    def budget(sp):
        sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="solver node budget")

    c = sub.add_parser("check", help="check termination of a program")
    c.add_argument("file")
    c.add_argument("--explain", action="store_true", help="dump every solver obligation")
    c.add_argument("--json", action="store_true", help="machine-readable report")
    c.add_argument("--trace", action="store_true", help="print the typing rules applied")
    c.add_argument("--trust-measure", action="append", default=[], metavar="F:CONSTRAINT",
                   help="use an unchecked measure over n1..nk (new) and o1..ok (old)")
    budget(c)
    c.set_defaults(run=cmd_check)

    t = sub.add_parser("typecheck", help="check one typing judgment against a program's signatures")
    t.add_argument("file")
    t.add_argument("term")
    t.add_argument("type")
    t.add_argument("--env", default="", help='environment, e.g. "x : nat^a, l : list^b"')
    t.add_argument("--assume", default="", help="hypothesis constraint (default true)")
    t.add_argument("--trace", action="store_true")
    budget(t)
    t.set_defaults(run=cmd_typecheck)

    e = sub.add_parser("eval", help="normalize a term, or the file's eval queries")
    e.add_argument("file")
    e.add_argument("term", nargs="?")
    e.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    e.add_argument("--trace", action="store_true", help="print every step")
    e.set_defaults(run=cmd_eval)

    s = sub.add_parser("solve", help="decide a constraint")
    s.add_argument("constraint")
    budget(s)
    s.set_defaults(run=cmd_solve)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except ResourceExhausted as e:
        print(f"error: solver budget exhausted: {e}", file=sys.stderr)
        return EXIT_EXHAUSTED

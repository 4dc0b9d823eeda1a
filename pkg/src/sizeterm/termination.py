"""Termination criterion for constructor-based rewrite systems.

For each function ``f : T⃗ → ∀α⃗. B⃗^α⃗ → T`` and each rule
``f x⃗ l⃗ → r`` the checker derives matching constraints ``α⃗ = a⃗`` for
the patterns, then type checks conditions and right-hand side under a
type assignment in which functions equivalent to ``f`` only accept
arguments of sizes smaller than ``α⃗`` for the measure of ``f``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .constraints import ResourceExhausted, Solver
from .parser import Program
from .precedence import Precedence, PrecedenceError
from .pretty import show_constraint, show_term, show_type
from .subtyping import open_binder
from .syntax import (
    BOOL, BOUNDED, LEX, LINEAR, TOP, TRUSTED, App, Arrow, Base, BoolConst, Cons, Constraint,
    ConstructorShape, Equal, FreshSupply, If, IncompatibleEnvironments, Lam, Less, Lit,
    MeasureSpec, Rule, SVar, TExists, TForall, Term, Type, Var, Truth, check_compatible, conj,
    disj, exists, functions, implies, scale_size, size_max, size_sum, spine, subst_constraint,
    subst_type, substitute_term, term_fv, type_fv, NAT,
)
from .typecheck import Checker, TraceStep, TypeCheckError, is_exists_basic

__all__ = [
    "MatchError", "MatchDerivation", "derive_matching", "FunctionShape", "function_shape",
    "measure_constraint", "build_tau_less", "infer_precedences", "Obligation", "RuleReport",
    "FunctionVerdict", "Verdict", "check_rule", "check_program", "overlapping_rules",
    "TERMINATING", "UNKNOWN", "ERROR",
]

TERMINATING = "terminating"
UNKNOWN = "unknown"
ERROR = "error"


# ---------------------------------------------------------------------------
# Matching constraints


class MatchError(ValueError):
    pass


@dataclass(frozen=True)
class MatchDerivation:
    """``α = size; env ⇝ pattern : B^α`` together with the ε names used."""

    size: object
    env: dict
    eps: dict

    def constraint(self, alpha: SVar) -> Constraint:
        return Equal(alpha, self.size)


def derive_matching(
    pattern: Term,
    type_name: str,
    shapes: Mapping[str, ConstructorShape],
    fresh: Optional[FreshSupply] = None,
    eps: Optional[dict] = None,
) -> MatchDerivation:
    """Derive the matching constraint of ``pattern`` at base type ``type_name``.

    ``eps`` maps term variables to their size variables and is shared
    between the patterns of one rule, so that a repeated variable gets a
    single size variable.
    """
    fresh = fresh or FreshSupply()
    eps = {} if eps is None else eps
    size, env = _match(pattern, type_name, shapes, fresh, eps)
    return MatchDerivation(size, env, dict(eps))


def _match(p, type_name, shapes, fresh, eps):
    if isinstance(p, Var):
        sort = BOOL if type_name == BOOL else NAT
        if p.name not in eps:
            eps[p.name] = SVar(fresh.name(p.name), sort)
        e = eps[p.name]
        return e, {p.name: Base(type_name, e)}
    head, args = spine(p)
    if not isinstance(head, Cons):
        raise MatchError(f"pattern head {show_term(head)} is not a constructor")
    shape = shapes.get(head.name)
    if shape is None:
        raise MatchError(f"{head.name} has no constructor signature")
    if shape.result != type_name:
        raise MatchError(f"{head.name} is not a constructor of {type_name}")
    if len(args) != shape.arity:
        raise MatchError(f"{head.name} expects {shape.arity} arguments, got {len(args)}")
    if type_name == BOOL:
        return shape.size, {}
    k = len(shape.nonrecursive)
    envs = []
    for x, ty in zip(args[:k], shape.nonrecursive):
        if not isinstance(x, Var):
            raise MatchError(f"non-recursive argument {show_term(x)} of {head.name} must be a variable")
        envs.append({x.name: ty})
    sizes = []
    for u, name in zip(args[k:], shape.recursive):
        a, env = _match(u, name, shapes, fresh, eps)
        sizes.append(a)
        envs.append(env)
    try:
        merged = check_compatible(*envs)
    except IncompatibleEnvironments as e:
        raise MatchError(
            f"variable {e.var} occurs with types {show_type(e.left)} and {show_type(e.right)}"
        ) from None
    if not sizes:
        return Lit(0), merged
    return size_sum(Lit(1), size_max(sizes)), merged


# ---------------------------------------------------------------------------
# Function signatures and measures


@dataclass(frozen=True)
class FunctionShape:
    """Decomposition ``T⃗ → ∀α⃗. B⃗^α⃗ → T`` of a function type."""

    name: str
    nonrecursive: tuple[Type, ...]
    vars: tuple[SVar, ...]
    measured: tuple[str, ...]
    result: Type

    @property
    def arity(self) -> int:
        return len(self.nonrecursive) + len(self.vars)


def function_shape(name: str, t: Type) -> FunctionShape:
    """Split a function type; raises ValueError on a shape violation."""
    nonrec: list[Type] = []
    while isinstance(t, Arrow):
        nonrec.append(t.dom)
        t = t.cod
    if not isinstance(t, TForall):
        return FunctionShape(name, tuple(nonrec), (), (), t)
    if not isinstance(t.guard, Truth):
        raise ValueError("the quantifier over measured sizes must be unguarded")
    vs = t.vars
    body = t.body
    measured = []
    for v in vs:
        if not (isinstance(body, Arrow) and isinstance(body.dom, Base) and body.dom.size == v):
            raise ValueError(f"expected an argument annotated by {v.name} after the quantifier")
        measured.append(body.dom.name)
        body = body.cod
    return FunctionShape(name, tuple(nonrec), vs, tuple(measured), body)


def measure_constraint(measure: MeasureSpec, new, old) -> Constraint:
    """``new <_f old`` for the given measure."""
    new, old = list(new), list(old)
    if len(new) != len(old):
        raise ValueError("measure applied to tuples of different lengths")
    k = len(old)
    if measure.form == TRUSTED:
        phi = {SVar(f"n{i + 1}"): v for i, v in enumerate(new)}
        phi.update({SVar(f"o{i + 1}"): v for i, v in enumerate(old)})
        return subst_constraint(measure.relation, phi)
    if measure.form == LEX:
        cases = []
        for i in range(k):
            cases.append(conj(*[Equal(new[j], old[j]) for j in range(i)], Less(new[i], old[i])))
        return disj(*cases)
    coeffs = measure.coefficients or (1,) * k
    if len(coeffs) != k:
        raise ValueError(f"measure has {len(coeffs)} coefficients for {k} arguments")
    weigh = lambda vs: size_sum(*[scale_size(c, v) for c, v in zip(coeffs, vs)])  # noqa: E731
    if measure.form == LINEAR:
        return Less(weigh(new), weigh(old))
    if measure.form == BOUNDED:
        return conj(Less(weigh(old), Lit(measure.bound)), Less(weigh(old), weigh(new)))
    raise ValueError(f"unknown measure form {measure.form}")


def build_tau_less(
    tau: Mapping[str, Type],
    cls: list[str],
    shapes: Mapping[str, FunctionShape],
    measure: MeasureSpec,
    frozen: tuple[SVar, ...],
) -> dict[str, Type]:
    """Restrict the functions of ``cls`` to arguments below ``frozen``."""
    out = dict(tau)
    avoid = {v.name for v in frozen}
    for g in cls:
        sh = shapes[g]
        fresh = FreshSupply(avoid)
        primed = tuple(SVar(fresh.name(v.name), v.sort) for v in sh.vars)
        phi = dict(zip(sh.vars, primed))
        body = subst_type(sh.result, phi)
        for name, v in reversed(list(zip(sh.measured, primed))):
            body = Arrow(Base(name, v), body)
        t: Type = TForall(primed, measure_constraint(measure, primed, frozen), body) if primed else body
        for dom in reversed(sh.nonrecursive):
            t = Arrow(dom, t)
        out[g] = t
    return out


def infer_precedences(program: Program) -> tuple[Precedence, Precedence]:
    """Function precedence from the call graph and user edges; type precedence."""
    weak = []
    for r in program.rules:
        called = functions(r.rhs)
        for t, _ in r.conditions:
            called |= functions(t)
        weak.extend((r.head, g) for g in sorted(called))
    strict = [(a, b) for a, op, b in program.precedences if op == ">"]
    equal = [(a, b) for a, op, b in program.precedences if op == "="]
    fprec = Precedence.build(program.functions, weak, strict, equal)
    return fprec, program.type_order


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class Obligation:
    id: str
    function: str
    line: int
    condition: str
    kind: str
    constraint: Constraint
    result: Optional[bool]

    def show(self) -> str:
        res = {True: "holds", False: "fails", None: "exhausted"}[self.result]
        return (
            f"[{self.id}] {self.function} rule@{self.line} ({self.condition}) {self.kind} {res} :: "
            f"{show_constraint(self.constraint)}"
        )

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "function": self.function,
            "line": self.line,
            "condition": self.condition,
            "kind": self.kind,
            "constraint": show_constraint(self.constraint),
            "result": self.result,
        }


@dataclass(frozen=True)
class RuleReport:
    rule: Rule
    ok: bool
    reasons: tuple[str, ...]
    obligations: tuple[Obligation, ...]
    trace: tuple[TraceStep, ...] = field(default=(), compare=False)
    exhausted: bool = False


@dataclass(frozen=True)
class FunctionVerdict:
    name: str
    status: str
    reasons: tuple[str, ...] = ()
    rules: tuple[RuleReport, ...] = ()

    @property
    def obligations(self) -> tuple[Obligation, ...]:
        return tuple(o for r in self.rules for o in r.obligations)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "reasons": list(self.reasons),
            "obligations": [o.to_json() for o in self.obligations],
        }


@dataclass(frozen=True)
class Verdict:
    functions: tuple[FunctionVerdict, ...]
    status: str
    warnings: tuple[str, ...] = ()
    diagnostics: tuple[str, ...] = ()
    exhausted: bool = False

    @property
    def obligations(self) -> tuple[Obligation, ...]:
        out = [o for f in self.functions for o in f.obligations]
        return tuple(sorted(out, key=lambda o: int(o.id[1:])))

    def function(self, name: str) -> FunctionVerdict:
        return next(f for f in self.functions if f.name == name)

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "exhausted": self.exhausted,
            "warnings": list(self.warnings),
            "diagnostics": list(self.diagnostics),
            "functions": [f.to_json() for f in self.functions],
        }


# ---------------------------------------------------------------------------
# Rule checking


class _Counter:
    def __init__(self):
        self.n = 0

    def next(self) -> str:
        self.n += 1
        return f"O{self.n}"


def check_rule(
    rule: Rule,
    shape: FunctionShape,
    tau_less: Mapping[str, Type],
    fprec: Precedence,
    shapes: Mapping[str, ConstructorShape],
    solver: Optional[Solver] = None,
    counter: Optional[_Counter] = None,
) -> RuleReport:
    """Check conditions (iv)-(viii) for one rule of ``shape.name``."""
    solver = solver or Solver()
    counter = counter or _Counter()
    f = shape.name
    obligations: list[Obligation] = []
    trace: list[TraceStep] = []

    def fail(cond: str, msg: str, exhausted: bool = False) -> RuleReport:
        return RuleReport(rule, False, (f"condition ({cond}): {msg}",), tuple(obligations), tuple(trace), exhausted)

    def discharge(cond: str, kind: str, c: Constraint) -> Obligation:
        oid = counter.next()
        try:
            res = solver.is_satisfiable(c) if kind == "satisfiable" else solver.is_valid(c)
        except ResourceExhausted:
            res = None
        ob = Obligation(oid, f, rule.line, cond, kind, c, res)
        obligations.append(ob)
        return ob

    # (iv)
    if len(rule.args) != shape.arity:
        return fail("iv", f"left-hand side has {len(rule.args)} arguments, the signature expects {shape.arity}")
    k = len(shape.nonrecursive)
    xs, ls = rule.args[:k], rule.args[k:]
    for x in xs:
        if not isinstance(x, Var):
            return fail("iv", f"non-measured argument {show_term(x)} must be a variable")

    # (v)
    fresh = FreshSupply(v.name for v in shape.vars)
    for t in tau_less.values():
        fresh.reserve(v.name for v in type_fv(t))
    eps: dict = {}
    envs = [{x.name: ty} for x, ty in zip(xs, shape.nonrecursive)]
    sizes = []
    try:
        for l, name in zip(ls, shape.measured):
            d = derive_matching(l, name, shapes, fresh, eps)
            envs.append(d.env)
            sizes.append(d.size)
        env = check_compatible(*envs)
    except MatchError as e:
        return fail("v", str(e))
    except IncompatibleEnvironments as e:
        return fail("v", f"variable {e.var} occurs with types {show_type(e.left)} and {show_type(e.right)}")
    hyp = conj(*[Equal(a, s) for a, s in zip(shape.vars, sizes)])

    # (vi)
    used = functions(rule.rhs)
    for t, _ in rule.conditions:
        used |= functions(t)
    for g in sorted(used):
        if not fprec.at_most(g, f):
            return fail("vi", f"{g} is not below or equivalent to {f}")

    checker = Checker(tau_less, solver, fresh)
    checker.reserve(env)
    exhausted = False

    # (vii)
    ks = []
    if rule.conditions:
        ob = discharge("vii", "satisfiable", hyp)
        exhausted |= ob.result is None
        if ob.result is False:
            return fail("vii", f"matching hypothesis unsatisfiable ({ob.id})", exhausted)
    for j, (t, value) in enumerate(rule.conditions, 1):
        path = f"cond{j}"
        try:
            if isinstance(t, (Lam, If)):
                c = checker.check(env, t, TExists((SVar("_b", BOOL),), TOP, Base(BOOL, SVar("_b", BOOL))), path)
                kj = TOP
            else:
                res = checker.infer(env, t, path)
                c, ty = res.constraint, res.type
                gammas, guards = [], []
                while isinstance(ty, TExists):
                    vs, g, ty = open_binder(ty, fresh)
                    gammas.extend(vs)
                    guards.append(g)
                if not (isinstance(ty, Base) and ty.name == BOOL):
                    trace.extend(checker.trace)
                    return fail("vii", f"condition {show_term(t)} has type {show_type(res.type)}, not bool", exhausted)
                kj = exists(gammas, conj(*guards, Equal(ty.size, BoolConst(value))))
        except TypeCheckError as e:
            trace.extend(checker.trace)
            return fail("vii", f"condition {j}: {e}", exhausted)
        ks.append(kj)
        ob = discharge("vii", "valid", implies(hyp, c))
        exhausted |= ob.result is None
        if ob.result is False:
            trace.extend(checker.trace)
            return fail("vii", f"condition {j} not typable under the matching hypothesis ({ob.id})", exhausted)

    # (viii)
    premise = conj(hyp, *ks)
    try:
        d = checker.check(env, rule.rhs, shape.result, "rhs")
    except TypeCheckError as e:
        trace.extend(checker.trace)
        return fail("viii", str(e), exhausted)
    trace.extend(checker.trace)
    ob = discharge("viii", "satisfiable", premise)
    exhausted |= ob.result is None
    if ob.result is False:
        return fail("viii", f"rule hypothesis unsatisfiable ({ob.id})", exhausted)
    ob = discharge("viii", "valid", implies(premise, d))
    exhausted |= ob.result is None
    if ob.result is None:
        return fail("viii", f"solver budget exhausted ({ob.id})", True)
    if ob.result is False:
        try:
            contradictory = not solver.is_satisfiable(conj(premise, d))
        except ResourceExhausted:
            contradictory = False
        if contradictory:
            return fail("viii", f"guard unsatisfiable ({ob.id})", exhausted)
        return fail("viii", f"obligation not valid ({ob.id})", exhausted)
    if exhausted:
        return fail("viii", "solver budget exhausted", True)
    return RuleReport(rule, True, (), tuple(obligations), tuple(trace))


# ---------------------------------------------------------------------------
# Program checking


def _unify(s: Term, t: Term, sigma: dict) -> Optional[dict]:
    """First-order unification of constructor patterns."""
    s = _walk(s, sigma)
    t = _walk(t, sigma)
    if isinstance(s, Var):
        if s == t:
            return sigma
        if s.name in term_fv(_resolve(t, sigma)):
            return None
        return {**sigma, s.name: t}
    if isinstance(t, Var):
        return _unify(t, s, sigma)
    if isinstance(s, App) and isinstance(t, App):
        sigma = _unify(s.fun, t.fun, sigma)
        return None if sigma is None else _unify(s.arg, t.arg, sigma)
    return sigma if s == t else None


def _walk(t: Term, sigma: dict) -> Term:
    while isinstance(t, Var) and t.name in sigma:
        t = sigma[t.name]
    return t


def _resolve(t: Term, sigma: dict) -> Term:
    for _ in range(len(sigma) + 1):
        t = substitute_term(t, sigma)
    return t


def _rename(rule: Rule, suffix: str) -> Rule:
    sigma = {x: Var(x + suffix) for x in rule.pattern_vars()}
    return Rule(
        rule.head,
        tuple(substitute_term(a, sigma) for a in rule.args),
        substitute_term(rule.rhs, sigma),
        tuple((substitute_term(t, sigma), v) for t, v in rule.conditions),
        rule.line,
    )


def overlapping_rules(program: Program) -> list[tuple[Rule, Rule]]:
    """Pairs of rules with unifiable left-hand sides and compatible conditions."""
    out = []
    for f in program.functions:
        rules = program.rules_for(f)
        for i, r1 in enumerate(rules):
            for r2 in rules[i + 1:]:
                a, b = _rename(r1, "'1"), _rename(r2, "'2")
                if len(a.args) != len(b.args):
                    continue
                sigma: Optional[dict] = {}
                for p, q in zip(a.args, b.args):
                    sigma = _unify(p, q, sigma)
                    if sigma is None:
                        break
                if sigma is None:
                    continue
                conds = {}
                exclusive = False
                for t, v in a.conditions + b.conditions:
                    key = _resolve(t, sigma)
                    if conds.get(key, v) != v:
                        exclusive = True
                    conds[key] = v
                if not exclusive:
                    out.append((r1, r2))
    return out


def _class_measure(cls: list[str], program: Program, trusted: Mapping[str, Constraint]):
    specs = []
    for g in cls:
        if g in trusted:
            specs.append(MeasureSpec(TRUSTED, relation=trusted[g]))
        elif g in program.measures:
            specs.append(program.measures[g])
    distinct = []
    for s in specs:
        if s not in distinct:
            distinct.append(s)
    if len(distinct) > 1:
        raise ValueError("equivalent functions must share one measure")
    return distinct[0] if distinct else MeasureSpec(LEX)


def check_program(
    program: Program,
    solver: Optional[Solver] = None,
    trusted: Optional[Mapping[str, Constraint]] = None,
) -> Verdict:
    """Check every function of ``program``; failures are reported in the verdict."""
    solver = solver or Solver()
    trusted = dict(trusted or {})
    warnings: list[str] = []
    try:
        fprec, _ = infer_precedences(program)
    except PrecedenceError as e:
        return Verdict((), ERROR, (), (f"precedence: {e}",))

    for r1, r2 in overlapping_rules(program):
        warnings.append(f"rules at lines {r1.line} and {r2.line} of {r1.head} overlap at the root")

    shapes: dict[str, FunctionShape] = {}
    shape_errors: dict[str, str] = {}
    for f in program.functions:
        try:
            sh = function_shape(f, program.type_of(f))
            if not is_exists_basic(sh.result, solver):
                raise ValueError(f"result type {show_type(sh.result)} is not ∃-basic")
            shapes[f] = sh
        except (ValueError, ResourceExhausted) as e:
            shape_errors[f] = f"condition (i): {e}"

    verdicts: dict[str, FunctionVerdict] = {}
    counter = _Counter()
    tau = program.tau()
    any_exhausted = False
    for cls in fprec.classes(program.functions):
        broken = [g for g in cls if g in shape_errors]
        if broken:
            for g in cls:
                reason = shape_errors.get(g, f"condition (iii): equivalent function {broken[0]} is ill-shaped")
                verdicts[g] = FunctionVerdict(g, ERROR, (reason,))
            continue
        first = shapes[cls[0]]
        mismatch = [g for g in cls if shapes[g].measured != first.measured]
        try:
            measure = _class_measure(cls, program, trusted)
            if mismatch:
                raise ValueError(f"{mismatch[0]} and {cls[0]} measure arguments of different types")
            measure_constraint(measure, first.vars, first.vars)
        except ValueError as e:
            for g in cls:
                verdicts[g] = FunctionVerdict(g, ERROR, (f"condition (iii): {e}",))
            continue
        if measure.form == TRUSTED:
            warnings.append(f"UNSOUND-IF-NOT-WF: trusted measure for {', '.join(cls)}")
        for g in cls:
            sh = shapes[g]
            tau_less = build_tau_less(tau, cls, shapes, measure, sh.vars)
            reports = []
            for rule in program.rules_for(g):
                rep = check_rule(rule, sh, tau_less, fprec, program.shapes, solver, counter)
                any_exhausted |= rep.exhausted
                reports.append(rep)
            reasons = tuple(f"line {r.rule.line}: {m}" for r in reports for m in r.reasons)
            status = TERMINATING if all(r.ok for r in reports) else UNKNOWN
            verdicts[g] = FunctionVerdict(g, status, reasons, tuple(reports))

    ordered = tuple(verdicts[f] for f in program.functions)
    if any(v.status == ERROR for v in ordered):
        status = ERROR
    elif all(v.status == TERMINATING for v in ordered):
        status = TERMINATING
    else:
        status = UNKNOWN
    return Verdict(ordered, status, tuple(warnings), (), any_exhausted)

"""Bidirectional type checking with size constraints.

``infer`` synthesizes a constraint and a type, ``check`` synthesizes a
constraint for a given type, and :func:`typecheck_gate` accepts a
judgment when its hypothesis is satisfiable and entails the generated
constraint.

Applications are inferred along the whole spine.  Quantifiers met on the
way are handled as follows: ``∀`` blocks of the head are instantiated by
fresh variables that are existentially quantified in the emitted
constraint; ``∃`` blocks of the head or of an argument are opened
universally, as a ``let`` would do; the result type packs every
remaining variable under one ``∃``.  Variables that are fixed by an
equation are substituted away.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .constraints import ResourceExhausted, Solver
from .subtyping import SubtypeMismatch, eliminate_equations, gen_sub, open_binder, simplify
from .syntax import (
    BOOL, TOP, App, Arrow, Base, Cons, Constraint, Fst, FreshSupply, Fun, If, Lam, Let, Pair, Prod,
    Snd, TExists, TForall, Term, Type, Var, bare, conj, conjuncts, constraint_fv, exists, forall,
    implies, spine, subst_constraint, subst_type, type_fv, Implies, is_basic,
)

__all__ = [
    "TypeCheckError", "TraceStep", "InferResult", "Checker", "GateResult", "typecheck_gate",
    "infer", "check", "is_exists_basic",
]


class TypeCheckError(Exception):
    def __init__(self, message: str, path: str = "root"):
        super().__init__(f"at {path}: {message}")
        self.message = message
        self.path = path


@dataclass(frozen=True)
class TraceStep:
    rule: str
    path: str
    constraint: Constraint
    premises: tuple[Constraint, ...] = ()


@dataclass(frozen=True)
class InferResult:
    constraint: Constraint
    type: Type
    trace: tuple[TraceStep, ...] = ()


def _mk_exists(vs, guard: Constraint, body: Type) -> Type:
    """``∃vs guard. body`` without unused variables or variable-free conjuncts."""
    vs = list(vs)
    parts = [c for c in conjuncts(guard) if constraint_fv(c) & set(vs)]
    used = set(type_fv(body))
    for c in parts:
        used |= constraint_fv(c)
    vs = [v for v in vs if v in used]
    if not vs:
        return body
    return TExists(tuple(vs), conj(*parts), body)


def _path(base: str, *steps: int) -> str:
    return ".".join([base, *map(str, steps)])


class Checker:
    """Type inference and checking against a fixed type assignment."""

    def __init__(self, tau: Mapping[str, Type], solver: Optional[Solver] = None, fresh: Optional[FreshSupply] = None):
        self.tau = tau
        self.solver = solver or Solver()
        self.fresh = fresh or FreshSupply()
        self.trace: list[TraceStep] = []

    def reserve(self, *things) -> None:
        for x in things:
            if isinstance(x, Mapping):
                for t in x.values():
                    self.fresh.reserve(v.name for v in type_fv(t))
            elif isinstance(x, (Base, Arrow, Prod, TForall, TExists)):
                self.fresh.reserve(v.name for v in type_fv(x))
            else:
                self.fresh.reserve(v.name for v in constraint_fv(x))

    def _emit(self, rule: str, path: str, c: Constraint, *premises: Constraint) -> Constraint:
        self.trace.append(TraceStep(rule, path, c, tuple(premises)))
        return c

    def _sub(self, t: Type, u: Type, path: str) -> Constraint:
        try:
            return gen_sub(t, u, self.fresh)
        except SubtypeMismatch as e:
            raise TypeCheckError(str(e), path) from None

    # ------------------------------------------------------------------
    # inference

    def infer(self, env: Mapping[str, Type], t: Term, path: str = "root") -> InferResult:
        start = len(self.trace)
        c, ty = self._infer(env, t, path)
        return InferResult(c, ty, tuple(self.trace[start:]))

    def _infer(self, env, t, path):
        if isinstance(t, Var):
            if t.name not in env:
                raise TypeCheckError(f"unbound variable {t.name}", path)
            return self._emit("infer-var", path, TOP), env[t.name]
        if isinstance(t, (Cons, Fun)):
            if t.name not in self.tau:
                raise TypeCheckError(f"undeclared symbol {t.name}", path)
            return self._emit("infer-symb", path, TOP), self.tau[t.name]
        if isinstance(t, App):
            return self._infer_app(env, t, path)
        if isinstance(t, Pair):
            c1, t1 = self._infer(env, t.left, _path(path, 0))
            c2, t2 = self._infer(env, t.right, _path(path, 1))
            opens: list = []
            t1 = self._open_exists(t1, opens)
            t2 = self._open_exists(t2, opens)
            c, ty = self._pack([c1, c2], opens, [], [], Prod(t1, t2))
            return self._emit("infer-pair", path, c, c1, c2), ty
        if isinstance(t, (Fst, Snd)):
            c0, t0 = self._infer(env, t.arg, _path(path, 0))
            opens, insts = [], []
            t0 = self._strip(t0, opens, insts, path)
            if not isinstance(t0, Prod):
                raise TypeCheckError("projection of a term whose type is not a product", path)
            part = t0.left if isinstance(t, Fst) else t0.right
            c, ty = self._pack([c0], opens, insts, [], part)
            return self._emit("infer-fst" if isinstance(t, Fst) else "infer-snd", path, c, c0), ty
        if isinstance(t, Let):
            c0, t0 = self._infer(env, t.bound, _path(path, 0))
            opens: list = []
            t0 = self._open_exists(t0, opens)
            d, u = self._infer({**env, t.var: t0}, t.body, _path(path, 1))
            if not opens:
                return self._emit("infer-let", path, conj(c0, d), c0, d), u
            vs = tuple(v for block, _ in opens for v in block)
            guard = conj(*[g for _, g in opens])
            c = simplify(conj(c0, exists(vs, guard), forall(vs, implies(guard, d))))
            return self._emit("infer-exists-elim", path, c, c0, d), _mk_exists(vs, guard, u)
        if isinstance(t, Lam):
            raise TypeCheckError("cannot infer the type of an abstraction; it needs a known type", path)
        if isinstance(t, If):
            raise TypeCheckError("cannot infer the type of a conditional; it needs a known type", path)
        raise TypeCheckError(f"unknown term {t!r}", path)

    def _open_exists(self, ty: Type, opens: list) -> Type:
        while isinstance(ty, TExists):
            vs, guard, ty = open_binder(ty, self.fresh)
            opens.append((vs, guard))
        return ty

    def _strip(self, ty: Type, opens: list, insts: list, path: str) -> Type:
        while isinstance(ty, (TExists, TForall)):
            vs, guard, body = open_binder(ty, self.fresh)
            if isinstance(ty, TExists):
                opens.append((vs, guard))
                self._emit("infer-exists-elim", path, guard)
            else:
                insts.append((vs, guard))
                self._emit("infer-forall-elim", path, guard)
            ty = body
        return ty

    def _infer_app(self, env, t, path):
        head, args = spine(t)
        n = len(args)
        head_path = _path(path, *([0] * n))
        c_head, cur = self._infer(env, head, head_path)
        constraints = [c_head]
        opens: list = []
        insts: list = []
        eqs: list = []
        for i, u in enumerate(args):
            app_path = _path(path, *([0] * (n - 1 - i)))
            arg_path = _path(app_path, 1)
            cur = self._strip(cur, opens, insts, app_path)
            if not isinstance(cur, Arrow):
                raise TypeCheckError("application of a term whose type is not a function type", app_path)
            if isinstance(u, (Lam, If)):
                d = self.check(env, u, cur.dom, arg_path)
                eqs.append(d)
            else:
                cu, tu = self._infer(env, u, arg_path)
                constraints.append(cu)
                tu = self._open_exists(tu, opens)
                eqs.append(self._sub(tu, cur.dom, arg_path))
            cur = cur.cod
        c, ty = self._pack(constraints, opens, insts, eqs, cur)
        return self._emit("infer-app", path, c, *constraints), ty

    def _pack(self, constraints, opens, insts, eqs, result: Type):
        """Combine opened and instantiated blocks into a constraint and a packed type."""
        inst_vars = [v for vs, _ in insts for v in vs]
        inst_parts = [p for _, g in insts for p in conjuncts(g)]
        eq_parts = [p for e in eqs for p in conjuncts(simplify(e))]
        inst_left, pe_parts, phi = eliminate_equations(inst_vars, inst_parts + eq_parts)
        result = subst_type(result, phi)
        eq_fv = set()
        for e in eqs:
            eq_fv |= constraint_fv(subst_constraint(e, phi))
        open_vars = [v for vs, _ in opens for v in vs]
        open_parts = [p for _, g in opens for p in conjuncts(g)]
        open_left, open_parts, psi = eliminate_equations(open_vars, open_parts)
        pe_parts = [subst_constraint(p, psi) for p in pe_parts]
        result = subst_type(result, psi)
        regen = [v for v in inst_left if v not in eq_fv and v in type_fv(result)]
        pe_exist = [p for p in pe_parts if not (constraint_fv(p) & set(regen))]
        pe_regen = [p for p in pe_parts if constraint_fv(p) & set(regen)]
        existential = [v for v in inst_left if v not in regen]
        guard = conj(*open_parts)
        inner = exists(existential, conj(*pe_exist))
        c = simplify(conj(*constraints, exists(open_left, guard), forall(open_left, implies(guard, inner))))
        if regen:
            result = TForall(tuple(regen), conj(*pe_regen), result)
        ty = _mk_exists(open_left + existential, conj(*open_parts, *pe_exist), result)
        return c, ty

    # ------------------------------------------------------------------
    # checking

    def check(self, env: Mapping[str, Type], t: Term, ty: Type, path: str = "root") -> Constraint:
        if isinstance(ty, TForall):
            vs, guard, body = open_binder(ty, self.fresh)
            d = self.check(env, t, body, path)
            c = simplify(conj(exists(vs, guard), forall(vs, implies(guard, d))))
            return self._emit("check-forall-intro", path, c, d)
        if isinstance(t, Lam) and isinstance(ty, Arrow):
            d = self.check({**env, t.var: ty.dom}, t.body, ty.cod, _path(path, 0))
            return self._emit("check-abs", path, d, d)
        if isinstance(t, Lam) and not isinstance(ty, TExists):
            raise TypeCheckError("abstraction checked against a type that is not a function type", path)
        if isinstance(t, If):
            self.require_exists_basic(ty, path)
            c = self.check(env, t.test, bare(BOOL), _path(path, 0))
            d = self.check(env, t.then, ty, _path(path, 1))
            e = self.check(env, t.orelse, ty, _path(path, 2))
            return self._emit("check-if", path, conj(c, d, e), c, d, e)
        if isinstance(t, Let):
            c0, t0 = self._infer(env, t.bound, _path(path, 0))
            opens: list = []
            t0 = self._open_exists(t0, opens)
            d = self.check({**env, t.var: t0}, t.body, ty, _path(path, 1))
            if not opens:
                return self._emit("check-let", path, conj(c0, d), c0, d)
            vs = tuple(v for block, _ in opens for v in block)
            guard = conj(*[g for _, g in opens])
            c = simplify(conj(c0, exists(vs, guard), forall(vs, implies(guard, d))))
            return self._emit("check-exists-elim", path, c, c0, d)
        if isinstance(ty, TExists) and isinstance(t, (Lam, Pair)):
            vs, guard, body = open_binder(ty, self.fresh)
            d = self.check(env, t, body, path)
            c = simplify(exists(vs, conj(d, guard)))
            return self._emit("check-exists-intro", path, c, d)
        c, inferred = self._infer(env, t, path)
        d = simplify(conj(c, self._sub(inferred, ty, path)))
        return self._emit("check-sub", path, d, c)

    def require_exists_basic(self, ty: Type, path: str = "root") -> None:
        if not is_exists_basic(ty, self.solver):
            from .pretty import show_type

            raise TypeCheckError(f"{show_type(ty)} is not an ∃-basic type", path)


def is_exists_basic(ty: Type, solver: Optional[Solver] = None) -> bool:
    """``B`` basic, or ``∃α⃗ P E`` with ``E`` ∃-basic and ``∃α⃗ P`` valid."""
    solver = solver or Solver()
    while isinstance(ty, TExists):
        if not solver.is_valid(exists(ty.vars, ty.guard)):
            return False
        ty = ty.body
    return is_basic(ty)


# ---------------------------------------------------------------------------
# Gate


ACCEPTED = "accepted"
REJECTED = "rejected"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class GateResult:
    status: str
    obligation: Optional[Constraint] = None
    reason: str = ""
    counterexample: Optional[dict] = None
    trace: tuple[TraceStep, ...] = field(default=(), compare=False)

    @property
    def accepted(self) -> bool:
        return self.status == ACCEPTED


def typecheck_gate(
    tau: Mapping[str, Type],
    hypothesis: Constraint,
    env: Mapping[str, Type],
    t: Term,
    ty: Type,
    solver: Optional[Solver] = None,
) -> GateResult:
    """Accept ``hypothesis; env ⊢ t : ty`` when the hypothesis is satisfiable and entails the check."""
    solver = solver or Solver()
    checker = Checker(tau, solver)
    checker.reserve(env, ty, hypothesis)
    try:
        d = checker.check(env, t, ty)
    except TypeCheckError as e:
        return GateResult(REJECTED, None, e.message + f" (at {e.path})", trace=tuple(checker.trace))
    except ResourceExhausted as e:
        return GateResult(UNKNOWN, None, f"solver budget exhausted: {e}", trace=tuple(checker.trace))
    try:
        if not solver.is_satisfiable(hypothesis):
            return GateResult(REJECTED, d, "hypothesis unsatisfiable", trace=tuple(checker.trace))
        if not solver.entails(hypothesis, d):
            cex = solver.counterexample(Implies(hypothesis, d))
            return GateResult(REJECTED, d, "obligation not entailed by the hypothesis", cex, tuple(checker.trace))
    except ResourceExhausted as e:
        return GateResult(UNKNOWN, d, f"solver budget exhausted: {e}", trace=tuple(checker.trace))
    return GateResult(ACCEPTED, d, trace=tuple(checker.trace))


def infer(tau, env, t, solver=None) -> InferResult:
    checker = Checker(tau, solver)
    checker.reserve(env)
    return checker.infer(env, t)


def check(tau, env, t, ty, solver=None) -> Constraint:
    checker = Checker(tau, solver)
    checker.reserve(env, ty)
    return checker.check(env, t, ty)

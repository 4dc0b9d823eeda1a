"""Deciding size constraints.

Constraints over the two-sorted size algebra are translated to linear
integer arithmetic (``max`` and ``le`` expanded, bool-sorted binders split,
nat variables guarded by ``x >= 0``) and decided by quantifier elimination.
"""

from __future__ import annotations

import itertools
from typing import Mapping, Optional, Union

from . import presburger as pa
from .presburger import Budget, Lin, ResourceExhausted
from .syntax import (
    ATOMS, BOOL, NAT, Add, And, BoolConst, CExists, CForall, Constraint, Equal, Falsity, Iff,
    Implies, LeTest, Less, LessEq, Lit, Max, Not, Or, SVar, Truth, check_constraint_sorts,
    constraint_fv, sort_of, subst_constraint, TT, FF, Size,
)

__all__ = [
    "normalize", "eliminate_quantifiers", "is_valid", "is_satisfiable", "entails", "equiv",
    "evaluate", "Solver", "ResourceExhausted", "find_model", "closure_order",
]

Value = Union[int, bool]


def closure_order(c: Constraint) -> list[SVar]:
    return sorted(constraint_fv(c), key=lambda v: (v.name, v.sort))


# ---------------------------------------------------------------------------
# Translation to linear arithmetic


class _Translator:
    def __init__(self, budget: Budget):
        self.budget = budget
        self.counter = itertools.count()

    def fresh(self) -> str:
        return f"%m{next(self.counter)}"

    # nat-sorted size expression -> (linear term, [(m, definition)])
    def nat(self, e: Size, defs: list) -> Lin:
        if isinstance(e, SVar):
            return Lin.var(e.name)
        if isinstance(e, Lit):
            return Lin.constant(e.value)
        if isinstance(e, Add):
            return self.nat(e.left, defs) + self.nat(e.right, defs)
        if isinstance(e, Max):
            a = self.nat(e.left, defs)
            b = self.nat(e.right, defs)
            m = self.fresh()
            mv = Lin.var(m)
            bud = self.budget
            definition = pa.disj(
                [
                    pa.conj([pa.le(b - a, bud), pa.eq(mv - a, bud)], bud),
                    pa.conj([pa.le(a - b + Lin.constant(1), bud), pa.eq(mv - b, bud)], bud),
                ],
                bud,
            )
            defs.append((m, definition))
            return mv
        raise TypeError(f"not a nat size expression: {e!r}")

    def _with_defs(self, atom: pa.Formula, defs: list) -> pa.Formula:
        # innermost max first; each fresh m is bound right around the atom
        for m, definition in reversed(defs):
            atom = pa.Ex(m, pa.conj([definition, atom], self.budget))
        return atom

    def holds(self, e: Size, defs: list) -> pa.Formula:
        """Formula saying that a bool-sorted expression denotes tt."""
        if isinstance(e, BoolConst):
            return pa.TRUE if e.value else pa.FALSE
        if isinstance(e, LeTest):
            return pa.le(self.nat(e.left, defs) - self.nat(e.right, defs), self.budget)
        if isinstance(e, SVar):
            return pa.eq(Lin.var(e.name) - Lin.constant(1), self.budget)
        raise TypeError(f"not a bool size expression: {e!r}")

    def formula(self, c: Constraint) -> pa.Formula:
        b = self.budget
        if isinstance(c, Truth):
            return pa.TRUE
        if isinstance(c, Falsity):
            return pa.FALSE
        if isinstance(c, ATOMS):
            defs: list = []
            if isinstance(c, Equal) and sort_of(c.left) == BOOL:
                p, q = self.holds(c.left, defs), self.holds(c.right, defs)
                atom = pa.disj([pa.conj([p, q], b), pa.conj([pa.Neg(p), pa.Neg(q)], b)], b)
            else:
                diff = self.nat(c.left, defs) - self.nat(c.right, defs)
                if isinstance(c, Equal):
                    atom = pa.eq(diff, b)
                elif isinstance(c, Less):
                    atom = pa.le(diff + Lin.constant(1), b)
                else:
                    atom = pa.le(diff, b)
            return self._with_defs(atom, defs)
        if isinstance(c, And):
            return pa.conj([self.formula(c.left), self.formula(c.right)], b)
        if isinstance(c, Or):
            return pa.disj([self.formula(c.left), self.formula(c.right)], b)
        if isinstance(c, Not):
            return pa.Neg(self.formula(c.arg))
        if isinstance(c, Implies):
            return pa.disj([pa.Neg(self.formula(c.left)), self.formula(c.right)], b)
        if isinstance(c, Iff):
            p, q = self.formula(c.left), self.formula(c.right)
            return pa.disj([pa.conj([p, q], b), pa.conj([pa.Neg(p), pa.Neg(q)], b)], b)
        if isinstance(c, (CExists, CForall)):
            return self.quantified(c)
        raise TypeError(c)

    def quantified(self, c) -> pa.Formula:
        b = self.budget
        is_ex = isinstance(c, CExists)
        vs = list(c.vars)
        bools = [v for v in vs if v.sort == BOOL]
        nats = [v for v in vs if v.sort == NAT]
        if bools:
            # finite domain: split each bool binder into its two values
            branches = []
            for values in itertools.product((TT, FF), repeat=len(bools)):
                body = subst_constraint(c.body, dict(zip(bools, values)))
                branches.append(self.formula(type(c)(tuple(nats), body) if nats else body))
            return pa.disj(branches, b) if is_ex else pa.conj(branches, b)
        # All guards go under the innermost binder so the block stays contiguous.
        body = self.formula(c.body)
        guards = [pa.le(-Lin.var(v.name), b) for v in nats]
        if is_ex:
            body = pa.conj(guards + [body], b)
        else:
            body = pa.disj([pa.Neg(g) for g in guards] + [body], b)
        for v in reversed(nats):
            body = pa.Ex(v.name, body) if is_ex else pa.All(v.name, body)
        return body


def _guards(vs, budget: Budget) -> list[pa.Formula]:
    out = []
    for v in vs:
        out.append(pa.le(-Lin.var(v.name), budget))
        if v.sort == BOOL:
            out.append(pa.le(Lin.var(v.name) - Lin.constant(1), budget))
    return out


def normalize(c: Constraint, budget: Optional[Budget] = None) -> pa.Formula:
    """Equivalent linear-arithmetic formula, with guards for the free variables.

    Free bool variables are encoded as 0/1 integers (1 meaning ``tt``).
    """
    check_constraint_sorts(c)
    budget = budget or Budget()
    tr = _Translator(budget)
    return pa.conj(_guards(closure_order(c), budget) + [tr.formula(c)], budget)


def eliminate_quantifiers(f: pa.Formula, budget: Optional[Budget] = None) -> pa.Formula:
    return pa.eliminate_quantifiers(f, budget)


# ---------------------------------------------------------------------------
# Decisions


def _skeleton(c: Constraint, atoms: dict):
    """Propositional skeleton of ``c``; other nodes become numbered atoms."""
    if isinstance(c, Truth):
        return True
    if isinstance(c, Falsity):
        return False
    if isinstance(c, Not):
        return ("not", _skeleton(c.arg, atoms))
    if isinstance(c, (And, Or, Implies, Iff)):
        return (type(c).__name__, _skeleton(c.left, atoms), _skeleton(c.right, atoms))
    return atoms.setdefault(c, len(atoms))


def _truth(s, row) -> bool:
    if isinstance(s, bool):
        return s
    if isinstance(s, int):
        return row[s]
    if s[0] == "not":
        return not _truth(s[1], row)
    x, y = _truth(s[1], row), _truth(s[2], row)
    return {"And": x and y, "Or": x or y, "Implies": (not x) or y, "Iff": x == y}[s[0]]


def propositional(c: Constraint, max_atoms: int = 10) -> Optional[bool]:
    """True for a tautology, False for a contradiction, None otherwise or if too large."""
    atoms: dict = {}
    s = _skeleton(c, atoms)
    if len(atoms) > max_atoms:
        return None
    values = {_truth(s, row) for row in itertools.product((False, True), repeat=len(atoms))}
    return values.pop() if len(values) == 1 else None


class Solver:
    """Decision procedures sharing a node budget per query and a result cache."""

    def __init__(self, budget: int = 10**7):
        self.budget = budget
        self._cache: dict[tuple[str, Constraint], bool] = {}
        self.queries = 0

    def _decide_closed(self, c: Constraint) -> bool:
        check_constraint_sorts(c)
        budget = Budget(self.budget)
        f = _Translator(budget).formula(c)
        return pa.decide(f, budget)

    def is_valid(self, c: Constraint) -> bool:
        key = ("valid", c)
        if key not in self._cache:
            self.queries += 1
            vs = tuple(closure_order(c))
            if propositional(c) is True:
                self._cache[key] = True
            else:
                self._cache[key] = self._decide_closed(CForall(vs, c) if vs else c)
        return self._cache[key]

    def is_satisfiable(self, c: Constraint) -> bool:
        key = ("sat", c)
        if key not in self._cache:
            self.queries += 1
            vs = tuple(closure_order(c))
            if propositional(c) is False:
                self._cache[key] = False
            else:
                self._cache[key] = self._decide_closed(CExists(vs, c) if vs else c)
        return self._cache[key]

    def entails(self, c: Constraint, d: Constraint) -> bool:
        return self.is_valid(Implies(c, d))

    def equiv(self, c: Constraint, d: Constraint) -> bool:
        return self.is_valid(Iff(c, d))

    def find_model(self, c: Constraint, limit: int = 64) -> Optional[dict[SVar, Value]]:
        """A satisfying valuation of the free variables, searched value by value."""
        if not self.is_satisfiable(c):
            return None
        model: dict[SVar, Value] = {}
        for v in closure_order(c):
            candidates = (TT, FF) if v.sort == BOOL else [Lit(k) for k in range(limit)]
            for value in candidates:
                trial = subst_constraint(c, {v: value})
                if self.is_satisfiable(trial):
                    c = trial
                    model[v] = value.value
                    break
            else:
                return None
        return model

    def counterexample(self, c: Constraint, limit: int = 64) -> Optional[dict[SVar, Value]]:
        """A valuation falsifying ``c``, if one exists with values below ``limit``."""
        return self.find_model(Not(c), limit)


_default = Solver()


def is_valid(c: Constraint) -> bool:
    return _default.is_valid(c)


def is_satisfiable(c: Constraint) -> bool:
    return _default.is_satisfiable(c)


def entails(c: Constraint, d: Constraint) -> bool:
    return _default.entails(c, d)


def equiv(c: Constraint, d: Constraint) -> bool:
    return _default.equiv(c, d)


def find_model(c: Constraint, limit: int = 64):
    return _default.find_model(c, limit)


# ---------------------------------------------------------------------------
# Direct evaluation (the brute-force oracle)


class UnboundedQuantifier(ValueError):
    pass


def eval_size(e: Size, mu: Mapping[SVar, Value]) -> Value:
    if isinstance(e, SVar):
        return mu[e]
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, BoolConst):
        return e.value
    if isinstance(e, Add):
        return eval_size(e.left, mu) + eval_size(e.right, mu)
    if isinstance(e, Max):
        return max(eval_size(e.left, mu), eval_size(e.right, mu))
    if isinstance(e, LeTest):
        return eval_size(e.left, mu) <= eval_size(e.right, mu)
    raise TypeError(e)


def _syntactic_bound(v: SVar, body: Constraint, universal: bool) -> Optional[int]:
    """Literal upper bound on ``v`` read off ``v <= k`` / ``v < k`` conjuncts."""
    if universal:
        if not isinstance(body, Implies):
            return None
        body = body.left
    from .syntax import conjuncts

    best = None
    for c in conjuncts(body):
        if isinstance(c, LessEq) and c.left == v and isinstance(c.right, Lit):
            k = c.right.value
        elif isinstance(c, Less) and c.left == v and isinstance(c.right, Lit):
            k = c.right.value - 1
        else:
            continue
        best = k if best is None else min(best, k)
    return best


def evaluate(c: Constraint, mu: Mapping[SVar, Value], bound: Optional[int] = None) -> bool:
    """``mu ⊨ c`` by recursion; nat quantifiers enumerate ``0..bound``.

    A quantified variable whose body carries a literal bound (``v <= k``
    conjunct, or antecedent for ``forall``) uses that bound instead.
    """
    if isinstance(c, Truth):
        return True
    if isinstance(c, Falsity):
        return False
    if isinstance(c, Equal):
        return eval_size(c.left, mu) == eval_size(c.right, mu)
    if isinstance(c, Less):
        return eval_size(c.left, mu) < eval_size(c.right, mu)
    if isinstance(c, LessEq):
        return eval_size(c.left, mu) <= eval_size(c.right, mu)
    if isinstance(c, And):
        return evaluate(c.left, mu, bound) and evaluate(c.right, mu, bound)
    if isinstance(c, Or):
        return evaluate(c.left, mu, bound) or evaluate(c.right, mu, bound)
    if isinstance(c, Not):
        return not evaluate(c.arg, mu, bound)
    if isinstance(c, Implies):
        return (not evaluate(c.left, mu, bound)) or evaluate(c.right, mu, bound)
    if isinstance(c, Iff):
        return evaluate(c.left, mu, bound) == evaluate(c.right, mu, bound)
    universal = isinstance(c, CForall)
    ranges = []
    for v in c.vars:
        if v.sort == BOOL:
            ranges.append((True, False))
            continue
        k = _syntactic_bound(v, c.body, universal)
        if k is None:
            k = bound
        if k is None:
            raise UnboundedQuantifier(f"quantifier over {v.name} has no bound")
        ranges.append(range(0, max(k, -1) + 1))
    results = (
        evaluate(c.body, {**mu, **dict(zip(c.vars, values))}, bound)
        for values in itertools.product(*ranges)
    )
    return all(results) if universal else any(results)

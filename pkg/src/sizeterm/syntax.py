"""Core abstract syntax: terms, size expressions, constraints and sized types.

All nodes are frozen dataclasses, so values can be shared freely.  Equality
of nodes is structural; use :func:`alpha_equal` / :func:`types_alpha_equal`
/ :func:`constraints_alpha_equal` when bound names must not matter.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

NAT = "nat"
BOOL = "bool"


class SortError(TypeError):
    """A size expression was used at the wrong sort."""


# ---------------------------------------------------------------------------
# Size expressions


@dataclass(frozen=True)
class SVar:
    name: str
    sort: str = NAT

    def __repr__(self) -> str:
        return self.name if self.sort == NAT else f"{self.name}:bool"


@dataclass(frozen=True)
class Lit:
    value: int

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("size literals are natural numbers")


@dataclass(frozen=True)
class Add:
    left: "Size"
    right: "Size"


@dataclass(frozen=True)
class Max:
    left: "Size"
    right: "Size"


@dataclass(frozen=True)
class BoolConst:
    value: bool


@dataclass(frozen=True)
class LeTest:
    """``le(a, b)``: the bool-sorted comparison of two nat sizes."""

    left: "Size"
    right: "Size"


Size = Union[SVar, Lit, Add, Max, BoolConst, LeTest]

ZERO = Lit(0)
ONE = Lit(1)
TT = BoolConst(True)
FF = BoolConst(False)


def sort_of(e: Size) -> str:
    if isinstance(e, SVar):
        return e.sort
    if isinstance(e, (BoolConst, LeTest)):
        return BOOL
    return NAT


def check_size_sort(e: Size) -> str:
    """Return the sort of ``e`` after checking every operator's argument sorts."""
    if isinstance(e, (Add, Max, LeTest)):
        for arg in (e.left, e.right):
            if check_size_sort(arg) != NAT:
                raise SortError(f"nat argument expected in {e}")
    return sort_of(e)


def size_sum(*parts: Size) -> Size:
    """Sum of ``parts`` with literal folding; the empty sum is 0."""
    terms: list[Size] = []
    const = 0
    stack = list(parts)
    while stack:
        p = stack.pop(0)
        if isinstance(p, Add):
            stack[:0] = [p.left, p.right]
        elif isinstance(p, Lit):
            const += p.value
        else:
            terms.append(p)
    if const or not terms:
        terms.append(Lit(const))
    out = terms[0]
    for t in terms[1:]:
        out = Add(out, t)
    return out


def size_max(args: Iterable[Size]) -> Size:
    args = list(args)
    if not args:
        raise ValueError("max of no arguments")
    out = args[0]
    for a in args[1:]:
        out = Max(out, a)
    return out


def scale_size(k: int, e: Size) -> Size:
    """``k * e`` spelled as a repeated sum (the algebra has no product)."""
    if k == 0:
        return ZERO
    return size_sum(*([e] * k))


def simplify_size(e: Size) -> Size:
    if isinstance(e, Add):
        return size_sum(simplify_size(e.left), simplify_size(e.right))
    if isinstance(e, Max):
        left, right = simplify_size(e.left), simplify_size(e.right)
        if left == right:
            return left
        if isinstance(left, Lit) and isinstance(right, Lit):
            return Lit(max(left.value, right.value))
        return Max(left, right)
    if isinstance(e, LeTest):
        left, right = simplify_size(e.left), simplify_size(e.right)
        if isinstance(left, Lit) and isinstance(right, Lit):
            return BoolConst(left.value <= right.value)
        return LeTest(left, right)
    return e


def size_fv(e: Size) -> frozenset[SVar]:
    if isinstance(e, SVar):
        return frozenset([e])
    if isinstance(e, (Add, Max, LeTest)):
        return size_fv(e.left) | size_fv(e.right)
    return frozenset()


# ---------------------------------------------------------------------------
# Constraints


@dataclass(frozen=True)
class Truth:
    pass


@dataclass(frozen=True)
class Falsity:
    pass


TOP = Truth()
BOT = Falsity()


@dataclass(frozen=True)
class Equal:
    left: Size
    right: Size


@dataclass(frozen=True)
class Less:
    left: Size
    right: Size


@dataclass(frozen=True)
class LessEq:
    left: Size
    right: Size


@dataclass(frozen=True)
class And:
    left: "Constraint"
    right: "Constraint"


@dataclass(frozen=True)
class Or:
    left: "Constraint"
    right: "Constraint"


@dataclass(frozen=True)
class Not:
    arg: "Constraint"


@dataclass(frozen=True)
class Implies:
    left: "Constraint"
    right: "Constraint"


@dataclass(frozen=True)
class Iff:
    left: "Constraint"
    right: "Constraint"


@dataclass(frozen=True)
class CExists:
    vars: tuple[SVar, ...]
    body: "Constraint"


@dataclass(frozen=True)
class CForall:
    vars: tuple[SVar, ...]
    body: "Constraint"


Constraint = Union[Truth, Falsity, Equal, Less, LessEq, And, Or, Not, Implies, Iff, CExists, CForall]
ATOMS = (Equal, Less, LessEq)
BINARY = (And, Or, Implies, Iff)


def conj(*cs: Constraint) -> Constraint:
    """Right-nested conjunction, dropping ⊤ and absorbing ⊥."""
    parts: list[Constraint] = []
    for c in cs:
        if isinstance(c, Falsity):
            return BOT
        if not isinstance(c, Truth) and c not in parts:
            parts.append(c)
    if not parts:
        return TOP
    out = parts[-1]
    for c in reversed(parts[:-1]):
        out = And(c, out)
    return out


def disj(*cs: Constraint) -> Constraint:
    parts: list[Constraint] = []
    for c in cs:
        if isinstance(c, Truth):
            return TOP
        if not isinstance(c, Falsity) and c not in parts:
            parts.append(c)
    if not parts:
        return BOT
    out = parts[-1]
    for c in reversed(parts[:-1]):
        out = Or(c, out)
    return out


def implies(c: Constraint, d: Constraint) -> Constraint:
    if isinstance(c, Truth) or isinstance(d, Truth):
        return d
    if isinstance(c, Falsity):
        return TOP
    return Implies(c, d)


def exists(vs: Iterable[SVar], body: Constraint) -> Constraint:
    vs = tuple(v for v in vs if v in constraint_fv(body))
    if not vs:
        return body
    return CExists(vs, body)


def forall(vs: Iterable[SVar], body: Constraint) -> Constraint:
    vs = tuple(v for v in vs if v in constraint_fv(body))
    if not vs:
        return body
    return CForall(vs, body)


def conjuncts(c: Constraint) -> list[Constraint]:
    if isinstance(c, And):
        return conjuncts(c.left) + conjuncts(c.right)
    if isinstance(c, Truth):
        return []
    return [c]


def constraint_fv(c: Constraint) -> frozenset[SVar]:
    if isinstance(c, ATOMS):
        return size_fv(c.left) | size_fv(c.right)
    if isinstance(c, BINARY):
        return constraint_fv(c.left) | constraint_fv(c.right)
    if isinstance(c, Not):
        return constraint_fv(c.arg)
    if isinstance(c, (CExists, CForall)):
        return constraint_fv(c.body) - frozenset(c.vars)
    return frozenset()


def check_constraint_sorts(c: Constraint) -> None:
    if isinstance(c, Equal):
        if check_size_sort(c.left) != check_size_sort(c.right):
            raise SortError(f"equation between different sorts: {c}")
    elif isinstance(c, (Less, LessEq)):
        if check_size_sort(c.left) != NAT or check_size_sort(c.right) != NAT:
            raise SortError(f"comparison of non-nat sizes: {c}")
    elif isinstance(c, BINARY):
        check_constraint_sorts(c.left)
        check_constraint_sorts(c.right)
    elif isinstance(c, Not):
        check_constraint_sorts(c.arg)
    elif isinstance(c, (CExists, CForall)):
        check_constraint_sorts(c.body)


# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class Base:
    name: str
    size: Size


@dataclass(frozen=True)
class Arrow:
    dom: "Type"
    cod: "Type"


@dataclass(frozen=True)
class Prod:
    left: "Type"
    right: "Type"


@dataclass(frozen=True)
class TForall:
    vars: tuple[SVar, ...]
    guard: Constraint
    body: "Type"


@dataclass(frozen=True)
class TExists:
    vars: tuple[SVar, ...]
    guard: Constraint
    body: "Type"


Type = Union[Base, Arrow, Prod, TForall, TExists]


def kappa(type_name: str) -> str:
    """Sort of the annotations carried by a type name."""
    return BOOL if type_name == "bool" else NAT


def bare(type_name: str) -> TExists:
    """The abbreviation ``B`` = ∃α B^α."""
    v = SVar("_s", kappa(type_name))
    return TExists((v,), TOP, Base(type_name, v))


def arrows(*types: Type) -> Type:
    out = types[-1]
    for t in reversed(types[:-1]):
        out = Arrow(t, out)
    return out


def type_fv(t: Type) -> frozenset[SVar]:
    if isinstance(t, Base):
        return size_fv(t.size)
    if isinstance(t, Arrow):
        return type_fv(t.dom) | type_fv(t.cod)
    if isinstance(t, Prod):
        return type_fv(t.left) | type_fv(t.right)
    return (constraint_fv(t.guard) | type_fv(t.body)) - frozenset(t.vars)


def erase(t: Type) -> Type:
    """Forget annotations and quantifiers: the simple type underlying ``t``."""
    if isinstance(t, Base):
        return bare(t.name)
    if isinstance(t, Arrow):
        return Arrow(erase(t.dom), erase(t.cod))
    if isinstance(t, Prod):
        return Prod(erase(t.left), erase(t.right))
    return erase(t.body)


def is_basic(t: Type) -> bool:
    if isinstance(t, Base):
        return True
    if isinstance(t, Prod):
        return is_basic(t.left) and is_basic(t.right)
    return False


def check_type_sorts(t: Type) -> None:
    if isinstance(t, Base):
        if check_size_sort(t.size) != kappa(t.name):
            raise SortError(f"{t.name} must be annotated by a {kappa(t.name)} size")
    elif isinstance(t, Arrow):
        check_type_sorts(t.dom)
        check_type_sorts(t.cod)
    elif isinstance(t, Prod):
        check_type_sorts(t.left)
        check_type_sorts(t.right)
    else:
        check_constraint_sorts(t.guard)
        check_type_sorts(t.body)


# ---------------------------------------------------------------------------
# Size substitution


SizeSubst = Mapping[SVar, Size]


def _prime(name: str, avoid: set[str]) -> str:
    base = name
    while name in avoid:
        name += "'"
    return name if name != base else base + "'"


def _rename_binders(vs, body_fv, subst_fv_names):
    """Pick binder names that do not capture the substitution's range."""
    renaming: dict[SVar, Size] = {}
    new_vs = []
    taken = set(subst_fv_names) | {v.name for v in body_fv}
    for v in vs:
        if v.name in subst_fv_names:
            nv = SVar(_prime(v.name, taken), v.sort)
            taken.add(nv.name)
            renaming[v] = nv
            new_vs.append(nv)
        else:
            new_vs.append(v)
    return tuple(new_vs), renaming


def _check_subst_sorts(phi: SizeSubst) -> None:
    for v, e in phi.items():
        if sort_of(e) != v.sort:
            raise SortError(f"cannot substitute {e!r} for {v!r}: sort mismatch")


def subst_size_expr(e: Size, phi: SizeSubst) -> Size:
    if isinstance(e, SVar):
        return phi.get(e, e)
    if isinstance(e, Add):
        return Add(subst_size_expr(e.left, phi), subst_size_expr(e.right, phi))
    if isinstance(e, Max):
        return Max(subst_size_expr(e.left, phi), subst_size_expr(e.right, phi))
    if isinstance(e, LeTest):
        return LeTest(subst_size_expr(e.left, phi), subst_size_expr(e.right, phi))
    return e


def _range_names(phi: SizeSubst, keys) -> set[str]:
    names: set[str] = set()
    for k in keys:
        names |= {v.name for v in size_fv(phi[k])}
    return names


def subst_constraint(c: Constraint, phi: SizeSubst) -> Constraint:
    if not phi:
        return c
    if isinstance(c, ATOMS):
        return type(c)(subst_size_expr(c.left, phi), subst_size_expr(c.right, phi))
    if isinstance(c, BINARY):
        return type(c)(subst_constraint(c.left, phi), subst_constraint(c.right, phi))
    if isinstance(c, Not):
        return Not(subst_constraint(c.arg, phi))
    if isinstance(c, (CExists, CForall)):
        inner = {k: v for k, v in phi.items() if k not in c.vars}
        live = [k for k in inner if k in constraint_fv(c.body)]
        if not live:
            return c
        inner = {k: inner[k] for k in live}
        vs, ren = _rename_binders(c.vars, constraint_fv(c.body), _range_names(inner, live))
        body = subst_constraint(c.body, ren) if ren else c.body
        return type(c)(vs, subst_constraint(body, inner))
    return c


def subst_type(t: Type, phi: SizeSubst) -> Type:
    if not phi:
        return t
    if isinstance(t, Base):
        return Base(t.name, subst_size_expr(t.size, phi))
    if isinstance(t, Arrow):
        return Arrow(subst_type(t.dom, phi), subst_type(t.cod, phi))
    if isinstance(t, Prod):
        return Prod(subst_type(t.left, phi), subst_type(t.right, phi))
    inner = {k: v for k, v in phi.items() if k not in t.vars}
    fv = constraint_fv(t.guard) | type_fv(t.body)
    live = [k for k in inner if k in fv]
    if not live:
        return t
    inner = {k: inner[k] for k in live}
    vs, ren = _rename_binders(t.vars, fv, _range_names(inner, live))
    guard, body = t.guard, t.body
    if ren:
        guard, body = subst_constraint(guard, ren), subst_type(body, ren)
    return type(t)(vs, subst_constraint(guard, inner), subst_type(body, inner))


def substitute_size(x, phi: SizeSubst):
    """Capture-avoiding size substitution on a type, constraint or size expression."""
    _check_subst_sorts(phi)
    if isinstance(x, (Base, Arrow, Prod, TForall, TExists)):
        return subst_type(x, phi)
    if isinstance(x, (SVar, Lit, Add, Max, BoolConst, LeTest)):
        return subst_size_expr(x, phi)
    return subst_constraint(x, phi)


# ---------------------------------------------------------------------------
# Alpha-equivalence for types and constraints (canonical renaming)


def _canon_size(e: Size, env: dict[SVar, SVar]) -> Size:
    return subst_size_expr(e, env)


def _canon_constraint(c: Constraint, env: dict, depth: list[int]) -> Constraint:
    if isinstance(c, ATOMS):
        return type(c)(_canon_size(c.left, env), _canon_size(c.right, env))
    if isinstance(c, BINARY):
        return type(c)(_canon_constraint(c.left, env, depth), _canon_constraint(c.right, env, depth))
    if isinstance(c, Not):
        return Not(_canon_constraint(c.arg, env, depth))
    if isinstance(c, (CExists, CForall)):
        new_env = dict(env)
        vs = []
        for v in c.vars:
            nv = SVar(f"#{depth[0]}", v.sort)
            depth[0] += 1
            new_env[v] = nv
            vs.append(nv)
        return type(c)(tuple(vs), _canon_constraint(c.body, new_env, depth))
    return c


def _canon_type(t: Type, env: dict, depth: list[int]) -> Type:
    if isinstance(t, Base):
        return Base(t.name, _canon_size(t.size, env))
    if isinstance(t, Arrow):
        return Arrow(_canon_type(t.dom, env, depth), _canon_type(t.cod, env, depth))
    if isinstance(t, Prod):
        return Prod(_canon_type(t.left, env, depth), _canon_type(t.right, env, depth))
    new_env = dict(env)
    vs = []
    for v in t.vars:
        nv = SVar(f"#{depth[0]}", v.sort)
        depth[0] += 1
        new_env[v] = nv
        vs.append(nv)
    return type(t)(tuple(vs), _canon_constraint(t.guard, new_env, depth), _canon_type(t.body, new_env, depth))


def canonical_type(t: Type) -> Type:
    return _canon_type(t, {}, [0])


def canonical_constraint(c: Constraint) -> Constraint:
    return _canon_constraint(c, {}, [0])


def types_alpha_equal(t: Type, u: Type) -> bool:
    return canonical_type(t) == canonical_type(u)


def constraints_alpha_equal(c: Constraint, d: Constraint) -> bool:
    return canonical_constraint(c) == canonical_constraint(d)


# ---------------------------------------------------------------------------
# Fresh names


_TRAILING_INDEX = re.compile(r"(_\d+|'+)$")


class FreshSupply:
    """Deterministic supply of fresh size-variable names.

    Names have the form ``<hint>_<n>``; ``reserved`` names are never produced.
    """

    def __init__(self, reserved: Iterable[str] = ()):
        self.reserved = set(reserved)
        self.counters: dict[str, int] = {}

    def name(self, hint: str = "a") -> str:
        base = _TRAILING_INDEX.sub("", hint.lstrip("_#%")) or "a"
        while True:
            n = self.counters.get(base, 0) + 1
            self.counters[base] = n
            candidate = f"{base}_{n}"
            if candidate not in self.reserved:
                self.reserved.add(candidate)
                return candidate

    def var(self, like: SVar) -> SVar:
        return SVar(self.name(like.name), like.sort)

    def reserve(self, names: Iterable[str]) -> None:
        self.reserved.update(names)


def freshen_binder(vs: tuple[SVar, ...], fresh: FreshSupply) -> tuple[tuple[SVar, ...], dict[SVar, Size]]:
    new = tuple(fresh.var(v) for v in vs)
    return new, dict(zip(vs, new))


# ---------------------------------------------------------------------------
# Terms


def _term_hash(self) -> int:
    """Structural hash, computed once per node (terms are deep and immutable)."""
    h = self.__dict__.get("_hash")
    if h is None:
        h = hash((type(self).__name__, *(v for k, v in self.__dict__.items() if k != "_hash")))
        object.__setattr__(self, "_hash", h)
    return h


@dataclass(frozen=True)
class Var:
    name: str

    __hash__ = _term_hash


@dataclass(frozen=True)
class Cons:
    name: str

    __hash__ = _term_hash


@dataclass(frozen=True)
class Fun:
    name: str

    __hash__ = _term_hash


@dataclass(frozen=True)
class Lam:
    var: str
    body: "Term"

    __hash__ = _term_hash


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"

    __hash__ = _term_hash


@dataclass(frozen=True)
class Pair:
    left: "Term"
    right: "Term"

    __hash__ = _term_hash


@dataclass(frozen=True)
class Fst:
    arg: "Term"

    __hash__ = _term_hash


@dataclass(frozen=True)
class Snd:
    arg: "Term"

    __hash__ = _term_hash


@dataclass(frozen=True)
class Let:
    var: str
    bound: "Term"
    body: "Term"

    __hash__ = _term_hash


@dataclass(frozen=True)
class If:
    test: "Term"
    then: "Term"
    orelse: "Term"

    __hash__ = _term_hash


Term = Union[Var, Cons, Fun, Lam, App, Pair, Fst, Snd, Let, If]

TRUE = Cons("true")
FALSE = Cons("false")


def apply(head: Term, *args: Term) -> Term:
    for a in args:
        head = App(head, a)
    return head


def spine(t: Term) -> tuple[Term, list[Term]]:
    args: list[Term] = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fun
    args.reverse()
    return t, args


def term_fv(t: Term) -> frozenset[str]:
    if isinstance(t, Var):
        return frozenset([t.name])
    if isinstance(t, (Cons, Fun)):
        return frozenset()
    if isinstance(t, Lam):
        return term_fv(t.body) - {t.var}
    if isinstance(t, App):
        return term_fv(t.fun) | term_fv(t.arg)
    if isinstance(t, Pair):
        return term_fv(t.left) | term_fv(t.right)
    if isinstance(t, (Fst, Snd)):
        return term_fv(t.arg)
    if isinstance(t, Let):
        return term_fv(t.bound) | (term_fv(t.body) - {t.var})
    return term_fv(t.test) | term_fv(t.then) | term_fv(t.orelse)


def symbols(t: Term) -> set[str]:
    """Names of constructor and function symbols occurring in ``t``."""
    if isinstance(t, (Cons, Fun)):
        return {t.name}
    if isinstance(t, Var):
        return set()
    out: set[str] = set()
    for child in children(t):
        out |= symbols(child)
    return out


def functions(t: Term) -> set[str]:
    if isinstance(t, Fun):
        return {t.name}
    out: set[str] = set()
    for child in children(t):
        out |= functions(child)
    return out


def children(t: Term) -> tuple[Term, ...]:
    if isinstance(t, Lam):
        return (t.body,)
    if isinstance(t, App):
        return (t.fun, t.arg)
    if isinstance(t, Pair):
        return (t.left, t.right)
    if isinstance(t, (Fst, Snd)):
        return (t.arg,)
    if isinstance(t, Let):
        return (t.bound, t.body)
    if isinstance(t, If):
        return (t.test, t.then, t.orelse)
    return ()


def _fresh_term_var(name: str, avoid: set[str]) -> str:
    base = name.rstrip("'")
    candidate = base + "'"
    while candidate in avoid:
        candidate += "'"
    return candidate


def _subst_binder(var: str, body: Term, sigma: Mapping[str, Term]):
    inner = {k: v for k, v in sigma.items() if k != var}
    body_fv = term_fv(body)
    inner = {k: v for k, v in inner.items() if k in body_fv}
    if not inner:
        return var, body
    range_fv: set[str] = set()
    for v in inner.values():
        range_fv |= term_fv(v)
    if var in range_fv:
        new = _fresh_term_var(var, range_fv | body_fv | set(inner))
        body = substitute_term(body, {var: Var(new)})
        var = new
    return var, substitute_term(body, inner)


def substitute_term(t: Term, sigma: Mapping[str, Term]) -> Term:
    """Capture-avoiding simultaneous substitution."""
    if not sigma:
        return t
    if isinstance(t, Var):
        return sigma.get(t.name, t)
    if isinstance(t, (Cons, Fun)):
        return t
    if isinstance(t, Lam):
        var, body = _subst_binder(t.var, t.body, sigma)
        return Lam(var, body)
    if isinstance(t, App):
        return App(substitute_term(t.fun, sigma), substitute_term(t.arg, sigma))
    if isinstance(t, Pair):
        return Pair(substitute_term(t.left, sigma), substitute_term(t.right, sigma))
    if isinstance(t, Fst):
        return Fst(substitute_term(t.arg, sigma))
    if isinstance(t, Snd):
        return Snd(substitute_term(t.arg, sigma))
    if isinstance(t, Let):
        var, body = _subst_binder(t.var, t.body, sigma)
        return Let(var, substitute_term(t.bound, sigma), body)
    return If(substitute_term(t.test, sigma), substitute_term(t.then, sigma), substitute_term(t.orelse, sigma))


def _alpha(t: Term, u: Term, left: dict, right: dict, depth: int) -> bool:
    if type(t) is not type(u):
        return False
    if isinstance(t, Var):
        lt, ru = left.get(t.name), right.get(u.name)
        if lt is None and ru is None:
            return t.name == u.name
        return lt == ru
    if isinstance(t, (Cons, Fun)):
        return t.name == u.name
    if isinstance(t, Lam):
        return _alpha(t.body, u.body, {**left, t.var: depth}, {**right, u.var: depth}, depth + 1)
    if isinstance(t, Let):
        return _alpha(t.bound, u.bound, left, right, depth) and _alpha(
            t.body, u.body, {**left, t.var: depth}, {**right, u.var: depth}, depth + 1
        )
    return all(_alpha(a, b, left, right, depth) for a, b in zip(children(t), children(u)))


def alpha_equal(t: Term, u: Term) -> bool:
    """Equality of terms modulo renaming of bound variables."""
    return _alpha(t, u, {}, {}, 0)


def is_pattern(t: Term) -> bool:
    head, args = spine(t)
    if isinstance(head, Var):
        return not args
    return isinstance(head, Cons) and all(is_pattern(a) for a in args)


def numeral(n: int) -> Term:
    t: Term = Cons("0")
    for _ in range(n):
        t = App(Cons("s"), t)
    return t


def as_numeral(t: Term) -> Optional[int]:
    n = 0
    while isinstance(t, App) and t.fun == Cons("s"):
        n += 1
        t = t.arg
    return n if t == Cons("0") else None


# ---------------------------------------------------------------------------
# Signatures, rules, measures


CONSTRUCTOR = "constructor"
FUNCTION = "function"


@dataclass(frozen=True)
class SymbolSignature:
    name: str
    kind: str
    type: Type


@dataclass(frozen=True)
class Rule:
    head: str
    args: tuple[Term, ...]
    rhs: Term
    conditions: tuple[tuple[Term, bool], ...] = ()
    line: int = 0

    @property
    def lhs(self) -> Term:
        return apply(Fun(self.head), *self.args)

    def pattern_vars(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for a in self.args:
            out |= term_fv(a)
        return out


LEX = "lex"
LINEAR = "linear"
BOUNDED = "bounded"
TRUSTED = "trusted"


@dataclass(frozen=True)
class MeasureSpec:
    """How the measured size arguments of a function must decrease.

    ``lex``: lexicographic on the tuple; ``linear``: strict decrease of
    ``sum(c_i * a_i)``; ``bounded``: strict decrease of ``bound ∸ sum(c_i * a_i)``;
    ``trusted``: a user-supplied relation over ``n1..nk`` (new) and ``o1..ok`` (old).
    """

    form: str = LEX
    coefficients: tuple[int, ...] = ()
    bound: int = 0
    relation: Optional[Constraint] = field(default=None, compare=False)


class IncompatibleEnvironments(Exception):
    def __init__(self, var: str, left: Type, right: Type):
        super().__init__(f"variable {var} has incompatible types")
        self.var = var
        self.left = left
        self.right = right


def check_compatible(*envs: Mapping[str, Type]) -> dict[str, Type]:
    """Merge environments that agree (up to α) on shared variables."""
    merged: dict[str, Type] = {}
    for env in envs:
        for x, t in env.items():
            if x in merged and not types_alpha_equal(merged[x], t):
                raise IncompatibleEnvironments(x, merged[x], t)
            merged.setdefault(x, t)
    return merged


# ---------------------------------------------------------------------------
# Constructor signatures


class SignatureError(ValueError):
    """A constructor type violates the required shape.

    ``kind`` is one of ``shape``, ``annotation`` or ``precedence``;
    ``position`` names the offending part of the type.
    """

    def __init__(self, kind: str, message: str, position: str = "type"):
        super().__init__(f"{kind} error at {position}: {message}")
        self.kind = kind
        self.position = position


@dataclass(frozen=True)
class ConstructorShape:
    """Decomposition ``C⃗ → ∀α⃗. B⃗^α⃗ → B^a`` of a constructor type."""

    name: str
    nonrecursive: tuple[Type, ...]
    vars: tuple[SVar, ...]
    recursive: tuple[str, ...]
    result: str
    size: Size

    @property
    def arity(self) -> int:
        return len(self.nonrecursive) + len(self.vars)


def type_names(t: Type) -> set[str]:
    if isinstance(t, Base):
        return {t.name}
    if isinstance(t, Arrow):
        return type_names(t.dom) | type_names(t.cod)
    if isinstance(t, Prod):
        return type_names(t.left) | type_names(t.right)
    return type_names(t.body)


def _flatten(e: Size, node) -> list[Size]:
    if isinstance(e, node):
        return _flatten(e.left, node) + _flatten(e.right, node)
    return [e]


def _is_successor_of_max(a: Size, vs: tuple[SVar, ...]) -> bool:
    """``a`` is ``1 + max(vs)`` up to associativity and commutativity."""
    parts = _flatten(a, Add)
    ones = [p for p in parts if p == ONE]
    rest = [p for p in parts if p != ONE]
    if len(ones) != 1 or len(rest) != 1:
        return False
    maxed = _flatten(rest[0], Max)
    return len(maxed) == len(vs) and set(maxed) == set(vs)


def validate_constructor_signature(
    sig: SymbolSignature, below=None, equivalent=None
) -> ConstructorShape:
    """Check a constructor type and return its decomposition.

    ``below(c, b)`` decides ``c <_B b`` and ``equivalent(c, b)`` decides
    ``c ≃_B b``; by default a name is only equivalent to itself and every
    other name is below.
    """
    equivalent = equivalent or (lambda c, b: c == b)
    below = below or (lambda c, b: not equivalent(c, b))
    t = sig.type
    if sig.name in ("true", "false"):
        expected = Base("bool", TT if sig.name == "true" else FF)
        if t != expected:
            raise SignatureError("annotation", f"{sig.name} must have type bool^{'tt' if sig.name == 'true' else 'ff'}")
        return ConstructorShape(sig.name, (), (), (), "bool", expected.size)
    if type_fv(t):
        raise SignatureError("annotation", "constructor types must be closed")
    nonrec: list[Type] = []
    while isinstance(t, Arrow):
        nonrec.append(t.dom)
        t = t.cod
    vs: tuple[SVar, ...] = ()
    rec: list[str] = []
    if isinstance(t, TForall):
        if not isinstance(t.guard, Truth):
            raise SignatureError("shape", "the size quantifier must be unguarded", "quantifier")
        vs = t.vars
        t = t.body
        for i, v in enumerate(vs):
            pos = f"recursive argument {i + 1}"
            if not isinstance(t, Arrow) or not isinstance(t.dom, Base):
                raise SignatureError("shape", f"expected an annotated argument for {v.name}", pos)
            if t.dom.size != v:
                raise SignatureError("annotation", f"argument must be annotated by {v.name}", pos)
            rec.append(t.dom.name)
            t = t.cod
    if not isinstance(t, Base):
        raise SignatureError("shape", "result must be an annotated base type", "result")
    result = t.name
    if result == "bool":
        raise SignatureError("shape", "bool has only the constructors true and false", "result")
    if len(set(vs)) != len(vs):
        raise SignatureError("shape", "repeated size variable", "quantifier")
    if vs and not _is_successor_of_max(t.size, vs):
        names = ", ".join(v.name for v in vs)
        raise SignatureError("annotation", f"result size must be 1 + max({names})", "result")
    if not vs and t.size != ZERO:
        raise SignatureError("annotation", "result size must be 0 without recursive arguments", "result")
    for i, c in enumerate(nonrec):
        for name in sorted(type_names(c)):
            if not below(name, result):
                raise SignatureError(
                    "precedence", f"{name} must be strictly below {result}", f"argument {i + 1}"
                )
    for i, name in enumerate(rec):
        if not equivalent(name, result):
            raise SignatureError(
                "precedence", f"{name} must be equivalent to {result}", f"recursive argument {i + 1}"
            )
    return ConstructorShape(sig.name, tuple(nonrec), vs, tuple(rec), result, t.size)

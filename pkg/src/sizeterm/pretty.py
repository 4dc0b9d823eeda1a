"""Surface-syntax printing for sizes, constraints, types and terms.

Output re-parses with :mod:`sizeterm.parser` to an α-equivalent value.
"""

from __future__ import annotations

from .syntax import (
    Add, And, App, Arrow, Base, BoolConst, CExists, CForall, Cons, Equal, Falsity, Fst, Fun,
    Iff, If, Implies, Lam, LeTest, Less, LessEq, Let, Lit, Max, Not, Or, Pair, Prod, SVar, Snd,
    TExists, TForall, Truth, Var, as_numeral, BOOL,
)


def show_size(e) -> str:
    if isinstance(e, SVar):
        return e.name
    if isinstance(e, Lit):
        return str(e.value)
    if isinstance(e, BoolConst):
        return "tt" if e.value else "ff"
    if isinstance(e, Add):
        right = show_size(e.right)
        if isinstance(e.right, Add):
            right = f"({right})"
        return f"{show_size(e.left)} + {right}"
    if isinstance(e, Max):
        return f"max({show_size(e.left)}, {show_size(e.right)})"
    if isinstance(e, LeTest):
        return f"le({show_size(e.left)}, {show_size(e.right)})"
    raise TypeError(e)


def _show_binders(vs) -> str:
    return " ".join(f"{v.name}:bool" if v.sort == BOOL else v.name for v in vs)


# constraint precedence: iff 1, implies 2, or 3, and 4, not 5, atom 6
def _cprec(c) -> int:
    if isinstance(c, Iff):
        return 1
    if isinstance(c, Implies):
        return 2
    if isinstance(c, Or):
        return 3
    if isinstance(c, And):
        return 4
    if isinstance(c, Not):
        return 5
    if isinstance(c, (CExists, CForall)):
        return 0
    return 6


def show_constraint(c) -> str:
    return _show_c(c, 0)


def _show_c(c, ctx: int) -> str:
    p = _cprec(c)
    if isinstance(c, Truth):
        s = "true"
    elif isinstance(c, Falsity):
        s = "false"
    elif isinstance(c, Equal):
        s = f"{show_size(c.left)} = {show_size(c.right)}"
    elif isinstance(c, Less):
        s = f"{show_size(c.left)} < {show_size(c.right)}"
    elif isinstance(c, LessEq):
        s = f"{show_size(c.left)} <= {show_size(c.right)}"
    elif isinstance(c, Not):
        s = "~" + _show_c(c.arg, 5)
    elif isinstance(c, And):
        s = f"{_show_c(c.left, 5)} & {_show_c(c.right, 4)}"
    elif isinstance(c, Or):
        s = f"{_show_c(c.left, 4)} | {_show_c(c.right, 3)}"
    elif isinstance(c, Implies):
        s = f"{_show_c(c.left, 3)} => {_show_c(c.right, 2)}"
    elif isinstance(c, Iff):
        s = f"{_show_c(c.left, 2)} <=> {_show_c(c.right, 2)}"
    else:
        q = "exists" if isinstance(c, CExists) else "forall"
        s = f"{q} {_show_binders(c.vars)}. {_show_c(c.body, 0)}"
    if p < ctx or (p == 0 and ctx > 0):
        return f"({s})"
    return s


def _is_bare(t) -> bool:
    return (
        isinstance(t, TExists)
        and len(t.vars) == 1
        and isinstance(t.guard, Truth)
        and isinstance(t.body, Base)
        and t.body.size == t.vars[0]
    )


def show_type(t) -> str:
    return _show_t(t, 0)


# type precedence: quantifier 0, arrow 1, product 2, atom 3
def _show_t(t, ctx: int) -> str:
    if _is_bare(t):
        return t.body.name
    if isinstance(t, Base):
        e = t.size
        ann = show_size(e)
        if not isinstance(e, (SVar, Lit, BoolConst, Max, LeTest)):
            ann = f"({ann})"
        return f"{t.name}^{ann}"
    if isinstance(t, Arrow):
        s = f"{_show_t(t.dom, 2)} -> {_show_t(t.cod, 1)}"
        p = 1
    elif isinstance(t, Prod):
        s = f"{_show_t(t.left, 3)} * {_show_t(t.right, 3)}"
        p = 2
    else:
        q = "forall" if isinstance(t, TForall) else "exists"
        guard = "" if isinstance(t.guard, Truth) else f" [{show_constraint(t.guard)}]"
        s = f"{q} {_show_binders(t.vars)}{guard}. {_show_t(t.body, 0)}"
        p = 0
    if p < ctx or (p == 0 and ctx > 0):
        return f"({s})"
    return s


def show_term(t) -> str:
    return _show_term(t, 0)


# term precedence: binder forms 0, application 1, atom 2
def _show_term(t, ctx: int) -> str:
    n = as_numeral(t)
    if n is not None:
        return str(n)
    if isinstance(t, (Var, Cons, Fun)):
        return t.name
    if isinstance(t, Pair):
        return f"({_show_term(t.left, 0)}, {_show_term(t.right, 0)})"
    if isinstance(t, App):
        s, p = f"{_show_term(t.fun, 1)} {_show_term(t.arg, 2)}", 1
    elif isinstance(t, Fst):
        s, p = f"fst {_show_term(t.arg, 2)}", 1
    elif isinstance(t, Snd):
        s, p = f"snd {_show_term(t.arg, 2)}", 1
    elif isinstance(t, Lam):
        s, p = f"fun {t.var} -> {_show_term(t.body, 0)}", 0
    elif isinstance(t, Let):
        s, p = f"let {t.var} = {_show_term(t.bound, 0)} in {_show_term(t.body, 0)}", 0
    elif isinstance(t, If):
        s, p = f"if {_show_term(t.test, 0)} then {_show_term(t.then, 0)} else {_show_term(t.orelse, 0)}", 0
    else:
        raise TypeError(t)
    return f"({s})" if p < ctx else s


def show_rule(rule) -> str:
    from .syntax import apply

    lhs = show_term(apply(Fun(rule.head), *rule.args))
    conds = ", ".join(f"{show_term(t)} = {'true' if v else 'false'}" for t, v in rule.conditions)
    prefix = f"if {conds} => " if conds else ""
    return f"rule {prefix}{lhs} -> {show_term(rule.rhs)};"

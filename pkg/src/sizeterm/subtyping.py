"""Subtyping as constraint generation.

``gen_sub(T, U)`` computes the constraint under which ``T`` is a subtype
of ``U``: annotations at base types must be equal, arrows are
contravariant, and quantifiers on either side become quantifiers of the
generated constraint.  A universal on the left facing an existential on
the right yields the disjunction of both elimination orders.
"""

from __future__ import annotations

from typing import Optional

from .constraints import Solver
from .syntax import (
    TOP, Arrow, Base, CExists, CForall, Constraint, Equal, FreshSupply, Implies, Prod, SVar,
    TExists, TForall, Type, conj, conjuncts, disj, exists, forall, freshen_binder, implies,
    size_fv, subst_constraint, subst_type, type_fv, And, Truth,
)

__all__ = ["SubtypeMismatch", "gen_sub", "check_sub", "simplify", "open_binder"]


class SubtypeMismatch(TypeError):
    """The two types have different shapes, so no constraint can relate them."""

    def __init__(self, left: Type, right: Type):
        from .pretty import show_type

        super().__init__(f"cannot compare {show_type(left)} with {show_type(right)}")
        self.left = left
        self.right = right


def open_binder(t, fresh: FreshSupply):
    """Rename the binder of a quantified type apart; return (vars, guard, body)."""
    vs, phi = freshen_binder(t.vars, fresh)
    return vs, subst_constraint(t.guard, phi), subst_type(t.body, phi)


def _reserve(fresh: FreshSupply, *types: Type) -> None:
    for t in types:
        fresh.reserve(v.name for v in type_fv(t))


def gen_sub(t: Type, u: Type, fresh: Optional[FreshSupply] = None) -> Constraint:
    """The constraint J⟦t ≤ u⟧."""
    if fresh is None:
        fresh = FreshSupply()
        _reserve(fresh, t, u)
    return _sub(t, u, fresh)


def _sub(t: Type, u: Type, fresh: FreshSupply) -> Constraint:
    if isinstance(u, TForall):
        vs, guard, body = open_binder(u, fresh)
        return forall(vs, implies(guard, _sub(t, body, fresh)))
    if isinstance(t, TExists):
        vs, guard, body = open_binder(t, fresh)
        return forall(vs, implies(guard, _sub(body, u, fresh)))
    if isinstance(t, TForall) and isinstance(u, TExists):
        # Both instantiation on the left and introduction on the right apply,
        # and neither order is complete; each derivation is sound, so take both.
        return disj(_instantiate(t, u, fresh), _introduce(t, u, fresh))
    if isinstance(t, TForall):
        return _instantiate(t, u, fresh)
    if isinstance(u, TExists):
        return _introduce(t, u, fresh)
    if isinstance(t, Base) and isinstance(u, Base) and t.name == u.name:
        return Equal(t.size, u.size)
    if isinstance(t, Arrow) and isinstance(u, Arrow):
        return conj(_sub(u.dom, t.dom, fresh), _sub(t.cod, u.cod, fresh))
    if isinstance(t, Prod) and isinstance(u, Prod):
        return conj(_sub(t.left, u.left, fresh), _sub(t.right, u.right, fresh))
    raise SubtypeMismatch(t, u)


def _instantiate(t: TForall, u: Type, fresh: FreshSupply) -> Constraint:
    vs, guard, body = open_binder(t, fresh)
    return exists(vs, conj(guard, _sub(body, u, fresh)))


def _introduce(t: Type, u: TExists, fresh: FreshSupply) -> Constraint:
    vs, guard, body = open_binder(u, fresh)
    return exists(vs, conj(guard, _sub(t, body, fresh)))


def check_sub(c: Constraint, t: Type, u: Type, solver: Optional[Solver] = None) -> bool:
    """``c ⊢ t ≤ u``: the hypothesis entails the subtyping constraint."""
    solver = solver or Solver()
    return solver.entails(c, gen_sub(t, u))


# ---------------------------------------------------------------------------
# Simplification


def _defining_equation(v: SVar, parts: list[Constraint]):
    """Find a conjunct ``v = e`` (or ``e = v``) with ``v`` not in ``e``."""
    for i, c in enumerate(parts):
        if isinstance(c, Equal):
            for lhs, rhs in ((c.left, c.right), (c.right, c.left)):
                if lhs == v and v not in size_fv(rhs):
                    return i, rhs
    return None


def eliminate_equations(vs, parts: list[Constraint], keep_first: bool = False):
    """One-point rule: drop each variable of ``vs`` that has a defining equation.

    Returns (remaining vars, remaining conjuncts, substitution applied).
    """
    vs = list(vs)
    phi: dict = {}
    changed = True
    while changed:
        changed = False
        for v in list(reversed(vs)):
            found = _defining_equation(v, parts)
            if found is None:
                continue
            i, e = found
            step = {v: e}
            parts = [subst_constraint(c, step) for j, c in enumerate(parts) if j != i]
            phi = {k: _subst_size(val, step) for k, val in phi.items()}
            phi[v] = e
            vs.remove(v)
            changed = True
            break
    parts = [c for c in parts if not isinstance(c, Truth)]
    return vs, parts, phi


def _subst_size(e, phi):
    from .syntax import subst_size_expr

    return subst_size_expr(e, phi)


def simplify(c: Constraint) -> Constraint:
    """Equivalence-preserving cleanup: one-point rule and trivial atoms."""
    if isinstance(c, CExists):
        body = simplify(c.body)
        vs, parts, _ = eliminate_equations(c.vars, conjuncts(body))
        parts = [simplify(p) for p in parts]
        return exists(vs, conj(*parts))
    if isinstance(c, CForall):
        body = simplify(c.body)
        if isinstance(body, Implies):
            vs, parts, phi = eliminate_equations(c.vars, conjuncts(body.left))
            rhs = simplify(subst_constraint(body.right, phi))
            return forall(vs, implies(conj(*parts), rhs))
        return forall(c.vars, body)
    if isinstance(c, And):
        return conj(*[simplify(p) for p in conjuncts(c)])
    if isinstance(c, Implies):
        return implies(simplify(c.left), simplify(c.right))
    if isinstance(c, Equal) and c.left == c.right:
        return TOP
    return c

"""Hypothesis strategies for sizes, constraints, types and formulas."""

from __future__ import annotations

from hypothesis import strategies as st

from sizeterm.syntax import (
    TOP, Add, And, Arrow, Base, CExists, CForall, Equal, Implies, Less, LessEq, Lit, Max, Not, Or,
    Prod, SVar, TExists, TForall, scale_size, size_sum,
)

FREE = [SVar("a"), SVar("b"), SVar("c")]


def sizes(names=FREE, max_leaves=3):
    leaf = st.one_of(st.sampled_from(names), st.integers(0, 3).map(Lit))
    return st.recursive(
        leaf,
        lambda inner: st.one_of(
            st.builds(Add, inner, inner),
            st.builds(Max, inner, inner),
        ),
        max_leaves=max_leaves,
    )


def atoms(names=FREE):
    s = sizes(names)
    return st.one_of(st.builds(Equal, s, s), st.builds(Less, s, s), st.builds(LessEq, s, s))


def linear_terms(names, draw):
    coeffs = [draw(st.integers(0, 5)) for _ in names]
    const = draw(st.integers(0, 5))
    parts = [scale_size(k, v) for k, v in zip(coeffs, names) if k]
    return size_sum(Lit(const), *parts) if parts else Lit(const)


@st.composite
def bounded_formulas(draw, free=(SVar("a"), SVar("b")), max_quantifiers=3, depth=3):
    """Formulas with coefficients <= 5 and quantifiers bounded by a literal <= 8."""
    budget = [draw(st.integers(0, max_quantifiers))]

    def go(scope, d):
        choice = draw(st.integers(0, 6 if d > 0 else 0))
        if choice == 0 or d == 0:
            rel = draw(st.sampled_from([Equal, Less, LessEq]))
            return rel(linear_terms(scope, draw), linear_terms(scope, draw))
        if choice == 1:
            return And(go(scope, d - 1), go(scope, d - 1))
        if choice == 2:
            return Or(go(scope, d - 1), go(scope, d - 1))
        if choice == 3:
            return Not(go(scope, d - 1))
        if choice == 4:
            return Implies(go(scope, d - 1), go(scope, d - 1))
        if budget[0] == 0:
            return go(scope, d - 1)
        budget[0] -= 1
        v = SVar(f"q{len(scope)}")
        bound = LessEq(v, Lit(draw(st.integers(0, 8))))
        body = go(scope + [v], d - 1)
        if choice == 5:
            return CExists((v,), And(bound, body))
        return CForall((v,), Implies(bound, body))

    return go(list(free), depth)


def _annot(draw, names):
    kind = draw(st.integers(0, 2))
    if kind == 0:
        return draw(st.sampled_from(names))
    if kind == 1:
        return size_sum(draw(st.sampled_from(names)), Lit(draw(st.integers(1, 2))))
    return Lit(draw(st.integers(0, 2)))


def _guard(draw, v, names, below=True):
    kind = draw(st.integers(0, 2 if below else 1))
    if kind == 0:
        return TOP
    if kind == 1:
        return LessEq(v, _annot(draw, names))
    return Less(_annot(draw, names), v)


def _type(draw, depth, names):
    choice = draw(st.integers(0, 4 if depth > 0 else 0))
    if choice == 0:
        return Base(draw(st.sampled_from(["nat", "list"])), _annot(draw, names))
    if choice == 1:
        return Arrow(_type(draw, depth - 1, names), _type(draw, depth - 1, names))
    if choice == 2:
        return Prod(_type(draw, depth - 1, names), _type(draw, depth - 1, names))
    v = SVar(f"z{len(names)}")  # fresh, so guards never capture an outer name
    body = _type(draw, depth - 1, names + [v])
    cls = TForall if choice == 3 else TExists
    return cls((v,), _guard(draw, v, names), body)


def _reannotate(draw, t, scope):
    if isinstance(t, Base):
        return Base(t.name, _annot(draw, scope))
    if isinstance(t, Arrow):
        return Arrow(_reannotate(draw, t.dom, scope), _reannotate(draw, t.cod, scope))
    if isinstance(t, Prod):
        return Prod(_reannotate(draw, t.left, scope), _reannotate(draw, t.right, scope))
    v = t.vars[0]
    guard = _guard(draw, v, scope, below=False)
    return type(t)((v,), guard, _reannotate(draw, t.body, scope + [v]))


@st.composite
def types(draw, depth=4, names=tuple(FREE)):
    """Well-formed sized types of depth at most ``depth``."""
    return _type(draw, depth, list(names))


@st.composite
def compatible_triples(draw, depth=3):
    """Three types with the same erasure and arbitrary annotations."""
    skeleton = _type(draw, depth, list(FREE))
    return skeleton, _reannotate(draw, skeleton, list(FREE)), _reannotate(draw, skeleton, list(FREE))


@st.composite
def reannotate(draw, t, scope=tuple(FREE)):
    return _reannotate(draw, t, list(scope))


def random_formula(rng, free=(SVar("a"), SVar("b")), max_quantifiers=3, depth=3):
    """Seeded counterpart of ``bounded_formulas`` for fixed-size samples."""
    budget = [rng.randint(0, max_quantifiers)]

    def lin(scope):
        parts = [scale_size(k, v) for v in scope if (k := rng.randint(0, 5))]
        const = Lit(rng.randint(0, 5))
        return size_sum(const, *parts) if parts else const

    def go(scope, d):
        choice = rng.randint(0, 6) if d > 0 else 0
        if choice == 0:
            return rng.choice([Equal, Less, LessEq])(lin(scope), lin(scope))
        if choice == 1:
            return And(go(scope, d - 1), go(scope, d - 1))
        if choice == 2:
            return Or(go(scope, d - 1), go(scope, d - 1))
        if choice == 3:
            return Not(go(scope, d - 1))
        if choice == 4:
            return Implies(go(scope, d - 1), go(scope, d - 1))
        if budget[0] == 0:
            return go(scope, d - 1)
        budget[0] -= 1
        v = SVar(f"q{len(scope)}")
        bound = LessEq(v, Lit(rng.randint(0, 8)))
        body = go(scope + [v], d - 1)
        if choice == 5:
            return CExists((v,), And(bound, body))
        return CForall((v,), Implies(bound, body))

    return go(list(free), depth)

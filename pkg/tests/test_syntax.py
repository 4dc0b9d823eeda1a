from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from strategies import types
from sizeterm.parser import parse_type
from sizeterm.syntax import (
    TOP, Add, App, Base, Cons, IncompatibleEnvironments, Lam, Lit, SVar, SortError, SymbolSignature, TExists,
    TForall, Var, alpha_equal, bare, check_compatible, erase, substitute_size, substitute_term, term_fv,
    types_alpha_equal, validate_constructor_signature,
)

a, b, g, d = SVar("a"), SVar("b"), SVar("g"), SVar("d")


class TestSubstituteTerm:
    def test_bound_variable_untouched(self):
        t = Lam("x", App(Var("x"), Var("y")))
        assert substitute_term(t, {"y": Cons("0")}) == Lam("x", App(Var("x"), Cons("0")))

    def test_variable(self):
        sz = App(Cons("s"), Var("z"))
        assert substitute_term(Var("x"), {"x": sz}) == sz

    def test_capture_avoidance(self):
        out = substitute_term(Lam("x", Var("y")), {"y": Var("x")})
        assert isinstance(out, Lam) and out.var != "x"
        assert out.body == Var("x")
        assert alpha_equal(out, Lam("w", Var("x")))


class TestSubstituteSize:
    def test_base(self):
        assert substitute_size(Base("nat", a), {a: Add(b, Lit(1))}) == Base("nat", Add(b, Lit(1)))

    def test_under_binder(self):
        t = parse_type("forall a [a < g]. nat^a")
        assert types_alpha_equal(substitute_size(t, {g: d}), parse_type("forall a [a < d]. nat^a"))

    def test_bound_shielded(self):
        t = parse_type("exists b [b <= 3]. list^b")
        assert substitute_size(t, {b: Lit(0)}) == t

    def test_sort_mismatch(self):
        with pytest.raises(SortError):
            substitute_size(Base("nat", a), {a: SVar("p", "bool")})


class TestErase:
    def test_minus_signature(self):
        t = parse_type("forall a b. nat^a -> nat^b -> nat^a")
        assert erase(t) == parse_type("nat -> nat -> nat")

    def test_product(self):
        t = parse_type("exists b c [a = b + c]. list^b * list^c")
        assert erase(t) == parse_type("list * list")

    def test_bool(self):
        assert erase(parse_type("bool^tt")) == bare("bool")

    @settings(max_examples=200, deadline=None)
    @given(types())
    def test_idempotent(self, t):
        assert erase(erase(t)) == erase(t)


class TestConstructorSignatures:
    def test_successor(self):
        shape = validate_constructor_signature(SymbolSignature("s", "constructor", parse_type("forall a. nat^a -> nat^(a+1)")))
        assert shape.result == "nat" and len(shape.recursive) == 1

    def test_node(self):
        ty = parse_type("forall a b. tree^a -> tree^b -> tree^(1+max(a,b))")
        shape = validate_constructor_signature(SymbolSignature("node", "constructor", ty))
        assert shape.arity == 2

    def test_nonzero_leaf_rejected(self):
        with pytest.raises(ValueError):
            validate_constructor_signature(SymbolSignature("c", "constructor", parse_type("nat^5")))


class TestCompatible:
    def test_superset(self):
        e = SVar("e_x")
        merged = check_compatible({"x": Base("nat", e)}, {"x": Base("nat", e), "y": Base("list", d)})
        assert set(merged) == {"x", "y"}

    def test_clash(self):
        with pytest.raises(IncompatibleEnvironments):
            check_compatible({"x": Base("nat", a)}, {"x": Base("nat", b)})

    def test_empty(self):
        assert check_compatible({}, {"x": Base("nat", a)}) == {"x": Base("nat", a)}


# -- substitution composition ---------------------------------------------------

NAMES = ["x", "y", "z"]


def small_terms():
    leaf = st.one_of(st.sampled_from(NAMES).map(Var), st.sampled_from(["0", "nil"]).map(Cons))
    return st.recursive(
        leaf,
        lambda inner: st.one_of(
            st.builds(App, inner, inner),
            st.builds(Lam, st.sampled_from(NAMES), inner),
        ),
        max_leaves=6,
    )


def compose(sigma, tau):
    out = {x: substitute_term(t, tau) for x, t in sigma.items()}
    for x, t in tau.items():
        out.setdefault(x, t)
    return out


@settings(max_examples=300, deadline=None)
@given(
    small_terms(),
    st.dictionaries(st.sampled_from(NAMES), small_terms(), max_size=2),
    st.dictionaries(st.sampled_from(NAMES), small_terms(), max_size=2),
)
def test_substitution_composition(t, sigma, tau):
    lhs = substitute_term(substitute_term(t, sigma), tau)
    rhs = substitute_term(t, compose(sigma, tau))
    assert alpha_equal(lhs, rhs)


@settings(max_examples=200, deadline=None)
@given(small_terms(), st.dictionaries(st.sampled_from(NAMES), small_terms(), max_size=2))
def test_substitution_free_variables(t, sigma):
    out = term_fv(substitute_term(t, sigma))
    expected = set()
    for x in term_fv(t):
        expected |= term_fv(sigma[x]) if x in sigma else {x}
    assert out == expected


def test_bare_shape():
    t = bare("nat")
    assert isinstance(t, TExists) and t.guard == TOP
    assert not isinstance(t, TForall)

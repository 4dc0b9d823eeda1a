from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import load
from sizeterm.constraints import Solver
from sizeterm.parser import parse_constraint, parse_environment, parse_term, parse_type
from sizeterm.syntax import BOT, TOP, Lit, SVar, substitute_size, types_alpha_equal
from sizeterm.subtyping import gen_sub
from sizeterm.termination import build_tau_less, function_shape, check_program
from sizeterm.typecheck import (
    ACCEPTED, REJECTED, Checker, TypeCheckError, check, infer, is_exists_basic, typecheck_gate,
)

solver = Solver()
PIVOT = load("pivot")
TAU = PIVOT.tau()
a = SVar("a")
PIVOT_RESULT = "exists b c [a = b + c]. list^b * list^c"
RHS2 = "let z = pivot x l in if inf y x then (cons y (fst z), snd z) else (fst z, cons y (snd z))"


def tau_less():
    shapes = {f: function_shape(f, TAU[f]) for f in PIVOT.functions}
    return build_tau_less(TAU, ["pivot"], shapes, PIVOT.measures["pivot"], (a,))


def term(text):
    return parse_term(text, PIVOT)


def same(c, text):
    return solver.equiv(c, parse_constraint(text))


def test_infer_variable():
    t = parse_type("nat^a")
    res = infer(TAU, {"x": t}, term("x"))
    assert res.constraint == TOP and res.type == t
    assert [s.rule for s in res.trace] == ["infer-var"]


def test_infer_boolean_call():
    env = parse_environment("x : nat, y : nat")
    res = infer(TAU, env, term("inf y x"))
    assert solver.is_valid(res.constraint)
    assert types_alpha_equal(res.type, parse_type("bool"))


def test_tau_less_pivot():
    expected = parse_type("nat -> forall a_1 [a_1 < a]. list^a_1 -> exists b c [a_1 = b + c]. list^b * list^c")
    assert solver.is_valid(gen_sub(tau_less()["pivot"], expected))
    assert solver.is_valid(gen_sub(expected, tau_less()["pivot"]))


def test_infer_recursive_call_guard():
    env = parse_environment("x : nat, l : list^d")
    res = infer(tau_less(), env, term("pivot x l"))
    assert same(res.constraint, "d < a")
    expected = parse_type("exists b c [d = b + c]. list^b * list^c")
    assert solver.is_valid(gen_sub(res.type, expected)) and solver.is_valid(gen_sub(expected, res.type))


def test_check_conditional():
    env = parse_environment("x : nat, y : nat, z : list^b0 * list^g0")
    c = check(tau_less(), env, term("if inf y x then (cons y (fst z), snd z) else (fst z, cons y (snd z))"), parse_type(PIVOT_RESULT))
    assert same(c, "a = b0 + g0 + 1")


def test_gate_accepts_pivot_rule():
    env = parse_environment("x : nat, y : nat, l : list^d")
    res = typecheck_gate(tau_less(), parse_constraint("a = d + 1"), env, term(RHS2), parse_type(PIVOT_RESULT), solver)
    assert res.status == ACCEPTED and res.accepted
    assert solver.entails(parse_constraint("a = d + 1"), res.obligation)


def test_gate_example_let():
    env = parse_environment("x : nat, l : list^a")
    res = typecheck_gate(TAU, TOP, env, term("let z = pivot x l in app (fst z) (snd z)"), parse_type("list^a"), solver)
    assert res.accepted
    names = [s.rule for s in res.trace]
    assert "infer-exists-elim" in names or "check-exists-elim" in names


def test_gate_rejects_false_hypothesis():
    res = typecheck_gate(TAU, BOT, {"x": parse_type("nat^a")}, term("x"), parse_type("nat^a"), solver)
    assert res.status == REJECTED and "unsatisfiable" in res.reason


def test_gate_rejects_size_increase():
    res = typecheck_gate(TAU, TOP, {"x": parse_type("nat^a")}, term("s x"), parse_type("nat^a"), solver)
    assert res.status == REJECTED
    assert res.counterexample is not None and a in res.counterexample


def test_identity():
    c = check(TAU, {}, term("fun x -> x"), parse_type("nat^a -> nat^a"))
    assert solver.is_valid(c)


def test_own_type():
    t = parse_type("forall a. list^a -> list^a")
    assert typecheck_gate(TAU, TOP, {"f": t}, term("f"), t, solver).accepted


def test_abstraction_not_inferable():
    with pytest.raises(TypeCheckError):
        infer(TAU, {}, term("fun x -> x"))


def test_unbound_variable():
    with pytest.raises(TypeCheckError) as info:
        infer(TAU, {}, term("app x x"))
    assert info.value.path.startswith("root")


def test_conditional_needs_basic_target():
    env = parse_environment("x : nat, y : nat")
    with pytest.raises(TypeCheckError):
        check(TAU, env, term("if inf x y then fun z -> z else fun z -> z"), parse_type("nat -> nat"))


def test_exists_basic():
    assert is_exists_basic(parse_type("nat"), solver)
    assert is_exists_basic(parse_type("exists b [b < 3]. nat^b * list^b"), solver)
    assert not is_exists_basic(parse_type("exists b [b < 0]. nat^b"), solver)
    assert not is_exists_basic(parse_type("nat -> nat"), solver)


# -- properties ----------------------------------------------------------------------


def _all_traces():
    for name in ("pivot", "mc91", "filter_pred", "minus_div_bounded", "tree"):
        verdict = check_program(load(name), solver)
        for fv in verdict.functions:
            for rep in fv.rules:
                yield from rep.trace


def test_premises_satisfiable_when_conclusion_is():
    checked = 0
    for step in _all_traces():
        if step.premises and solver.is_satisfiable(step.constraint):
            checked += 1
            assert all(solver.is_satisfiable(p) for p in step.premises), step.rule
    assert checked > 0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 5), st.integers(0, 5))
def test_gate_monotone(lo, extra):
    env = parse_environment("x : nat, y : nat, l : list^d")
    weak = parse_constraint("a = d + 1")
    strong = parse_constraint(f"a = d + 1 & d >= {lo} & d <= {lo + extra}")
    ty = parse_type(PIVOT_RESULT)
    assert typecheck_gate(tau_less(), weak, env, term(RHS2), ty, solver).accepted
    assert typecheck_gate(tau_less(), strong, env, term(RHS2), ty, solver).accepted


@pytest.mark.parametrize("k", [0, 1, 4])
def test_weakening_on_sizes(k):
    env = parse_environment("x : nat, l : list^a")
    t = term("let z = pivot x l in app (fst z) (snd z)")
    ty = parse_type("list^a")
    phi = {a: Lit(k)}
    env_k = {x: substitute_size(u, phi) for x, u in env.items()}
    assert typecheck_gate(TAU, TOP, env, t, ty, solver).accepted
    assert typecheck_gate(TAU, TOP, env_k, t, substitute_size(ty, phi), solver).accepted


def test_checker_paths_are_deterministic():
    env = parse_environment("x : nat, l : list^a")
    t = term("let z = pivot x l in app (fst z) (snd z)")
    runs = []
    for _ in range(2):
        ch = Checker(TAU, solver)
        ch.reserve(env)
        ch.check(env, t, parse_type("list^a"))
        runs.append([(s.rule, s.path, s.constraint) for s in ch.trace])
    assert runs[0] == runs[1]


def test_measure_spec_is_linear():
    m = PIVOT.measures["pivot"]
    assert m.form == "linear" and tuple(m.coefficients) == (1,)

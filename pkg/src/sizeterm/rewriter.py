"""Leftmost-outermost normalization with head-β and conditional rules."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional

from .syntax import (
    FALSE, TRUE, App, Cons, ConstructorShape, Fst, Fun, If, Lam, Let, Pair, Rule,
    Snd, Term, Var, alpha_equal, children, spine, substitute_term,
)

__all__ = [
    "ReductionOutcome", "Step", "head_beta_step", "match_pattern", "step", "normalize",
    "ground_size", "RuleIndex",
]

DEFAULT_FUEL = 10**5


@dataclass(frozen=True)
class Step:
    position: str
    redex: Term
    contractum: Term


@dataclass(frozen=True)
class ReductionOutcome:
    term: Term
    steps: int
    normal: bool
    trace: tuple[Step, ...] = ()

    @property
    def exhausted(self) -> bool:
        return not self.normal


def head_beta_step(t: Term) -> Optional[Term]:
    """Contract ``t`` at the root by one of the head rules, if any applies."""
    if isinstance(t, App) and isinstance(t.fun, Lam):
        return substitute_term(t.fun.body, {t.fun.var: t.arg})
    if isinstance(t, Let):
        return substitute_term(t.body, {t.var: t.bound})
    if isinstance(t, Fst) and isinstance(t.arg, Pair):
        return t.arg.left
    if isinstance(t, Snd) and isinstance(t.arg, Pair):
        return t.arg.right
    if isinstance(t, If) and t.test == TRUE:
        return t.then
    if isinstance(t, If) and t.test == FALSE:
        return t.orelse
    return None


def match_pattern(p: Term, t: Term, sigma: Optional[dict] = None) -> Optional[dict]:
    """Substitution ``σ`` with ``pσ = t``; repeated variables must bind equal terms."""
    sigma = {} if sigma is None else dict(sigma)
    if isinstance(p, Var):
        if p.name in sigma:
            return sigma if alpha_equal(sigma[p.name], t) else None
        sigma[p.name] = t
        return sigma
    if isinstance(p, (Cons, Fun)):
        return sigma if t == p else None
    if isinstance(p, App) and isinstance(t, App):
        sigma = match_pattern(p.fun, t.fun, sigma)
        return None if sigma is None else match_pattern(p.arg, t.arg, sigma)
    return None


class RuleIndex:
    """Rules grouped by head symbol, in declaration order."""

    def __init__(self, rules: Iterable[Rule]):
        self.by_head: dict[str, list[Rule]] = {}
        for r in rules:
            self.by_head.setdefault(r.head, []).append(r)

    def get(self, name: str) -> list[Rule]:
        return self.by_head.get(name, [])


class _Context:
    """Rules, the fuel left, and normal forms of already evaluated conditions."""

    def __init__(self, index: RuleIndex, fuel: int, cache: Optional[dict] = None):
        self.index = index
        self.fuel = fuel
        self.cache: dict[Term, Optional[Term]] = {} if cache is None else cache
        self.normal: set[Term] = set()


def _index(rules) -> RuleIndex:
    return rules if isinstance(rules, RuleIndex) else RuleIndex(rules)


def _rule_step(t: Term, ctx: _Context) -> Optional[Term]:
    head, args = spine(t)
    if not isinstance(head, Fun):
        return None
    for rule in ctx.index.get(head.name):
        if len(rule.args) != len(args):
            continue
        sigma: Optional[dict] = {}
        for p, a in zip(rule.args, args):
            sigma = match_pattern(p, a, sigma)
            if sigma is None:
                break
        if sigma is None:
            continue
        if all(_holds(substitute_term(c, sigma), v, ctx) for c, v in rule.conditions):
            return substitute_term(rule.rhs, sigma)
    return None


def _holds(t: Term, value: bool, ctx: _Context) -> bool:
    out = _evaluate(t, ctx.index, ctx.cache, [ctx.fuel])
    return out is not None and out == (TRUE if value else FALSE)


def _evaluate(t: Term, index: RuleIndex, cache: dict, fuel: list) -> Optional[Term]:
    """Normal form by memoized innermost reduction, or None when ``fuel`` runs out.

    Used for rule conditions only: under confluence every strategy reaches
    the same normal form, and memoization avoids reducing the same argument
    once per enclosing condition.
    """
    if t in cache:
        return cache[t]
    out = _innermost(t, index, cache, fuel)
    if out is not None:
        cache[t] = out
    return out


def _contract(t: Term, index: RuleIndex, cache: dict, fuel: list) -> Optional[Term]:
    """Normal form of ``t`` whose immediate subterms are already normal."""
    new = head_beta_step(t)
    if new is None:
        new = _rule_step(t, _Context(index, fuel[0], cache))
    if new is None:
        return t
    fuel[0] -= 1
    if fuel[0] < 0:
        return None
    return _evaluate(new, index, cache, fuel)


def _innermost(t: Term, index: RuleIndex, cache: dict, fuel: list) -> Optional[Term]:
    if isinstance(t, (Var, Cons, Fun)):
        return t
    if isinstance(t, Let):
        fuel[0] -= 1
        return None if fuel[0] < 0 else _evaluate(head_beta_step(t), index, cache, fuel)
    if isinstance(t, If):
        test = _evaluate(t.test, index, cache, fuel)
        if test is None:
            return None
        if test in (TRUE, FALSE):
            return _contract(If(test, t.then, t.orelse), index, cache, fuel)
    parts = []
    for child in children(t):
        nf = _evaluate(child, index, cache, fuel)
        if nf is None:
            return None
        parts.append(nf)
    u = t
    for i, nf in enumerate(parts):
        u = _replace(u, i, nf)
    return _contract(u, index, cache, fuel)


def _step(t: Term, ctx: _Context, path: str) -> Optional[tuple[Term, Step]]:
    if t in ctx.normal:
        return None
    new = head_beta_step(t)
    if new is None:
        new = _rule_step(t, ctx)
    if new is not None:
        return new, Step(path, t, new)
    for i, child in enumerate(children(t)):
        found = _step(child, ctx, f"{path}.{i}")
        if found is not None:
            return _replace(t, i, found[0]), found[1]
    ctx.normal.add(t)
    return None


def _replace(t: Term, i: int, new: Term) -> Term:
    if isinstance(t, Lam):
        return Lam(t.var, new)
    if isinstance(t, App):
        return App(new, t.arg) if i == 0 else App(t.fun, new)
    if isinstance(t, Pair):
        return Pair(new, t.right) if i == 0 else Pair(t.left, new)
    if isinstance(t, Fst):
        return Fst(new)
    if isinstance(t, Snd):
        return Snd(new)
    if isinstance(t, Let):
        return Let(t.var, new, t.body) if i == 0 else Let(t.var, t.bound, new)
    parts = [t.test, t.then, t.orelse]
    parts[i] = new
    return If(*parts)


def step(t: Term, rules, fuel: int = DEFAULT_FUEL) -> Optional[Term]:
    """One leftmost-outermost step; ``fuel`` bounds the evaluation of each condition."""
    found = _step(t, _Context(_index(rules), fuel), "root")
    return None if found is None else found[0]


def normalize(t: Term, rules, fuel: int = DEFAULT_FUEL, trace: bool = False) -> ReductionOutcome:
    """Reduce ``t`` for at most ``fuel`` steps.

    Each rule condition is evaluated with a sub-fuel equal to the fuel
    left; a condition that runs out blocks the rule.
    """
    return _run(t, _index(rules), fuel, [] if trace else None)


# ---------------------------------------------------------------------------
# Main loop on a mutable tree.  After a contraction at node p every node
# before p in pre-order, except p's ancestors, is still a non-redex, so the
# next leftmost-outermost redex is searched for among the ancestors (top
# down), then in p's subtree, then to the right of p.

_VAR, _CONS, _FUN, _LAM, _APP, _PAIR, _FST, _SND, _LET, _IF = range(10)


class _Node:
    __slots__ = ("kind", "name", "kids", "parent", "idx", "term")

    def __init__(self, kind, name, kids, term=None):
        self.kind = kind
        self.name = name
        self.kids = kids
        self.parent = None
        self.idx = 0
        self.term = term
        for i, k in enumerate(kids):
            k.parent = self
            k.idx = i


def _to_node(t: Term) -> _Node:
    if isinstance(t, Var):
        return _Node(_VAR, t.name, [], t)
    if isinstance(t, Cons):
        return _Node(_CONS, t.name, [], t)
    if isinstance(t, Fun):
        return _Node(_FUN, t.name, [], t)
    if isinstance(t, Lam):
        return _Node(_LAM, t.var, [_to_node(t.body)], t)
    if isinstance(t, App):
        return _Node(_APP, None, [_to_node(t.fun), _to_node(t.arg)], t)
    if isinstance(t, Pair):
        return _Node(_PAIR, None, [_to_node(t.left), _to_node(t.right)], t)
    if isinstance(t, Fst):
        return _Node(_FST, None, [_to_node(t.arg)], t)
    if isinstance(t, Snd):
        return _Node(_SND, None, [_to_node(t.arg)], t)
    if isinstance(t, Let):
        return _Node(_LET, t.var, [_to_node(t.bound), _to_node(t.body)], t)
    return _Node(_IF, None, [_to_node(t.test), _to_node(t.then), _to_node(t.orelse)], t)


def _to_term(n: _Node) -> Term:
    if n.term is not None:
        return n.term
    k = [_to_term(c) for c in n.kids]
    kind = n.kind
    if kind == _APP:
        t = App(k[0], k[1])
    elif kind == _LAM:
        t = Lam(n.name, k[0])
    elif kind == _PAIR:
        t = Pair(k[0], k[1])
    elif kind == _FST:
        t = Fst(k[0])
    elif kind == _SND:
        t = Snd(k[0])
    elif kind == _LET:
        t = Let(n.name, k[0], k[1])
    else:
        t = If(k[0], k[1], k[2])
    n.term = t
    return t


def _depth(p: Term) -> int:
    return 1 + max(_depth(p.fun), _depth(p.arg)) if isinstance(p, App) else 0


def _has_binder(t: Term) -> bool:
    if isinstance(t, (Lam, Let)):
        return True
    return any(_has_binder(c) for c in children(t))


def _instantiate(t: Term, sigma: dict, used: set) -> _Node:
    """Build ``tσ`` for a binder-free ``t``; each matched node is reused once."""
    if isinstance(t, Var) and t.name in sigma:
        n = sigma[t.name]
        if t.name in used:
            return _to_node(_to_term(n))
        used.add(t.name)
        return n
    if isinstance(t, App):
        return _Node(_APP, None, [_instantiate(t.fun, sigma, used), _instantiate(t.arg, sigma, used)])
    if isinstance(t, Pair):
        return _Node(_PAIR, None, [_instantiate(t.left, sigma, used), _instantiate(t.right, sigma, used)])
    if isinstance(t, Fst):
        return _Node(_FST, None, [_instantiate(t.arg, sigma, used)])
    if isinstance(t, Snd):
        return _Node(_SND, None, [_instantiate(t.arg, sigma, used)])
    if isinstance(t, If):
        return _Node(_IF, None, [_instantiate(c, sigma, used) for c in (t.test, t.then, t.orelse)])
    return _to_node(t)


def _match_node(p: Term, n: _Node, sigma: dict) -> bool:
    if isinstance(p, Var):
        if p.name in sigma:
            return alpha_equal(_to_term(sigma[p.name]), _to_term(n))
        sigma[p.name] = n
        return True
    if isinstance(p, Cons):
        return n.kind == _CONS and n.name == p.name
    if isinstance(p, App):
        return n.kind == _APP and _match_node(p.fun, n.kids[0], sigma) and _match_node(p.arg, n.kids[1], sigma)
    return False


class _Engine:
    def __init__(self, index: RuleIndex, fuel: int):
        self.index = index
        self.fuel = fuel
        self.cache: dict = {}
        self.binders: dict = {}
        rules = [r for rs in index.by_head.values() for r in rs]
        self.reach = max([1] + [len(r.args) + max([0] + [_depth(a) for a in r.args]) for r in rules])

    def contract(self, n: _Node) -> Optional[_Node]:
        kind = n.kind
        if kind == _APP:
            head = n.kids[0]
            if head.kind == _LAM:
                return _to_node(head_beta_step(_to_term(n)))
            args = [n.kids[1]]
            while head.kind == _APP:
                args.append(head.kids[1])
                head = head.kids[0]
            if head.kind != _FUN:
                return None
            args.reverse()
            return self.rule(head.name, args)
        if kind == _FUN:
            return self.rule(n.name, [])
        if kind == _LET:
            return _to_node(head_beta_step(_to_term(n)))
        if kind in (_FST, _SND):
            arg = n.kids[0]
            return arg.kids[0 if kind == _FST else 1] if arg.kind == _PAIR else None
        if kind == _IF:
            test = n.kids[0]
            if test.kind == _CONS and test.name in ("true", "false"):
                t = _to_term(test)
                if t == TRUE:
                    return n.kids[1]
                if t == FALSE:
                    return n.kids[2]
        return None

    def rule(self, name: str, args: list) -> Optional[_Node]:
        for r in self.index.get(name):
            if len(r.args) != len(args):
                continue
            sigma: dict = {}
            if not all(_match_node(p, a, sigma) for p, a in zip(r.args, args)):
                continue
            if r.conditions:
                terms = {x: _to_term(v) for x, v in sigma.items()}
                ok = all(
                    _holds(substitute_term(c, terms), v, _Context(self.index, self.fuel, self.cache))
                    for c, v in r.conditions
                )
                if not ok:
                    continue
            binders = self.binders.get(id(r.rhs))
            if binders is None:
                binders = self.binders[id(r.rhs)] = _has_binder(r.rhs)
            if binders:
                return _to_node(substitute_term(r.rhs, {x: _to_term(v) for x, v in sigma.items()}))
            return _instantiate(r.rhs, sigma, set())
        return None

    def search(self, start: _Node):
        stack = [start]
        while stack:
            n = stack.pop()
            new = self.contract(n)
            if new is not None:
                return n, new
            kids = n.kids
            if kids:
                stack.extend(reversed(kids))
        return None

    def next_redex(self, p: _Node):
        near = []
        a = p.parent
        while a is not None and len(near) < self.reach:
            near.append(a)
            a = a.parent
        # An ancestor farther up than any pattern reaches keeps its status:
        # its match is unchanged and, by confluence, so are its conditions.
        for a in reversed(near):
            new = self.contract(a)
            if new is not None:
                return a, new
        found = self.search(p)
        if found is not None:
            return found
        child, a = p, p.parent
        while a is not None:
            for sib in a.kids[child.idx + 1:]:
                found = self.search(sib)
                if found is not None:
                    return found
            child, a = a, a.parent
        return None


def _position(n: _Node) -> str:
    parts = []
    while n.parent is not None:
        parts.append(str(n.idx))
        n = n.parent
    return ".".join(["root", *reversed(parts)])


def _run(t: Term, index: RuleIndex, fuel: int, trace: Optional[list]) -> ReductionOutcome:
    eng = _Engine(index, fuel)
    holder = _Node(-1, None, [_to_node(t)])  # sentinel parent of the root
    holder.parent = None
    count = 0
    found = eng.search(holder.kids[0])
    while found is not None:
        if eng.fuel <= 0:
            return ReductionOutcome(_to_term(holder.kids[0]), count, False, tuple(trace or ()))
        old, new = found
        parent, idx = old.parent, old.idx
        if trace is not None:
            pos = _position(old)
            pos = "root" + pos[len("root.0"):]
            trace.append(Step(pos, _to_term(old), _to_term(new)))
        parent.kids[idx] = new
        new.parent, new.idx = parent, idx
        a = parent
        while a is not None and a.term is not None:
            a.term = None
            a = a.parent
        count += 1
        eng.fuel -= 1
        found = eng.next_redex(new) if parent is not holder else eng.search(new)
    return ReductionOutcome(_to_term(holder.kids[0]), count, True, tuple(trace or ()))


def ground_size(t: Term, shapes: Mapping[str, ConstructorShape]):
    """Size of a ground constructor term: an int, or a bool for booleans."""
    if t == TRUE:
        return True
    if t == FALSE:
        return False
    head, args = spine(t)
    if not isinstance(head, Cons) or head.name not in shapes:
        raise ValueError(f"not a ground constructor term: {t!r}")
    shape = shapes[head.name]
    if len(args) != shape.arity:
        raise ValueError(f"{head.name} expects {shape.arity} arguments")
    sizes = [ground_size(a, shapes) for a in args[len(shape.nonrecursive):]]
    for a in args[: len(shape.nonrecursive)]:
        ground_size(a, shapes)
    if not sizes:
        return 0
    if any(isinstance(s, bool) for s in sizes):
        raise ValueError("recursive argument of boolean sort")
    return 1 + max(sizes)

"""Linear integer arithmetic formulas and Cooper quantifier elimination.

Formulas here range over ℤ.  Atoms are ``t <= 0``, ``t = 0``, ``t != 0``,
``d | t`` and ``not d | t`` for linear terms ``t``.  Smart constructors keep
atoms in a canonical form (gcd-reduced, ground atoms folded) so that the
output of elimination stays small enough for the sizes of formulas the
type checker produces.
"""

from __future__ import annotations

from math import gcd, lcm
from typing import Iterable, Iterator, Mapping, Optional


class ResourceExhausted(Exception):
    """The node budget of a :class:`Budget` ran out."""


class Budget:
    def __init__(self, limit: int = 10**7):
        self.limit = limit
        self.used = 0

    def tick(self, n: int = 1) -> None:
        self.used += n
        if self.used > self.limit:
            raise ResourceExhausted(f"formula node budget of {self.limit} exhausted")


_UNLIMITED = Budget(float("inf"))  # type: ignore[arg-type]


# ---------------------------------------------------------------------------
# Linear terms


class Lin:
    """``sum(c * x) + const`` with integer coefficients; zero coefficients dropped."""

    __slots__ = ("coeffs", "const", "_hash")

    def __init__(self, coeffs: Mapping[str, int] | Iterable[tuple[str, int]] = (), const: int = 0):
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        self.coeffs = tuple(sorted((v, c) for v, c in items if c))
        self.const = const
        self._hash = hash((self.coeffs, const))

    @staticmethod
    def var(name: str) -> "Lin":
        return Lin(((name, 1),))

    @staticmethod
    def constant(k: int) -> "Lin":
        return Lin((), k)

    def __eq__(self, other) -> bool:
        return isinstance(other, Lin) and self.coeffs == other.coeffs and self.const == other.const

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        parts = [f"{c}*{v}" if c != 1 else v for v, c in self.coeffs]
        if self.const or not parts:
            parts.append(str(self.const))
        return " + ".join(parts)

    def coef(self, v: str) -> int:
        for name, c in self.coeffs:
            if name == v:
                return c
        return 0

    def vars(self) -> frozenset[str]:
        return frozenset(v for v, _ in self.coeffs)

    def is_const(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "Lin") -> "Lin":
        acc = dict(self.coeffs)
        for v, c in other.coeffs:
            acc[v] = acc.get(v, 0) + c
        return Lin(acc, self.const + other.const)

    def __neg__(self) -> "Lin":
        return Lin(((v, -c) for v, c in self.coeffs), -self.const)

    def __sub__(self, other: "Lin") -> "Lin":
        return self + (-other)

    def scale(self, k: int) -> "Lin":
        return Lin(((v, c * k) for v, c in self.coeffs), self.const * k)

    def shift(self, k: int) -> "Lin":
        return Lin(self.coeffs, self.const + k)

    def without(self, v: str) -> "Lin":
        return Lin(((n, c) for n, c in self.coeffs if n != v), self.const)

    def with_coef(self, v: str, c: int) -> "Lin":
        acc = dict(self.coeffs)
        acc[v] = c
        return Lin(acc, self.const)

    def subst(self, v: str, t: "Lin") -> "Lin":
        c = self.coef(v)
        if not c:
            return self
        return self.without(v) + t.scale(c)

    def evaluate(self, env: Mapping[str, int]) -> int:
        return self.const + sum(c * env[v] for v, c in self.coeffs)


# ---------------------------------------------------------------------------
# Formulas


class Formula:
    __slots__ = ()

    def free_vars(self) -> frozenset[str]:
        raise NotImplementedError


class _Const(Formula):
    __slots__ = ("value",)

    def __init__(self, value: bool):
        self.value = value

    def __repr__(self) -> str:
        return "T" if self.value else "F"

    def free_vars(self):
        return frozenset()


TRUE = _Const(True)
FALSE = _Const(False)


class Atom(Formula):
    """``kind`` is one of ``le``, ``eq``, ``ne``, ``dvd``, ``ndvd``; ``modulus`` only for divisibility."""

    __slots__ = ("kind", "lin", "modulus", "_hash")

    def __init__(self, kind: str, lin: Lin, modulus: int = 0):
        self.kind = kind
        self.lin = lin
        self.modulus = modulus
        self._hash = hash((kind, lin, modulus))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Atom)
            and self.kind == other.kind
            and self.modulus == other.modulus
            and self.lin == other.lin
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        if self.kind == "le":
            return f"({self.lin} <= 0)"
        if self.kind == "eq":
            return f"({self.lin} = 0)"
        if self.kind == "ne":
            return f"({self.lin} != 0)"
        if self.kind == "dvd":
            return f"({self.modulus} | {self.lin})"
        return f"~({self.modulus} | {self.lin})"

    def free_vars(self):
        return self.lin.vars()


class _Nary(Formula):
    __slots__ = ("args", "_hash", "_fv")

    def __init__(self, args: tuple[Formula, ...]):
        self.args = args
        self._hash = hash((type(self).__name__, args))
        self._fv = None

    def __eq__(self, other) -> bool:
        return type(self) is type(other) and self.args == other.args

    def __hash__(self) -> int:
        return self._hash

    def free_vars(self):
        if self._fv is None:
            out: frozenset[str] = frozenset()
            for a in self.args:
                out |= a.free_vars()
            self._fv = out
        return self._fv


class Conj(_Nary):
    __slots__ = ()

    def __repr__(self) -> str:
        return "(" + " & ".join(map(repr, self.args)) + ")"


class Disj(_Nary):
    __slots__ = ()

    def __repr__(self) -> str:
        return "(" + " | ".join(map(repr, self.args)) + ")"


class Neg(Formula):
    __slots__ = ("arg",)

    def __init__(self, arg: Formula):
        self.arg = arg

    def __eq__(self, other) -> bool:
        return isinstance(other, Neg) and self.arg == other.arg

    def __hash__(self) -> int:
        return hash(("neg", self.arg))

    def __repr__(self) -> str:
        return f"~{self.arg!r}"

    def free_vars(self):
        return self.arg.free_vars()


class Quant(Formula):
    __slots__ = ("var", "body")
    symbol = "?"

    def __init__(self, var: str, body: Formula):
        self.var = var
        self.body = body

    def __eq__(self, other) -> bool:
        return type(self) is type(other) and self.var == other.var and self.body == other.body

    def __hash__(self) -> int:
        return hash((self.symbol, self.var, self.body))

    def __repr__(self) -> str:
        return f"({self.symbol}{self.var}. {self.body!r})"

    def free_vars(self):
        return self.body.free_vars() - {self.var}


class Ex(Quant):
    __slots__ = ()
    symbol = "E"


class All(Quant):
    __slots__ = ()
    symbol = "A"


# ---------------------------------------------------------------------------
# Smart constructors


def _content(lin: Lin) -> int:
    g = 0
    for _, c in lin.coeffs:
        g = gcd(g, c)
    return g


def le(lin: Lin, budget: Budget = _UNLIMITED) -> Formula:
    """``lin <= 0``."""
    if lin.is_const():
        return TRUE if lin.const <= 0 else FALSE
    g = _content(lin)
    if g > 1:
        lin = Lin(((v, c // g) for v, c in lin.coeffs), -((-lin.const) // g))
    budget.tick()
    return Atom("le", lin)


def _sign_normal(lin: Lin) -> Lin:
    return -lin if lin.coeffs and lin.coeffs[0][1] < 0 else lin


def eq(lin: Lin, budget: Budget = _UNLIMITED) -> Formula:
    if lin.is_const():
        return TRUE if lin.const == 0 else FALSE
    g = _content(lin)
    if lin.const % g:
        return FALSE
    if g > 1:
        lin = Lin(((v, c // g) for v, c in lin.coeffs), lin.const // g)
    budget.tick()
    return Atom("eq", _sign_normal(lin))


def ne(lin: Lin, budget: Budget = _UNLIMITED) -> Formula:
    return negate(eq(lin, budget), budget)


def _residue(c: int, d: int) -> int:
    r = c % d
    return r - d if r > d // 2 else r


def dvd(d: int, lin: Lin, budget: Budget = _UNLIMITED, negated: bool = False) -> Formula:
    d = abs(d)
    if d == 0:
        f = eq(lin, budget)
        return negate(f, budget) if negated else f
    lin = Lin(((v, _residue(c, d)) for v, c in lin.coeffs), lin.const % d)
    if lin.is_const() or d == 1:
        holds = lin.const % d == 0
        return TRUE if holds != negated else FALSE
    g = gcd(d, _content(lin), lin.const)
    if g > 1:
        d //= g
        lin = Lin(((v, c // g) for v, c in lin.coeffs), lin.const // g)
    budget.tick()
    return Atom("ndvd" if negated else "dvd", lin, d)


def _flatten(cls, args: Iterable[Formula]) -> Iterator[Formula]:
    for a in args:
        if isinstance(a, cls):
            yield from a.args
        else:
            yield a


def conj(args: Iterable[Formula], budget: Budget = _UNLIMITED) -> Formula:
    seen: dict[Formula, None] = {}
    for a in _flatten(Conj, args):
        if a is FALSE:
            return FALSE
        if a is TRUE:
            continue
        seen[a] = None
    if not seen:
        return TRUE
    parts = tuple(seen)
    if len(parts) == 1:
        return parts[0]
    atoms = {p for p in parts if isinstance(p, Atom)}
    for p in atoms:
        if _complement(p) in atoms:
            return FALSE
    budget.tick(len(parts))
    return Conj(parts)


def disj(args: Iterable[Formula], budget: Budget = _UNLIMITED) -> Formula:
    seen: dict[Formula, None] = {}
    for a in _flatten(Disj, args):
        if a is TRUE:
            return TRUE
        if a is FALSE:
            continue
        seen[a] = None
    if not seen:
        return FALSE
    parts = tuple(seen)
    if len(parts) == 1:
        return parts[0]
    atoms = {p for p in parts if isinstance(p, Atom)}
    for p in atoms:
        if _complement(p) in atoms:
            return TRUE
    budget.tick(len(parts))
    return Disj(parts)


def _complement(a: Atom) -> Formula:
    if a.kind == "le":
        return Atom("le", (-a.lin).shift(1)) if _content(a.lin) == 1 else None
    if a.kind == "eq":
        return Atom("ne", a.lin)
    if a.kind == "ne":
        return Atom("eq", a.lin)
    if a.kind == "dvd":
        return Atom("ndvd", a.lin, a.modulus)
    return Atom("dvd", a.lin, a.modulus)


def negate(f: Formula, budget: Budget = _UNLIMITED) -> Formula:
    """Negation pushed to the atoms (for quantifier-free formulas)."""
    if f is TRUE:
        return FALSE
    if f is FALSE:
        return TRUE
    if isinstance(f, Atom):
        if f.kind == "le":
            return le((-f.lin).shift(1), budget)
        if f.kind == "eq":
            budget.tick()
            return Atom("ne", f.lin)
        if f.kind == "ne":
            budget.tick()
            return Atom("eq", f.lin)
        if f.kind == "dvd":
            budget.tick()
            return Atom("ndvd", f.lin, f.modulus)
        budget.tick()
        return Atom("dvd", f.lin, f.modulus)
    if isinstance(f, Conj):
        return disj((negate(a, budget) for a in f.args), budget)
    if isinstance(f, Disj):
        return conj((negate(a, budget) for a in f.args), budget)
    if isinstance(f, Neg):
        return f.arg
    return Neg(f)


def map_atoms(f: Formula, fn, budget: Budget = _UNLIMITED) -> Formula:
    if isinstance(f, Atom):
        return fn(f)
    if isinstance(f, Conj):
        return conj((map_atoms(a, fn, budget) for a in f.args), budget)
    if isinstance(f, Disj):
        return disj((map_atoms(a, fn, budget) for a in f.args), budget)
    if isinstance(f, Neg):
        return Neg(map_atoms(f.arg, fn, budget))
    if isinstance(f, Quant):
        return type(f)(f.var, map_atoms(f.body, fn, budget))
    return f


def remake(kind: str, lin: Lin, modulus: int = 0, budget: Budget = _UNLIMITED) -> Formula:
    if kind == "le":
        return le(lin, budget)
    if kind == "eq":
        return eq(lin, budget)
    if kind == "ne":
        return ne(lin, budget)
    return dvd(modulus, lin, budget, negated=(kind == "ndvd"))


def subst(f: Formula, v: str, t: Lin, budget: Budget = _UNLIMITED) -> Formula:
    """Replace variable ``v`` by the linear term ``t``."""
    if v not in f.free_vars():
        return f

    def fn(a: Atom) -> Formula:
        c = a.lin.coef(v)
        if not c:
            return a
        return remake(a.kind, a.lin.subst(v, t), a.modulus, budget)

    if isinstance(f, Quant) and f.var == v:
        return f
    return map_atoms(f, fn, budget)


def size(f: Formula) -> int:
    if isinstance(f, _Nary):
        return 1 + sum(size(a) for a in f.args)
    if isinstance(f, (Neg,)):
        return 1 + size(f.arg)
    if isinstance(f, Quant):
        return 1 + size(f.body)
    return 1


def atoms(f: Formula) -> Iterator[Atom]:
    if isinstance(f, Atom):
        yield f
    elif isinstance(f, _Nary):
        for a in f.args:
            yield from atoms(a)
    elif isinstance(f, Neg):
        yield from atoms(f.arg)
    elif isinstance(f, Quant):
        yield from atoms(f.body)


# ---------------------------------------------------------------------------
# Evaluation (brute force; quantifiers range over ``domain``)


def evaluate(f: Formula, env: Mapping[str, int], domain: Optional[range] = None) -> bool:
    if isinstance(f, _Const):
        return f.value
    if isinstance(f, Atom):
        val = f.lin.evaluate(env)
        if f.kind == "le":
            return val <= 0
        if f.kind == "eq":
            return val == 0
        if f.kind == "ne":
            return val != 0
        if f.kind == "dvd":
            return val % f.modulus == 0
        return val % f.modulus != 0
    if isinstance(f, Conj):
        return all(evaluate(a, env, domain) for a in f.args)
    if isinstance(f, Disj):
        return any(evaluate(a, env, domain) for a in f.args)
    if isinstance(f, Neg):
        return not evaluate(f.arg, env, domain)
    if isinstance(f, Quant):
        if domain is None:
            raise ValueError(f"unbounded quantifier over {f.var} needs a domain")
        results = (evaluate(f.body, {**env, f.var: k}, domain) for k in domain)
        return any(results) if isinstance(f, Ex) else all(results)
    raise TypeError(f)


# ---------------------------------------------------------------------------
# Quantifier elimination


def _constant_range(v: str, parts) -> Optional[range]:
    """Values of ``v`` allowed by conjuncts ``v <= k`` and ``k <= v`` with literal ``k``."""
    lo = hi = None
    for a in parts:
        if not (isinstance(a, Atom) and a.kind == "le" and a.lin.vars() == {v}):
            continue
        c = a.lin.coef(v)
        if c == 1:
            hi = -a.lin.const if hi is None else min(hi, -a.lin.const)
        elif c == -1:
            lo = a.lin.const if lo is None else max(lo, a.lin.const)
    if lo is None or hi is None:
        return None
    return range(lo, hi + 1)


_MAX_SPLIT = 64


def _cost(v: str, phi: Formula) -> int:
    """Least common multiple of the coefficients of ``v``: Cooper's case count scales with it."""
    m = 1
    for a in atoms(phi):
        c = abs(a.lin.coef(v))
        if c:
            m = lcm(m, c)
    return m


class Eliminator:
    """Cooper's procedure; one instance per decision so the budget is per query."""

    def __init__(self, budget: Optional[Budget] = None):
        self.budget = budget or Budget()

    def eliminate(self, f: Formula) -> Formula:
        b = self.budget
        if isinstance(f, (Atom, _Const)):
            return f
        if isinstance(f, Conj):
            return conj((self.eliminate(a) for a in f.args), b)
        if isinstance(f, Disj):
            return disj((self.eliminate(a) for a in f.args), b)
        if isinstance(f, Neg):
            return negate(self.eliminate(f.arg), b)
        if isinstance(f, (Ex, All)):
            kind, vs = type(f), []
            while isinstance(f, kind):
                vs.append(f.var)
                f = f.body
            body = self.eliminate(f)
            if kind is All:
                body = negate(body, b)
            body = self.exists_block(vs, body)
            return negate(body, b) if kind is All else body
        raise TypeError(f)

    def exists_block(self, vs: list[str], phi: Formula) -> Formula:
        """``∃vs. φ``; quantifiers of one block commute, so the cheapest goes first."""
        vs = list(vs)
        while vs:
            v = min(vs, key=lambda x: (_cost(x, phi), vs.index(x)))
            vs.remove(v)
            phi = self.exists(v, phi)
        return phi

    # -- ∃v. φ with φ quantifier-free and negation-free
    def exists(self, v: str, phi: Formula) -> Formula:
        b = self.budget
        if v not in phi.free_vars():
            return phi
        if isinstance(phi, Disj):
            return disj((self.exists(v, d) for d in phi.args), b)
        if isinstance(phi, Conj):
            indep = [a for a in phi.args if v not in a.free_vars()]
            dep = [a for a in phi.args if v in a.free_vars()]
            if indep:
                return conj(indep + [self.exists(v, conj(dep, b))], b)
            eqs = [a for a in dep if isinstance(a, Atom) and a.kind == "eq"]
            if eqs:
                a = min(eqs, key=lambda x: abs(x.lin.coef(v)))
                rest = [x for x in dep if x is not a]
                return self._solve_equation(v, a, conj(rest, b))
            if all(isinstance(a, Atom) and a.kind == "le" and abs(a.lin.coef(v)) == 1 for a in dep):
                return self._shadow(v, dep)
            span = _constant_range(v, dep)
            if span is not None and len(span) <= 16:
                body = conj(dep, b)
                return disj((subst(body, v, Lin.constant(k), b) for k in span), b)
            # Splitting every disjunctive conjunct multiplies the branches, so
            # only split while the product stays small; Cooper handles the rest.
            branches = 1
            for a in dep:
                if isinstance(a, Disj):
                    branches *= len(a.args)
            if branches <= _MAX_SPLIT:
                for i, a in enumerate(dep):
                    if isinstance(a, Disj):
                        rest = dep[:i] + dep[i + 1:]
                        return disj((self.exists(v, conj([d] + rest, b)) for d in a.args), b)
        if isinstance(phi, Atom) and phi.kind == "eq":
            return self._solve_equation(v, phi, TRUE)
        if isinstance(phi, Atom) and phi.kind == "le" and abs(phi.lin.coef(v)) == 1:
            return TRUE
        return self._cooper(v, phi)

    def _solve_equation(self, v: str, equation: Atom, phi: Formula) -> Formula:
        """``∃v. c*v + r = 0 ∧ φ`` as ``c | r ∧ φ[c*v := -r]``."""
        b = self.budget
        c = equation.lin.coef(v)
        r = equation.lin.without(v)
        if c < 0:
            c, r = -c, -r
        value = -r

        def fn(a: Atom) -> Formula:
            k = a.lin.coef(v)
            if not k:
                return a
            lin = a.lin.without(v).scale(c) + value.scale(k)
            return remake(a.kind, lin, a.modulus * c, b)

        return conj([dvd(c, r, b), map_atoms(phi, fn, b)], b)

    def _shadow(self, v: str, dep: list) -> Formula:
        """Exact projection when every bound on ``v`` has coefficient ±1."""
        b = self.budget
        lower = [a.lin.without(v) for a in dep if a.lin.coef(v) < 0]  # rest <= v
        upper = [a.lin.without(v) for a in dep if a.lin.coef(v) > 0]  # v <= -rest
        return conj((le(lo + up, b) for lo in lower for up in upper), b)

    def _cooper(self, v: str, phi: Formula) -> Formula:
        b = self.budget
        coefs = {abs(a.lin.coef(v)) for a in atoms(phi) if a.lin.coef(v)}
        m = 1
        for c in coefs:
            m = lcm(m, c)

        def unit(a: Atom) -> Formula:
            c = a.lin.coef(v)
            if not c:
                return a
            k = m // abs(c)
            lin = a.lin.scale(k).with_coef(v, 1 if c > 0 else -1)
            return Atom(a.kind, lin, a.modulus * k)

        if m > 1:
            phi = conj([map_atoms(phi, unit, b), Atom("dvd", Lin.var(v), m)], b)
        delta = 1
        lower: list[Lin] = []
        upper: list[Lin] = []
        for a in atoms(phi):
            c = a.lin.coef(v)
            if not c:
                continue
            rest = a.lin.without(v)
            if a.kind in ("dvd", "ndvd"):
                delta = lcm(delta, a.modulus)
            elif a.kind == "le":
                # c*v + rest <= 0
                if c > 0:
                    upper.append((-rest).shift(1))
                else:
                    lower.append(rest.shift(-1))
            else:
                value = -rest if c > 0 else rest
                if a.kind == "eq":
                    lower.append(value.shift(-1))
                    upper.append(value.shift(1))
                else:
                    lower.append(value)
                    upper.append(value)
        lower = list(dict.fromkeys(lower))
        upper = list(dict.fromkeys(upper))
        use_lower = len(lower) <= len(upper)
        bounds = lower if use_lower else upper
        sign = 1 if use_lower else -1

        def at_infinity(a: Atom) -> Formula:
            c = a.lin.coef(v)
            if not c or a.kind in ("dvd", "ndvd"):
                return a
            if a.kind == "le":
                return TRUE if (c > 0) == use_lower else FALSE
            return FALSE if a.kind == "eq" else TRUE

        phi_inf = map_atoms(phi, at_infinity, b)
        out: list[Formula] = []
        for j in range(1, delta + 1):
            if phi_inf is not FALSE:
                out.append(subst(phi_inf, v, Lin.constant(sign * j), b))
                if out[-1] is TRUE:
                    return TRUE
            for t in bounds:
                out.append(subst(phi, v, t.shift(sign * j), b))
                if out[-1] is TRUE:
                    return TRUE
        return disj(out, b)


def eliminate_quantifiers(f: Formula, budget: Optional[Budget] = None) -> Formula:
    """Equivalent quantifier-free formula (divisibility atoms may appear)."""
    return Eliminator(budget).eliminate(f)


def decide(f: Formula, budget: Optional[Budget] = None) -> bool:
    """Truth value of a closed formula."""
    out = eliminate_quantifiers(f, budget)
    if out is TRUE:
        return True
    if out is FALSE:
        return False
    raise ValueError(f"formula is not closed: free {sorted(out.free_vars())}")

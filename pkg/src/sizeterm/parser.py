"""Surface language: lexer, recursive-descent parser and program validation.

Declarations::

    type list;                                   // type names (bool is built in)
    constructor cons : nat -> forall a. list^a -> list^(a+1);
    function app : forall b c. list^b -> list^c -> list^(b+c);
    measure app : lex;                           // lex | linear(...) | bounded(k, ...) | trusted [C]
    precedence div > minus;                      // optional, checked against the call graph
    rule if inf y x = true => f (cons y l) -> r;
    eval app nil nil;

See the README for the full grammar.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Optional

from .precedence import Precedence, PrecedenceError
from .syntax import (
    BOOL, BOUNDED, CONSTRUCTOR, FF, FUNCTION, LEX, LINEAR, NAT, TOP, TRUSTED, TT, Add, And, App,
    Arrow, Base, BoolConst, CExists, CForall, Cons, ConstructorShape, Equal, Falsity, Fst, Fun,
    Iff, If, Implies, Lam, LeTest, Less, LessEq, Let, Lit, Max, MeasureSpec, Not, Or, Pair, Prod,
    Rule, SignatureError, Snd, SortError, SVar, SymbolSignature, TExists, TForall, Var, bare,
    check_constraint_sorts, check_type_sorts, constraint_fv, is_pattern, numeral, spine,
    subst_constraint, subst_type, term_fv, type_fv, type_names, validate_constructor_signature,
)

__all__ = [
    "ParseError", "Program", "parse_program", "parse_term", "parse_type", "parse_constraint",
    "parse_environment", "parse_size",
]


class ParseError(Exception):
    """Input error with a 1-based source position."""

    def __init__(self, message: str, line: int = 1, col: int = 1):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# Lexer

KEYWORDS = {
    "type", "constructor", "function", "measure", "rule", "precedence", "eval", "if", "then",
    "else", "fun", "let", "in", "fst", "snd", "forall", "exists", "true", "false", "tt", "ff",
    "max", "le",
}

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*|/\*(?:.|\n)*?\*/)
  | (?P<int>[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op><=>|->|=>|<=|>=|!=|[=<>~&|()\[\]{},;:.^+*])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident, int, op, kw, eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            if text.startswith("/*", pos):
                raise ParseError("unterminated comment", line, pos - line_start + 1)
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        value = m.group()
        if kind not in ("ws", "comment"):
            if kind == "ident" and value in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, value, line, pos - line_start + 1))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# ---------------------------------------------------------------------------
# Program


@dataclass(frozen=True)
class Program:
    types: tuple[str, ...] = ("bool",)
    type_edges: tuple[tuple[str, str], ...] = ()
    signatures: dict[str, SymbolSignature] = field(default_factory=dict)
    measures: dict[str, MeasureSpec] = field(default_factory=dict)
    rules: tuple[Rule, ...] = ()
    precedences: tuple[tuple[str, str, str], ...] = ()
    queries: tuple = ()
    shapes: dict[str, ConstructorShape] = field(default_factory=dict)
    type_order: Optional[Precedence] = None

    def kind(self, name: str) -> Optional[str]:
        sig = self.signatures.get(name)
        return sig.kind if sig else None

    def type_of(self, name: str):
        return self.signatures[name].type

    @property
    def constructors(self) -> list[str]:
        return [n for n, s in self.signatures.items() if s.kind == CONSTRUCTOR]

    @property
    def functions(self) -> list[str]:
        return [n for n, s in self.signatures.items() if s.kind == FUNCTION]

    def rules_for(self, f: str) -> list[Rule]:
        return [r for r in self.rules if r.head == f]

    def tau(self) -> dict:
        return {n: s.type for n, s in self.signatures.items()}


BUILTIN_SIGNATURES = {
    "true": SymbolSignature("true", CONSTRUCTOR, Base("bool", TT)),
    "false": SymbolSignature("false", CONSTRUCTOR, Base("bool", FF)),
}


# ---------------------------------------------------------------------------
# Sort inference for size variables


def _bool_used(x, out: set[str], shadow: frozenset = frozenset()) -> None:
    """Collect names of nat-sorted variables that occur in a bool position."""

    def var_name(e):
        if isinstance(e, SVar) and e.sort == NAT and e.name not in shadow:
            return e.name
        return None

    if isinstance(x, Base):
        if x.name == "bool" and var_name(x.size):
            out.add(x.size.name)
    elif isinstance(x, Equal):
        ls, rs = var_name(x.left), var_name(x.right)
        if isinstance(x.right, (BoolConst, LeTest)) or (isinstance(x.right, SVar) and x.right.sort == BOOL) or (rs and rs in out):
            if ls:
                out.add(ls)
        if isinstance(x.left, (BoolConst, LeTest)) or (isinstance(x.left, SVar) and x.left.sort == BOOL) or (ls and ls in out):
            if rs:
                out.add(rs)
    elif isinstance(x, (Arrow,)):
        _bool_used(x.dom, out, shadow)
        _bool_used(x.cod, out, shadow)
    elif isinstance(x, (Prod, And, Or, Implies, Iff)):
        _bool_used(x.left, out, shadow)
        _bool_used(x.right, out, shadow)
    elif isinstance(x, Not):
        _bool_used(x.arg, out, shadow)
    elif isinstance(x, (TForall, TExists)):
        inner = shadow | {v.name for v in x.vars}
        _bool_used(x.guard, out, inner)
        _bool_used(x.body, out, inner)
    elif isinstance(x, (CExists, CForall)):
        _bool_used(x.body, out, shadow | {v.name for v in x.vars})


def _infer_bool(parts) -> set[str]:
    out: set[str] = set()
    while True:
        before = len(out)
        for p in parts:
            _bool_used(p, out)
        if len(out) == before:
            return out


def _retype(x, names: set[str]):
    phi = {SVar(n, NAT): SVar(n, BOOL) for n in names}
    if isinstance(x, (Base, Arrow, Prod, TForall, TExists)):
        return subst_type(x, phi)
    return subst_constraint(x, phi)


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.bare_counter = 0

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("op", "kw") and t.text in texts

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        return ParseError(f"{message} (found {found})", tok.line, tok.col)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}")
        return self.advance()

    def ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "ident":
            raise self.error(f"expected {what}")
        return self.advance()

    def integer(self) -> int:
        if self.tok.kind != "int":
            raise self.error("expected a natural number")
        return int(self.advance().text)

    def end(self) -> None:
        if self.tok.kind != "eof":
            raise self.error("unexpected trailing input")

    # -- size expressions
    def size(self, scope: dict[str, SVar]):
        e = self.size_atom(scope)
        while self.at("+"):
            self.advance()
            e = Add(e, self.size_atom(scope))
        return e

    def size_atom(self, scope: dict[str, SVar]):
        t = self.tok
        if t.kind == "int":
            self.advance()
            return Lit(int(t.text))
        if t.kind == "ident":
            self.advance()
            return scope.get(t.text, SVar(t.text, NAT))
        if self.at("tt", "ff"):
            self.advance()
            return TT if t.text == "tt" else FF
        if self.at("max", "le"):
            self.advance()
            self.expect("(")
            a = self.size(scope)
            self.expect(",")
            b = self.size(scope)
            self.expect(")")
            return Max(a, b) if t.text == "max" else LeTest(a, b)
        if self.at("(", "{"):
            close = ")" if t.text == "(" else "}"
            self.advance()
            e = self.size(scope)
            self.expect(close)
            return e
        raise self.error("expected a size expression")

    # -- binders
    def binders(self, scope: dict[str, SVar]) -> tuple[list[tuple[str, Optional[str]]], dict[str, SVar]]:
        names: list[tuple[str, Optional[str]]] = []
        while self.tok.kind == "ident":
            name = self.advance().text
            sort = None
            if self.at(":"):
                self.advance()
                s = self.tok
                if s.text in ("bool", "nat"):
                    self.advance()
                    sort = BOOL if s.text == "bool" else NAT
                else:
                    raise self.error("expected a sort (nat or bool)")
            names.append((name, sort))
        if not names:
            raise self.error("expected size variables")
        inner = dict(scope)
        for name, sort in names:
            inner[name] = SVar(name, sort or NAT)
        return names, inner

    @staticmethod
    def _finish_binder(names, parts):
        """Resolve unannotated binder sorts from their uses in ``parts``."""
        unknown = {n for n, s in names if s is None}
        used: set[str] = set()
        for p in parts:
            fv = type_fv(p) if isinstance(p, (Base, Arrow, Prod, TForall, TExists)) else constraint_fv(p)
            used |= {v.name for v in fv if v.sort == NAT}
        boolish = _infer_bool(parts) & unknown & used
        vs = tuple(SVar(n, BOOL if (s == BOOL or n in boolish) else NAT) for n, s in names)
        return vs, [_retype(p, boolish) for p in parts]

    # -- constraints
    def constraint(self, scope: dict[str, SVar]):
        if self.at("forall", "exists"):
            return self.quantified_constraint(scope)
        left = self.implication(scope)
        if self.at("<=>"):
            self.advance()
            return Iff(left, self.implication(scope))
        return left

    def quantified_constraint(self, scope):
        q = self.advance().text
        names, inner = self.binders(scope)
        self.expect(".")
        body = self.constraint(inner)
        vs, (body,) = self._finish_binder(names, [body])
        return (CForall if q == "forall" else CExists)(vs, body)

    def implication(self, scope):
        left = self.disjunction(scope)
        if self.at("=>"):
            self.advance()
            return Implies(left, self.implication(scope))
        return left

    def disjunction(self, scope):
        parts = [self.conjunction(scope)]
        while self.at("|"):
            self.advance()
            parts.append(self.conjunction(scope))
        out = parts[-1]
        for p in reversed(parts[:-1]):
            out = Or(p, out)
        return out

    def conjunction(self, scope):
        parts = [self.negation(scope)]
        while self.at("&"):
            self.advance()
            parts.append(self.negation(scope))
        out = parts[-1]
        for p in reversed(parts[:-1]):
            out = And(p, out)
        return out

    def negation(self, scope):
        if self.at("~"):
            self.advance()
            return Not(self.negation(scope))
        return self.constraint_atom(scope)

    def constraint_atom(self, scope):
        if self.at("true"):
            self.advance()
            return TOP
        if self.at("false"):
            self.advance()
            return Falsity()
        if self.at("forall", "exists"):
            return self.quantified_constraint(scope)
        if self.at("("):
            saved = self.i
            try:
                return self.comparison(scope)
            except ParseError:
                self.i = saved
            self.advance()
            c = self.constraint(scope)
            self.expect(")")
            return c
        return self.comparison(scope)

    def comparison(self, scope):
        left = self.size(scope)
        op = self.tok
        if not self.at("=", "<", "<=", ">", ">=", "!="):
            raise self.error("expected a comparison operator")
        self.advance()
        right = self.size(scope)
        if op.text == "=":
            return Equal(left, right)
        if op.text == "!=":
            return Not(Equal(left, right))
        if op.text == "<":
            return Less(left, right)
        if op.text == "<=":
            return LessEq(left, right)
        if op.text == ">":
            return Less(right, left)
        return LessEq(right, left)

    # -- types
    def type(self, scope: dict[str, SVar]):
        if self.at("forall", "exists"):
            q = self.advance().text
            names, inner = self.binders(scope)
            guard = TOP
            if self.at("["):
                self.advance()
                guard = self.constraint(inner)
                self.expect("]")
            self.expect(".")
            body = self.type(inner)
            vs, (guard, body) = self._finish_binder(names, [guard, body])
            return (TForall if q == "forall" else TExists)(vs, guard, body)
        left = self.product(scope)
        if self.at("->"):
            self.advance()
            return Arrow(left, self.type(scope))
        return left

    def product(self, scope):
        left = self.type_atom(scope)
        while self.at("*"):
            self.advance()
            left = Prod(left, self.type_atom(scope))
        return left

    def type_atom(self, scope):
        if self.at("("):
            self.advance()
            t = self.type(scope)
            self.expect(")")
            return t
        if self.tok.kind == "ident":
            name = self.advance().text
            if self.at("^"):
                self.advance()
                return Base(name, self.size_atom(scope))
            return bare(name)
        raise self.error("expected a type")

    # -- terms
    def term(self, positions: Optional[dict] = None):
        if self.at("fun"):
            self.advance()
            params = [self.ident("parameter").text]
            while self.tok.kind == "ident":
                params.append(self.advance().text)
            self.expect("->")
            body = self.term(positions)
            for p in reversed(params):
                body = Lam(p, body)
            return body
        if self.at("let"):
            self.advance()
            x = self.ident("variable").text
            self.expect("=")
            bound = self.term(positions)
            self.expect("in")
            return Let(x, bound, self.term(positions))
        if self.at("if"):
            self.advance()
            test = self.term(positions)
            self.expect("then")
            then = self.term(positions)
            self.expect("else")
            return If(test, then, self.term(positions))
        return self.application(positions)

    def application(self, positions):
        head = self.app_item(positions)
        if head is None:
            raise self.error("expected a term")
        while True:
            arg = self.term_atom(positions)
            if arg is None:
                return head
            head = App(head, arg)

    def app_item(self, positions):
        if self.at("fst", "snd"):
            op = self.advance().text
            arg = self.term_atom(positions)
            if arg is None:
                raise self.error(f"expected an argument for {op}")
            return Fst(arg) if op == "fst" else Snd(arg)
        return self.term_atom(positions)

    def term_atom(self, positions):
        t = self.tok
        if t.kind == "ident":
            self.advance()
            if positions is not None:
                positions.setdefault(t.text, (t.line, t.col))
            return Var(t.text)
        if t.kind == "int":
            self.advance()
            n = int(t.text)
            if positions is not None:
                positions.setdefault("0", (t.line, t.col))
                if n:
                    positions.setdefault("s", (t.line, t.col))
            return numeral(n)
        if self.at("true", "false"):
            self.advance()
            return Cons(t.text)
        if self.at("("):
            self.advance()
            first = self.term(positions)
            if self.at(","):
                self.advance()
                second = self.term(positions)
                self.expect(")")
                return Pair(first, second)
            self.expect(")")
            return first
        return None


def _close_free(x, parser_parts=None):
    """Assign sorts to free size variables from their uses."""
    boolish = _infer_bool([x])
    return _retype(x, boolish) if boolish else x


def _guard(fn: Callable, text: str):
    try:
        return fn()
    except SortError as e:
        raise ParseError(str(e)) from None
    except RecursionError:
        raise ParseError("input nested too deeply") from None


def parse_size(text: str):
    def go():
        p = _Parser(text)
        e = p.size({})
        p.end()
        return e

    return _guard(go, text)


def parse_constraint(text: str):
    """Parse a constraint; free variables get sorts from their uses (default nat)."""

    def go():
        p = _Parser(text)
        c = p.constraint({})
        p.end()
        c = _close_free(c)
        check_constraint_sorts(c)
        return c

    return _guard(go, text)


def parse_type(text: str):
    def go():
        p = _Parser(text)
        t = p.type({})
        p.end()
        t = _close_free(t)
        check_type_sorts(t)
        return t

    return _guard(go, text)


def parse_environment(text: str) -> dict:
    """``x : T, y : U`` (possibly empty)."""

    def go():
        p = _Parser(text)
        env: dict = {}
        while p.tok.kind != "eof":
            x = p.ident("variable")
            if x.text in env:
                raise ParseError(f"variable {x.text} bound twice", x.line, x.col)
            p.expect(":")
            t = _close_free(p.type({}))
            check_type_sorts(t)
            env[x.text] = t
            if not p.at(","):
                break
            p.advance()
        p.end()
        return env

    return _guard(go, text)


def parse_term(text: str, program: Optional[Program] = None):
    """Parse a term; identifiers declared in ``program`` become symbols."""

    def go():
        p = _Parser(text)
        positions: dict = {}
        t = p.term(positions)
        p.end()
        return _resolve(t, program or Program(signatures=dict(BUILTIN_SIGNATURES)), positions, frozenset())

    return _guard(go, text)


def _resolve(t, program: Program, positions: dict, bound: frozenset):
    """Turn identifiers naming declared symbols into constructor/function nodes."""

    def where(name):
        return positions.get(name, (1, 1))

    def go(t, bound):
        if isinstance(t, Var):
            if t.name in bound:
                return t
            kind = program.kind(t.name)
            if kind == CONSTRUCTOR:
                return Cons(t.name)
            if kind == FUNCTION:
                return Fun(t.name)
            return t
        if isinstance(t, Cons):
            if program.kind(t.name) != CONSTRUCTOR:
                what = "numerals need constructors 0 and s" if t.name in ("0", "s") else f"unknown constructor {t.name}"
                raise ParseError(what, *where(t.name))
            return t
        if isinstance(t, (Lam, Let)):
            if program.kind(t.var):
                raise ParseError(f"cannot bind the symbol {t.var}", *where(t.var))
            if isinstance(t, Lam):
                return Lam(t.var, go(t.body, bound | {t.var}))
            return Let(t.var, go(t.bound, bound), go(t.body, bound | {t.var}))
        if isinstance(t, App):
            return App(go(t.fun, bound), go(t.arg, bound))
        if isinstance(t, Pair):
            return Pair(go(t.left, bound), go(t.right, bound))
        if isinstance(t, Fst):
            return Fst(go(t.arg, bound))
        if isinstance(t, Snd):
            return Snd(go(t.arg, bound))
        if isinstance(t, If):
            return If(go(t.test, bound), go(t.then, bound), go(t.orelse, bound))
        return t

    return go(t, bound)


# ---------------------------------------------------------------------------
# Programs


def _measure(p: _Parser) -> MeasureSpec:
    t = p.tok
    if t.kind != "ident":
        raise p.error("expected a measure (lex, linear, bounded or trusted)")
    p.advance()
    if t.text == "lex":
        return MeasureSpec(LEX)
    if t.text in ("linear", "bounded"):
        nums: list[int] = []
        if p.at("("):
            p.advance()
            nums.append(p.integer())
            while p.at(","):
                p.advance()
                nums.append(p.integer())
            p.expect(")")
        if t.text == "linear":
            if nums and not any(nums):
                raise ParseError("linear measure needs a nonzero coefficient", t.line, t.col)
            return MeasureSpec(LINEAR, tuple(nums))
        if not nums:
            raise ParseError("bounded measure needs a bound", t.line, t.col)
        if len(nums) > 1 and not any(nums[1:]):
            raise ParseError("bounded measure needs a nonzero coefficient", t.line, t.col)
        return MeasureSpec(BOUNDED, tuple(nums[1:]), nums[0])
    if t.text == "trusted":
        p.expect("[")
        c = p.constraint({})
        p.expect("]")
        check_constraint_sorts(c)
        return MeasureSpec(TRUSTED, relation=c)
    raise ParseError(f"unknown measure {t.text}", t.line, t.col)


@dataclass
class _RawRule:
    conditions: list
    lhs: object
    rhs: object
    positions: dict
    line: int
    col: int


def parse_program(text: str) -> Program:
    return _guard(lambda: _parse_program(text), text)


def _parse_program(text: str) -> Program:
    p = _Parser(text)
    types: list[str] = ["bool"]
    type_pos: dict[str, Token] = {}
    type_edges: list[tuple[str, str]] = []
    sigs: dict[str, SymbolSignature] = dict(BUILTIN_SIGNATURES)
    sig_pos: dict[str, Token] = {}
    measures: dict[str, MeasureSpec] = {}
    measure_pos: dict[str, Token] = {}
    precedences: list[tuple[str, str, str, Token]] = []
    raw_rules: list[_RawRule] = []
    raw_queries: list[tuple[object, dict]] = []

    while p.tok.kind != "eof":
        start = p.tok
        if p.at("type"):
            p.advance()
            name = p.ident("type name")
            if name.text in types:
                raise ParseError(f"type {name.text} declared twice", name.line, name.col)
            types.append(name.text)
            type_pos[name.text] = name
            if p.at(">"):
                p.advance()
                type_edges.append((name.text, p.ident("type name").text))
                while p.at(","):
                    p.advance()
                    type_edges.append((name.text, p.ident("type name").text))
        elif p.at("constructor", "function"):
            kind = CONSTRUCTOR if p.advance().text == "constructor" else FUNCTION
            name = p.tok
            if name.kind not in ("ident", "int"):
                raise p.error("expected a symbol name")
            p.advance()
            if name.text in sigs:
                raise ParseError(f"symbol {name.text} declared twice", name.line, name.col)
            if name.kind == "int" and name.text != "0":
                raise ParseError("only 0 may be used as a numeric symbol name", name.line, name.col)
            p.expect(":")
            t = p.type({})
            sigs[name.text] = SymbolSignature(name.text, kind, t)
            sig_pos[name.text] = name
        elif p.at("measure"):
            p.advance()
            names = [p.ident("function name")]
            while p.at(","):
                p.advance()
                names.append(p.ident("function name"))
            p.expect(":")
            spec = _measure(p)
            for n in names:
                if n.text in measures:
                    raise ParseError(f"measure for {n.text} given twice", n.line, n.col)
                measures[n.text] = spec
                measure_pos[n.text] = n
        elif p.at("precedence"):
            p.advance()
            chain = [p.ident("function name")]
            ops = []
            while p.at(">", "="):
                ops.append(p.advance().text)
                chain.append(p.ident("function name"))
            if not ops:
                raise p.error("expected '>' or '='")
            for a, op, b in zip(chain, ops, chain[1:]):
                precedences.append((a.text, op, b.text, a))
        elif p.at("rule"):
            p.advance()
            positions: dict = {}
            conditions = []
            if p.at("if"):
                p.advance()
                while True:
                    ct = p.term(positions)
                    p.expect("=")
                    if not p.at("true", "false"):
                        raise p.error("condition value must be true or false")
                    conditions.append((ct, p.advance().text == "true"))
                    if not p.at(","):
                        break
                    p.advance()
                p.expect("=>")
            lhs = p.term(positions)
            p.expect("->")
            rhs = p.term(positions)
            raw_rules.append(_RawRule(conditions, lhs, rhs, positions, start.line, start.col))
        elif p.at("eval"):
            p.advance()
            positions = {}
            raw_queries.append((p.term(positions), positions))
        else:
            raise p.error("expected a declaration")
        p.expect(";")

    program = Program(types=tuple(types), signatures=sigs)
    # signatures
    for name, sig in sigs.items():
        tok = sig_pos.get(name)
        pos = (tok.line, tok.col) if tok else (1, 1)
        t = _close_free(sig.type)
        try:
            check_type_sorts(t)
        except SortError as e:
            raise ParseError(f"{name}: {e}", *pos) from None
        if type_fv(t):
            free = ", ".join(sorted(v.name for v in type_fv(t)))
            raise ParseError(f"type of {name} must be closed (free: {free})", *pos)
        for tn in sorted(type_names(t)):
            if tn not in types:
                raise ParseError(f"unknown type {tn} in the type of {name}", *pos)
        sigs[name] = SymbolSignature(name, sig.kind, t)

    # type precedence from constructor dependencies
    equal, strict = [], []
    for name, sig in sigs.items():
        if sig.kind == CONSTRUCTOR and name not in BUILTIN_SIGNATURES:
            nonrec, rec, result = _constructor_parts(sig.type)
            if result is None:
                continue
            strict.extend((result, n) for t in nonrec for n in type_names(t))
            equal.extend((result, n) for n in rec)
    for a, b in type_edges:
        for n in (a, b):
            if n not in types:
                raise ParseError(f"unknown type {n} in a type precedence")
    try:
        order = Precedence.build(types, [], strict + type_edges, equal)
    except PrecedenceError as e:
        raise ParseError(f"type precedence: {e}") from None

    shapes: dict[str, ConstructorShape] = {}
    for name, sig in sigs.items():
        if sig.kind != CONSTRUCTOR:
            continue
        tok = sig_pos.get(name)
        pos = (tok.line, tok.col) if tok else (1, 1)
        try:
            shapes[name] = validate_constructor_signature(
                sig,
                below=lambda c, b: order.greater(b, c),
                equivalent=order.equivalent,
            )
        except SignatureError as e:
            raise ParseError(f"constructor {name}: {e}", *pos) from None

    # measures
    for name, tok in measure_pos.items():
        if sigs.get(name) is None or sigs[name].kind != FUNCTION:
            raise ParseError(f"measure given for {name}, which is not a declared function", tok.line, tok.col)
    for a, _, b, tok in precedences:
        for n in (a, b):
            if sigs.get(n) is None or sigs[n].kind != FUNCTION:
                raise ParseError(f"{n} is not a declared function", tok.line, tok.col)

    program = Program(types=tuple(types), type_edges=tuple(type_edges), signatures=sigs)
    rules = []
    for raw in raw_rules:
        rules.append(_build_rule(raw, program))
    queries = tuple(_resolve(q, program, pos, frozenset()) for q, pos in raw_queries)
    return Program(
        types=tuple(types),
        type_edges=tuple(type_edges),
        signatures=sigs,
        measures=measures,
        rules=tuple(rules),
        precedences=tuple((a, op, b) for a, op, b, _ in precedences),
        queries=queries,
        shapes=shapes,
        type_order=order,
    )


def _constructor_parts(t):
    """Non-recursive argument types, recursive type names and result name."""
    nonrec = []
    while isinstance(t, Arrow):
        nonrec.append(t.dom)
        t = t.cod
    rec = []
    if isinstance(t, TForall):
        t = t.body
        while isinstance(t, Arrow):
            if isinstance(t.dom, Base):
                rec.append(t.dom.name)
            t = t.cod
    return nonrec, rec, (t.name if isinstance(t, Base) else None)


def _build_rule(raw: _RawRule, program: Program) -> Rule:
    pos = (raw.line, raw.col)
    lhs = _resolve(raw.lhs, program, raw.positions, frozenset())
    head, args = spine(lhs)
    if not isinstance(head, Fun):
        raise ParseError("rule left-hand side must start with a function symbol", *pos)
    for a in args:
        if not is_pattern(a):
            raise ParseError(f"argument of {head.name} is not a constructor pattern", *pos)
    conditions = tuple(
        (_resolve(c, program, raw.positions, frozenset()), v) for c, v in raw.conditions
    )
    rhs = _resolve(raw.rhs, program, raw.positions, frozenset())
    lhs_vars = term_fv(lhs)
    extra = set(term_fv(rhs))
    for c, _ in conditions:
        extra |= term_fv(c)
    extra -= lhs_vars
    if extra:
        name = sorted(extra)[0]
        where = raw.positions.get(name, pos)
        raise ParseError(f"variable {name} does not occur in the left-hand side", *where)
    return Rule(head.name, tuple(args), rhs, conditions, raw.line)

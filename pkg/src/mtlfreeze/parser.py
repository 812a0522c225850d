"""Formula text parser: sugar expansion, renaming, closedness checks.

Binding strength, tightest first: NOT, AND, OR, IMPLIES, temporal connectives,
FREEZE.  Prefix temporal operators take everything to their right (like the
freeze quantifier), binary ones combine IMPLIES-level operands left to right.
An omitted interval means [0,*).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .formula import (
    Cmp,
    Const,
    Formula,
    Freeze,
    Not,
    Or,
    Pred,
    Prev,
    Next,
    Since,
    TrueF,
    Until,
    Var,
    compile_formula,
    free_vars,
)
from .intervals import Interval, IntervalError
from .rational import parse_rational

KEYWORDS = {
    "TRUE", "NOT", "AND", "OR", "IMPLIES",
    "PREV", "NEXT", "SINCE", "UNTIL", "ONCE", "HIST",
    "EVENTUALLY", "ALWAYS", "WEAKUNTIL", "FREEZE",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<int>[0-9]+(?:\.[0-9]+)?)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_#]*)
  | (?P<arrow><-)
  | (?P<cmp><=|>=|!=|<|>|=)
  | (?P<punct>[()\[\],.*])
    """,
    re.VERBOSE,
)


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


@dataclass
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> List[_Token]:
    tokens: List[_Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group(0)
            if kind == "ident" and value in KEYWORDS:
                kind = "kw"
            tokens.append(_Token(kind, value, pos))
        pos = m.end()
    tokens.append(_Token("eof", "", len(text)))
    return tokens


_UNBOUNDED = Interval.unbounded()


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    # -- token plumbing ------------------------------------------------------

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str, text: Optional[str] = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            raise ParseError(f"expected {want!r}, found {tok.text or 'end of input'!r}", tok.pos)
        return self.next()

    def at_kw(self, *names: str) -> bool:
        tok = self.peek()
        return tok.kind == "kw" and tok.text in names

    # -- grammar -------------------------------------------------------------

    def parse(self) -> Formula:
        f = self.formula()
        tok = self.peek()
        if tok.kind != "eof":
            raise ParseError(f"trailing input starting at {tok.text!r}", tok.pos)
        return f

    def formula(self) -> Formula:
        if self.at_kw("FREEZE"):
            self.next()
            var = self.expect("ident").text
            self.expect("arrow")
            reg = self.expect("ident").text
            self.expect("punct", ".")
            body = self.formula()
            return Freeze(register=reg, source_register=reg, var=var, body=body)
        if self.at_kw("PREV", "NEXT", "EVENTUALLY", "ALWAYS", "ONCE", "HIST"):
            op = self.next().text
            interval = self.maybe_interval()
            body = self.formula()
            return _prefix_temporal(op, interval, body)
        return self.binary_temporal()

    def binary_temporal(self) -> Formula:
        lhs = self.implies()
        while self.at_kw("SINCE", "UNTIL", "WEAKUNTIL"):
            op = self.next().text
            if op == "WEAKUNTIL":
                rhs = self.implies()
                lhs = _weak_until(lhs, rhs)
                continue
            interval = self.maybe_interval()
            rhs = self.implies()
            lhs = Since(interval, lhs, rhs) if op == "SINCE" else Until(interval, lhs, rhs)
        return lhs

    def implies(self) -> Formula:
        lhs = self.disjunction()
        if self.at_kw("IMPLIES"):
            self.next()
            rhs = self.implies()
            return Or(Not(lhs), rhs)
        return lhs

    def disjunction(self) -> Formula:
        lhs = self.conjunction()
        while self.at_kw("OR"):
            self.next()
            lhs = Or(lhs, self.conjunction())
        return lhs

    def conjunction(self) -> Formula:
        lhs = self.unary()
        while self.at_kw("AND"):
            self.next()
            rhs = self.unary()
            lhs = Not(Or(Not(lhs), Not(rhs)))
        return lhs

    def unary(self) -> Formula:
        if self.at_kw("NOT"):
            self.next()
            return Not(self.unary())
        return self.primary()

    def primary(self) -> Formula:
        # Quantifier-style scoping: a freeze or prefix temporal operator in
        # operand position opens a scope that extends to the end of the input
        # or enclosing parenthesis ("p IMPLIES EVENTUALLY[0,3] q").
        if self.at_kw("FREEZE", "PREV", "NEXT", "EVENTUALLY", "ALWAYS", "ONCE", "HIST"):
            return self.formula()
        tok = self.peek()
        if tok.kind == "kw" and tok.text == "TRUE":
            self.next()
            return TrueF()
        if tok.kind == "punct" and tok.text == "(":
            self.next()
            inner = self.formula()
            self.expect("punct", ")")
            return inner
        if tok.kind == "ident":
            nxt = self.tokens[self.i + 1]
            if nxt.kind == "punct" and nxt.text == "(":
                return self.predicate()
            term = self.term()
            if self.peek().kind == "cmp":
                op = self.next().text
                return Cmp(op, term, self.term())
            return Pred(tok.text, ())
        if tok.kind in ("int", "string"):
            term = self.term()
            if self.peek().kind != "cmp":
                raise ParseError("a constant must be part of a comparison", tok.pos)
            op = self.next().text
            return Cmp(op, term, self.term())
        raise ParseError(f"expected a formula, found {tok.text or 'end of input'!r}", tok.pos)

    def predicate(self) -> Formula:
        name = self.expect("ident").text
        self.expect("punct", "(")
        args: List = []
        if not (self.peek().kind == "punct" and self.peek().text == ")"):
            args.append(self.term())
            while self.peek().kind == "punct" and self.peek().text == ",":
                self.next()
                args.append(self.term())
        self.expect("punct", ")")
        return Pred(name, tuple(args))

    def term(self):
        tok = self.next()
        if tok.kind == "ident":
            return Var(tok.text)
        if tok.kind == "int":
            if "." in tok.text:
                raise ParseError("data constants must be integers or strings", tok.pos)
            return Const(int(tok.text))
        if tok.kind == "string":
            raw = tok.text[1:-1]
            return Const(raw.replace('\\"', '"').replace("\\\\", "\\"))
        raise ParseError(f"expected a term, found {tok.text or 'end of input'!r}", tok.pos)

    def maybe_interval(self) -> Interval:
        tok = self.peek()
        if tok.kind != "punct" or tok.text not in "([":
            return _UNBOUNDED
        if tok.text == "(":
            # "(0,3]" is an interval, "(p OR q)" is a formula operand.
            if not (
                self.tokens[self.i + 1].kind == "int"
                and self.tokens[self.i + 2].kind == "punct"
                and self.tokens[self.i + 2].text == ","
            ):
                return _UNBOUNDED
        lo_closed = self.next().text == "["
        lo = self.bound(allow_inf=False)
        self.expect("punct", ",")
        hi = self.bound(allow_inf=True)
        closer = self.expect("punct")
        if closer.text not in ")]":
            raise ParseError(f"expected interval close, found {closer.text!r}", closer.pos)
        hi_closed = closer.text == "]"
        try:
            return Interval(lo, hi, lo_closed, hi_closed)
        except IntervalError as exc:
            raise ParseError(f"bad interval: {exc}", tok.pos) from exc

    def bound(self, allow_inf: bool) -> Optional[Fraction]:
        tok = self.next()
        if tok.kind == "punct" and tok.text == "*":
            if not allow_inf:
                raise ParseError("left bound cannot be unbounded", tok.pos)
            return None
        if tok.kind == "int":
            return parse_rational(tok.text)
        raise ParseError(f"expected interval bound, found {tok.text!r}", tok.pos)


def _prefix_temporal(op: str, interval: Interval, body: Formula) -> Formula:
    if op == "PREV":
        return Prev(interval, body)
    if op == "NEXT":
        return Next(interval, body)
    if op == "EVENTUALLY":
        return Until(interval, TrueF(), body)
    if op == "ALWAYS":
        return Not(Until(interval, TrueF(), Not(body)))
    if op == "ONCE":
        return Since(interval, TrueF(), body)
    if op == "HIST":
        return Not(Since(interval, TrueF(), Not(body)))
    raise AssertionError(op)


def _weak_until(lhs: Formula, rhs: Formula) -> Formula:
    # φ W ψ := (φ U ψ) ∨ ¬(t U ¬φ); W carries no metric bound.
    return Or(
        Until(_UNBOUNDED, lhs, rhs),
        Not(Until(_UNBOUNDED, TrueF(), Not(_clone(lhs)))),
    )


def _clone(f: Formula) -> Formula:
    """Fresh nodes for a duplicated operand: subformulas stay identity-distinct."""
    if isinstance(f, TrueF):
        return TrueF()
    if isinstance(f, Pred):
        return Pred(f.name, tuple(_clone_term(a) for a in f.args))
    if isinstance(f, Cmp):
        return Cmp(f.op, _clone_term(f.lhs), _clone_term(f.rhs))
    if isinstance(f, Freeze):
        return Freeze(f.register, f.source_register, f.var, _clone(f.body))
    if isinstance(f, Not):
        return Not(_clone(f.body))
    if isinstance(f, Or):
        return Or(_clone(f.left), _clone(f.right))
    if isinstance(f, Prev):
        return Prev(f.interval, _clone(f.body))
    if isinstance(f, Next):
        return Next(f.interval, _clone(f.body))
    if isinstance(f, Since):
        return Since(f.interval, _clone(f.left), _clone(f.right))
    if isinstance(f, Until):
        return Until(f.interval, _clone(f.left), _clone(f.right))
    raise TypeError(f)


def _clone_term(t) :
    return Var(t.name) if isinstance(t, Var) else Const(t.value)


class _Namer:
    def __init__(self):
        self.used: set = set()

    def fresh(self, base: str) -> str:
        if base not in self.used:
            self.used.add(base)
            return base
        n = 2
        while f"{base}#{n}" in self.used:
            n += 1
        name = f"{base}#{n}"
        self.used.add(name)
        return name


def _normalize(f: Formula, scope: Dict[str, str], vars_: _Namer, regs: _Namer) -> Formula:
    """Alpha-rename variables apart and give every freeze a unique register alias."""
    if isinstance(f, TrueF):
        return TrueF()
    if isinstance(f, Pred):
        return Pred(f.name, tuple(_rename_term(a, scope) for a in f.args))
    if isinstance(f, Cmp):
        return Cmp(f.op, _rename_term(f.lhs, scope), _rename_term(f.rhs, scope))
    if isinstance(f, Freeze):
        fresh_var = vars_.fresh(f.var)
        alias = regs.fresh(f.source_register)
        inner_scope = dict(scope)
        inner_scope[f.var] = fresh_var
        body = _normalize(f.body, inner_scope, vars_, regs)
        return Freeze(register=alias, source_register=f.source_register, var=fresh_var, body=body)
    if isinstance(f, Not):
        return Not(_normalize(f.body, scope, vars_, regs))
    if isinstance(f, Or):
        return Or(_normalize(f.left, scope, vars_, regs), _normalize(f.right, scope, vars_, regs))
    if isinstance(f, Prev):
        return Prev(f.interval, _normalize(f.body, scope, vars_, regs))
    if isinstance(f, Next):
        return Next(f.interval, _normalize(f.body, scope, vars_, regs))
    if isinstance(f, Since):
        return Since(f.interval, _normalize(f.left, scope, vars_, regs), _normalize(f.right, scope, vars_, regs))
    if isinstance(f, Until):
        return Until(f.interval, _normalize(f.left, scope, vars_, regs), _normalize(f.right, scope, vars_, regs))
    raise TypeError(f)


def _rename_term(t, scope: Dict[str, str]):
    if isinstance(t, Var):
        if t.name not in scope:
            raise ParseError(f"unbound variable {t.name!r}", 0)
        return Var(scope[t.name])
    return Const(t.value)


def parse_formula(text: str) -> Formula:
    """Parse and normalize: sugar expanded, names unique, closedness verified."""
    raw = _Parser(text).parse()
    normalized = _normalize(raw, {}, _Namer(), _Namer())
    leftover = free_vars(normalized)
    if leftover:
        raise ParseError(f"unbound variables: {sorted(leftover)}", 0)
    compile_formula(normalized)  # validates arities and uniqueness
    return normalized

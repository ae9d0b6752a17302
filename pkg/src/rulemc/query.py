"""Parser for UPPAAL-style reachability queries.

Grammar::

    query   := ("E<>" | "A[]") expr
    expr    := conj (("or" | "||") conj)*
    conj    := unary (("and" | "&&") unary)*
    unary   := ("not" | "!") unary | "(" expr ")" | atom
    atom    := "es1." LOC | "es2." LOC
             | "r[" INT "]" "==" ("true" | "false")
             | "p[" INT "]" "==" ("0" | "1" | "2")
             | "forall" "(" "i" ":" "typem" ")" "r[i]" "==" "true"
             | "true" | "false"
    LOC     := "start" | "rs" | "rf" | rule name
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .automaton import RF, RS, START, Location
from .explorer import (
    AllRulesUsed,
    AtLoc,
    PAnd,
    PNot,
    POr,
    PropIs,
    PTrue,
    RuleUsed,
    StatePredicate,
)
from .rulebase import RuleBase


class QueryError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"at position {position + 1}: {message}")
        self.message = message
        self.position = position


@dataclass(frozen=True)
class Query:
    quantifier: str  # "E<>" or "A[]"
    predicate: StatePredicate


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<quant>E<>|A\[\])|(?P<op>==|&&|\|\||[()\[\].:!])|(?P<num>\d+)|(?P<word>[A-Za-z_]\w*))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise QueryError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastgroup)
        tokens.append((m.group(m.lastgroup), start))
        pos = m.end()
    tokens.append(("", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, rb: RuleBase):
        self.tokens = _tokenize(text)
        self.i = 0
        self.rb = rb

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def pos(self) -> int:
        return self.tokens[self.i][1]

    def take(self) -> str:
        tok = self.tokens[self.i][0]
        if tok:
            self.i += 1
        return tok

    def expect(self, *texts: str) -> str:
        tok = self.peek()
        if tok not in texts:
            want = " or ".join(repr(t) for t in texts)
            raise QueryError(f"expected {want}, found {tok or 'end of query'!r}", self.pos())
        return self.take()

    def number(self) -> int:
        tok = self.peek()
        if not tok.isdigit():
            raise QueryError(f"expected a number, found {tok or 'end of query'!r}", self.pos())
        self.take()
        return int(tok)

    def query(self) -> Query:
        quant = self.expect("E<>", "A[]")
        pred = self.expr()
        if self.peek():
            raise QueryError(f"unexpected {self.peek()!r}", self.pos())
        return Query(quant, pred)

    def expr(self) -> StatePredicate:
        node = self.conj()
        while self.peek() in ("or", "||"):
            self.take()
            node = POr(node, self.conj())
        return node

    def conj(self) -> StatePredicate:
        node = self.unary()
        while self.peek() in ("and", "&&"):
            self.take()
            node = PAnd(node, self.unary())
        return node

    def unary(self) -> StatePredicate:
        tok = self.peek()
        if tok in ("not", "!"):
            self.take()
            return PNot(self.unary())
        if tok == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        return self.atom()

    def location(self) -> Location:
        at = self.pos()
        name = self.take()
        fixed = {"start": START, "rs": RS, "rf": RF}
        if name in fixed:
            return fixed[name]
        try:
            return Location.rule(self.rb.rule_named(name).id)
        except KeyError:
            raise QueryError(f"unknown location {name or 'end of query'!r}", at) from None

    def atom(self) -> StatePredicate:
        at = self.pos()
        tok = self.take()
        if tok in ("es1", "es2"):
            self.expect(".")
            return AtLoc(int(tok[-1]), self.location())
        if tok in ("true", "false"):
            return PTrue(tok == "true")
        if tok == "forall":
            for part in ("(", "i", ":", "typem", ")", "r", "[", "i", "]", "==", "true"):
                self.expect(part)
            return AllRulesUsed()
        if tok in ("r", "p"):
            self.expect("[")
            idx_at = self.pos()
            idx = self.number()
            self.expect("]")
            self.expect("==")
            if tok == "r":
                if idx >= self.rb.rule_count:
                    raise QueryError(f"unknown rule index {idx}", idx_at)
                value = self.expect("true", "false")
                used = RuleUsed(idx)
                return used if value == "true" else PNot(used)
            if idx >= self.rb.prop_count:
                raise QueryError(f"unknown proposition index {idx}", idx_at)
            return PropIs(idx, int(self.expect("0", "1", "2")))
        raise QueryError(f"expected a state formula, found {tok or 'end of query'!r}", at)


def parse_query(text: str, rb: RuleBase) -> Query:
    """Parse ``text`` against the rule names and sizes of ``rb``."""
    return _Parser(text, rb).query()

"""Rule language: literals, LHS formulas, rules and the text parser.

A rule file holds one rule per line::

    # comment
    r0: p0 -> p1 & p4
    r3: p0 | p3 -> p4

The left-hand side is a propositional formula over literals with ``~``,
``&``, ``|`` and parentheses. The right-hand side is a conjunction of
literals. Unicode ``¬ ∧ ∨ →`` are accepted as aliases.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple, Union


class ParseError(ValueError):
    """Raised for malformed rule text. Carries a 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Literal:
    prop_index: int
    negated: bool = False

    def __str__(self) -> str:
        return ("~" if self.negated else "") + f"p{self.prop_index}"


@dataclass(frozen=True)
class Lit:
    literal: Literal


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


Formula = Union[Lit, And, Or]


def lit(prop_index: int, negated: bool = False) -> Lit:
    return Lit(Literal(prop_index, negated))


def literals(f: Formula) -> Iterator[Literal]:
    """Yield the leaves of ``f`` left to right."""
    if isinstance(f, Lit):
        yield f.literal
    else:
        yield from literals(f.left)
        yield from literals(f.right)


@dataclass(frozen=True)
class Rule:
    id: int
    name: str
    lhs: Formula
    rhs: Tuple[Literal, ...]


@dataclass(frozen=True)
class RuleBase:
    rules: Tuple[Rule, ...]
    prop_count: int

    @property
    def rule_count(self) -> int:
        return len(self.rules)

    @property
    def names(self) -> List[str]:
        return [rule.name for rule in self.rules]

    def rule_named(self, name: str) -> Rule:
        for rule in self.rules:
            if rule.name == name:
                return rule
        raise KeyError(name)

    @classmethod
    def from_rules(cls, rules: Sequence[Rule]) -> "RuleBase":
        """Build a rule base, inferring prop_count from the highest index used."""
        top = -1
        for rule in rules:
            for l in list(literals(rule.lhs)) + list(rule.rhs):
                top = max(top, l.prop_index)
        return cls(tuple(rules), max(top + 1, 1))


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    reason: str

    def __str__(self) -> str:
        return f"{self.rule}: {self.reason}"


# -- tokenizer ---------------------------------------------------------------

_ALIASES = {"¬": "~", "∧": "&", "∨": "|", "→": "->"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#.*)
  | (?P<arrow>->|→)
  | (?P<op>[~&|():¬∧∨])
  | (?P<prop>p\d+)
  | (?P<name>r\d+)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "arrow", "op", "prop", "name", "eol"
    text: str
    line: int
    column: int


def _tokenize(text: str, lineno: int) -> List[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", lineno, pos + 1)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            value = _ALIASES.get(m.group(), m.group())
            tokens.append(_Token(kind, value, lineno, pos + 1))
        pos = m.end()
    tokens.append(_Token("eol", "", lineno, len(text) + 1))
    return tokens


class _LineParser:
    def __init__(self, tokens: List[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eol":
            self.pos += 1
        return tok

    def error(self, message: str, tok: _Token | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(message, tok.line, tok.column)

    def expect(self, text: str) -> _Token:
        tok = self.peek()
        if tok.text != text:
            found = tok.text or "end of line"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.next()

    def literal(self) -> Literal:
        negated = False
        if self.peek().text == "~":
            self.next()
            negated = True
        tok = self.peek()
        if tok.kind != "prop":
            found = tok.text or "end of line"
            raise self.error(f"malformed literal: expected proposition pN, found {found!r}")
        self.next()
        return Literal(int(tok.text[1:]), negated)

    # formula := disj ; disj := conj2 ("|" conj2)* ; conj2 := atom ("&" atom)*
    def formula(self) -> Formula:
        node = self.conj()
        while self.peek().text == "|":
            self.next()
            node = Or(node, self.conj())
        return node

    def conj(self) -> Formula:
        node = self.atom()
        while self.peek().text == "&":
            self.next()
            node = And(node, self.atom())
        return node

    def atom(self) -> Formula:
        tok = self.peek()
        if tok.text == "(":
            self.next()
            node = self.formula()
            self.expect(")")
            return node
        return Lit(self.literal())

    def rhs(self) -> List[Tuple[Literal, _Token]]:
        if self.peek().kind == "eol":
            raise self.error("empty right-hand side")
        start = self.peek()
        out = [(self.literal(), start)]
        while self.peek().text == "&":
            self.next()
            start = self.peek()
            out.append((self.literal(), start))
        tok = self.peek()
        if tok.text == "|":
            raise self.error("disjunction is not allowed on the right-hand side; "
                             "deductions are conjunctions of literals")
        if tok.kind != "eol":
            raise self.error(f"unexpected {tok.text!r} after right-hand side")
        return out


def parse_rule_base(source: str) -> RuleBase:
    """Parse rule text into a :class:`RuleBase`.

    Rules keep declaration order and get ids ``0..m-1``. ``prop_count`` is
    one more than the largest proposition index mentioned.
    """
    rules: List[Rule] = []
    seen = {}
    for lineno, raw in enumerate(source.splitlines(), start=1):
        tokens = _tokenize(raw, lineno)
        if tokens[0].kind == "eol":
            continue
        p = _LineParser(tokens)
        name_tok = p.next()
        if name_tok.kind != "name":
            raise p.error("expected a rule name rN", name_tok)
        if name_tok.text in seen:
            raise p.error(f"duplicate rule name {name_tok.text!r} "
                          f"(first declared on line {seen[name_tok.text]})", name_tok)
        seen[name_tok.text] = lineno
        p.expect(":")
        if p.peek().kind in ("arrow", "eol"):
            raise p.error("empty left-hand side")
        lhs = p.formula()
        p.expect("->")
        rhs = p.rhs()
        used = {}
        for literal_, tok in rhs:
            prev = used.get(literal_.prop_index)
            if prev is not None:
                what = "duplicate" if prev.negated == literal_.negated else "complementary"
                raise ParseError(f"{what} literals over p{literal_.prop_index} "
                                 f"in right-hand side of {name_tok.text}", tok.line, tok.column)
            used[literal_.prop_index] = literal_
        rules.append(Rule(len(rules), name_tok.text, lhs, tuple(l for l, _ in rhs)))
    if not rules:
        raise ParseError("rule base is empty", 1, 1)
    return RuleBase.from_rules(rules)


def validate(rb: RuleBase) -> List[Diagnostic]:
    """Check the structural invariants of a rule base built by hand.

    Returns one diagnostic per violation; an empty list means valid.
    """
    out = []
    if rb.prop_count < 1:
        out.append(Diagnostic("<rule base>", "prop_count must be at least 1"))
    if not rb.rules:
        out.append(Diagnostic("<rule base>", "rule base has no rules"))
    seen = set()
    for pos, rule in enumerate(rb.rules):
        if rule.name in seen:
            out.append(Diagnostic(rule.name, "duplicate rule name"))
        seen.add(rule.name)
        if rule.id != pos:
            out.append(Diagnostic(rule.name, f"rule id {rule.id} does not match position {pos}"))
        if not rule.rhs:
            out.append(Diagnostic(rule.name, f"empty RHS of {rule.name}"))
        by_prop = {}
        for l in rule.rhs:
            prev = by_prop.get(l.prop_index)
            if prev is None:
                by_prop[l.prop_index] = l
            elif prev.negated != l.negated:
                out.append(Diagnostic(rule.name, f"complementary literals in RHS of {rule.name}"))
            else:
                out.append(Diagnostic(rule.name, f"duplicate literals in RHS of {rule.name}"))
        for l in list(literals(rule.lhs)) + list(rule.rhs):
            if not 0 <= l.prop_index < rb.prop_count:
                out.append(Diagnostic(rule.name, f"proposition p{l.prop_index} out of range "
                                                 f"(prop_count={rb.prop_count})"))
    return out


# -- printing ----------------------------------------------------------------

def format_formula(f: Formula) -> str:
    """Render with the fewest parentheses that re-parse to the same tree."""
    if isinstance(f, Lit):
        return str(f.literal)
    if isinstance(f, And):
        left = format_formula(f.left)
        right = format_formula(f.right)
        if isinstance(f.left, Or):
            left = f"({left})"
        if not isinstance(f.right, Lit):
            right = f"({right})"
        return f"{left} & {right}"
    left = format_formula(f.left)
    right = format_formula(f.right)
    if isinstance(f.right, Or):
        right = f"({right})"
    return f"{left} | {right}"


def format_rule(rule: Rule) -> str:
    return f"{rule.name}: {format_formula(rule.lhs)} -> " + " & ".join(map(str, rule.rhs))


def format_rule_base(rb: RuleBase) -> str:
    return "".join(format_rule(rule) + "\n" for rule in rb.rules)

"""Compile a rule base into the shared template automaton.

The template has locations ``start``, ``rs``, ``rf`` and one location per
rule. Leaving ``start`` runs ``initp()``; the edge ``rs -> ri`` is guarded
by rule i's condition and writes its deduction into ``p``; the edge
``ri -> rf`` marks the rule used in ``r``; ``rf -> rs`` lets a process fire
again.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .rulebase import And, Formula, Lit, Literal, Or, RuleBase


class TriValue(enum.IntEnum):
    FALSE = 0
    TRUE = 1
    NOTHING = 2


@dataclass(frozen=True)
class ValuationStore:
    """The global arrays: tri-valued ``p`` (length n), rule-used ``r`` (length m)."""

    p: Tuple[int, ...]
    r: Tuple[bool, ...]

    @classmethod
    def blank(cls, n: int, m: int) -> "ValuationStore":
        return cls((TriValue.NOTHING,) * n, (False,) * m)

    def __post_init__(self):
        # normalise so stores compare equal regardless of int/IntEnum/bool origin
        object.__setattr__(self, "p", tuple(int(v) for v in self.p))
        object.__setattr__(self, "r", tuple(bool(v) for v in self.r))


class LocKind(enum.Enum):
    START = "start"
    RS = "rs"
    RF = "rf"
    RULE = "rule"


@dataclass(frozen=True, order=True)
class Location:
    kind: LocKind = field(compare=False)
    rule_id: Optional[int] = field(default=None, compare=False)
    # total order: start, rs, rf, r0, r1, ...
    index: int = field(default=0, repr=False)

    @classmethod
    def start(cls) -> "Location":
        return cls(LocKind.START, None, 0)

    @classmethod
    def rs(cls) -> "Location":
        return cls(LocKind.RS, None, 1)

    @classmethod
    def rf(cls) -> "Location":
        return cls(LocKind.RF, None, 2)

    @classmethod
    def rule(cls, rule_id: int) -> "Location":
        return cls(LocKind.RULE, rule_id, 3 + rule_id)

    @classmethod
    def from_index(cls, index: int) -> "Location":
        if index >= 3:
            return cls.rule(index - 3)
        return (cls.start, cls.rs, cls.rf)[index]()

    def label(self, names: Optional[Sequence[str]] = None) -> str:
        if self.kind is LocKind.RULE:
            return names[self.rule_id] if names else f"r{self.rule_id}"
        return self.kind.value


START = Location.start()
RS = Location.rs()
RF = Location.rf()


# -- guards ------------------------------------------------------------------

@dataclass(frozen=True)
class Cmp:
    prop_index: int
    required: int  # 0 or 1

    def __str__(self) -> str:
        return f"p[{self.prop_index}]=={self.required}"


@dataclass(frozen=True)
class GuardAnd:
    left: "Guard"
    right: "Guard"


@dataclass(frozen=True)
class GuardOr:
    left: "Guard"
    right: "Guard"


@dataclass(frozen=True)
class TrueGuard:
    pass


Guard = Union[Cmp, GuardAnd, GuardOr, TrueGuard]
TRUE_GUARD = TrueGuard()


def compile_guard(f: Formula) -> Guard:
    if isinstance(f, Lit):
        return Cmp(f.literal.prop_index, 0 if f.literal.negated else 1)
    if isinstance(f, And):
        return GuardAnd(compile_guard(f.left), compile_guard(f.right))
    if isinstance(f, Or):
        return GuardOr(compile_guard(f.left), compile_guard(f.right))
    raise TypeError(f"not a formula node: {f!r}")


def format_guard(g: Guard, top: bool = True) -> str:
    """UPPAAL expression text, e.g. ``p[0]==1 || p[3]==1``."""
    if isinstance(g, Cmp):
        return str(g)
    if isinstance(g, TrueGuard):
        return "true"
    op = " && " if isinstance(g, GuardAnd) else " || "
    text = format_guard(g.left, False) + op + format_guard(g.right, False)
    return text if top else f"({text})"


# -- updates -----------------------------------------------------------------

@dataclass(frozen=True)
class Assign:
    prop_index: int
    value: int  # 0 or 1

    def __str__(self) -> str:
        return f"p[{self.prop_index}]={self.value}"


@dataclass(frozen=True)
class SetRuleUsed:
    rule_id: int

    def __str__(self) -> str:
        return f"r[{self.rule_id}]=true"


@dataclass(frozen=True)
class InitP:
    def __str__(self) -> str:
        return "initp()"


Assignment = Union[Assign, SetRuleUsed, InitP]
Update = Tuple[Assignment, ...]


def compile_update(rhs: Sequence[Literal]) -> Update:
    return tuple(Assign(l.prop_index, 0 if l.negated else 1) for l in rhs)


def format_update(u: Update) -> str:
    return ", ".join(str(a) for a in u)


# -- template ----------------------------------------------------------------

@dataclass(frozen=True)
class Edge:
    src: Location
    guard: Guard
    update: Update
    dst: Location

    def label(self, names: Optional[Sequence[str]] = None) -> str:
        return f"{self.src.label(names)} -> {self.dst.label(names)}"


@dataclass(frozen=True)
class InitPolicy:
    seed_rule: int = 0


@dataclass(frozen=True)
class TemplateAutomaton:
    rule_base: RuleBase
    locations: Tuple[Location, ...]
    edges: Tuple[Edge, ...]
    initial: Location = START

    @property
    def names(self) -> List[str]:
        return self.rule_base.names

    def outgoing(self) -> Dict[Location, List[int]]:
        """Edge indices grouped by source location, in declaration order."""
        out: Dict[Location, List[int]] = {loc: [] for loc in self.locations}
        for i, edge in enumerate(self.edges):
            out[edge.src].append(i)
        return out


def build_template(rb: RuleBase, policy: InitPolicy = InitPolicy()) -> TemplateAutomaton:
    if not 0 <= policy.seed_rule < rb.rule_count:
        raise ValueError(f"seed rule {policy.seed_rule} out of range 0..{rb.rule_count - 1}")
    locations = [START, RS, RF] + [Location.rule(rule.id) for rule in rb.rules]
    edges = [Edge(START, TRUE_GUARD, (InitP(),), RS)]
    for rule in rb.rules:
        loc = Location.rule(rule.id)
        edges.append(Edge(RS, compile_guard(rule.lhs), compile_update(rule.rhs), loc))
        edges.append(Edge(loc, TRUE_GUARD, (SetRuleUsed(rule.id),), RF))
    edges.append(Edge(RF, TRUE_GUARD, (), RS))
    return TemplateAutomaton(rb, tuple(locations), tuple(edges))


def minimal_models(f: Formula) -> List[Tuple[Literal, ...]]:
    """Minimal consistent literal sets that make ``f`` true, in DNF order.

    Unmentioned propositions stay NOTHING, which satisfies no literal, so a
    partial assignment satisfies ``f`` exactly when it contains one of these
    sets.
    """
    def dnf(node: Formula) -> List[frozenset]:
        if isinstance(node, Lit):
            return [frozenset([node.literal])]
        if isinstance(node, Or):
            return dnf(node.left) + dnf(node.right)
        terms = []
        for a in dnf(node.left):
            for b in dnf(node.right):
                term = a | b
                props = [l.prop_index for l in term]
                if len(props) == len(set(props)):
                    terms.append(term)
        return terms

    terms = dnf(f)
    unique = list(dict.fromkeys(terms))
    minimal = [t for t in unique if not any(o < t for o in unique)]
    return [tuple(sorted(t, key=lambda l: l.prop_index)) for t in minimal]


def initial_stores(rb: RuleBase, policy: InitPolicy = InitPolicy()) -> List[ValuationStore]:
    """Stores right after ``initp()``: all NOTHING, overlaid with one minimal
    model of the seed rule's condition. One store per model, duplicates dropped.

    An unsatisfiable seed condition leaves a single all-NOTHING store.
    """
    if not 0 <= policy.seed_rule < rb.rule_count:
        raise ValueError(f"seed rule {policy.seed_rule} out of range 0..{rb.rule_count - 1}")
    lhs = rb.rules[policy.seed_rule].lhs
    blank = ValuationStore.blank(rb.prop_count, rb.rule_count)
    stores = []
    for model in minimal_models(lhs) or [()]:
        p = list(blank.p)
        for l in model:
            p[l.prop_index] = TriValue.FALSE if l.negated else TriValue.TRUE
        stores.append(ValuationStore(tuple(p), blank.r))
    return list(dict.fromkeys(stores))

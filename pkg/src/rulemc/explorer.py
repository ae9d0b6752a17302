"""Explicit-state exploration of two template instances over shared globals.

Processes ``es1`` and ``es2`` interleave: each step moves exactly one process
along one enabled edge of the template. Arrays ``p`` and ``r`` are shared.
Reachability (``E<>``) is decided by breadth-first search, so witnesses are
shortest; ``A[]`` is its dual.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from .automaton import (
    Assign,
    Cmp,
    Guard,
    GuardAnd,
    GuardOr,
    InitP,
    InitPolicy,
    Location,
    SetRuleUsed,
    TemplateAutomaton,
    TriValue,
    TrueGuard,
    Update,
    ValuationStore,
    build_template,
    initial_stores,
)
from .rulebase import RuleBase

DEFAULT_STATE_CAP = 10**7


class ResourceLimit(RuntimeError):
    """The exploration visited more states than the configured cap."""

    def __init__(self, cap: int, explored: int):
        super().__init__(f"state cap of {cap} exceeded after {explored} states; raise the cap")
        self.cap = cap
        self.explored = explored


@dataclass(frozen=True)
class ProductState:
    loc1: Location
    loc2: Location
    store: ValuationStore

    def loc(self, process: int) -> Location:
        return self.loc1 if process == 1 else self.loc2


# -- state predicates --------------------------------------------------------

class StatePredicate:
    """Boolean condition on a :class:`ProductState`.

    ``str()`` renders the query syntax accepted by :mod:`rulemc.query`.
    """

    def holds(self, state: ProductState) -> bool:
        raise NotImplementedError

    def render(self, names: Optional[Sequence[str]] = None) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.render()

    def __and__(self, other: "StatePredicate") -> "StatePredicate":
        return PAnd(self, other)

    def __or__(self, other: "StatePredicate") -> "StatePredicate":
        return POr(self, other)

    def __invert__(self) -> "StatePredicate":
        return PNot(self)


@dataclass(frozen=True)
class PTrue(StatePredicate):
    value: bool = True

    def holds(self, state):
        return self.value

    def render(self, names=None):
        return "true" if self.value else "false"


@dataclass(frozen=True)
class AtLoc(StatePredicate):
    process: int
    location: Location

    def holds(self, state):
        return state.loc(self.process) == self.location

    def render(self, names=None):
        return f"es{self.process}.{self.location.label(names)}"


@dataclass(frozen=True)
class RuleUsed(StatePredicate):
    rule_id: int

    def holds(self, state):
        return state.store.r[self.rule_id]

    def render(self, names=None):
        return f"r[{self.rule_id}]==true"


@dataclass(frozen=True)
class AllRulesUsed(StatePredicate):
    def holds(self, state):
        return all(state.store.r)

    def render(self, names=None):
        return "forall (i:typem) r[i]==true"


@dataclass(frozen=True)
class PropIs(StatePredicate):
    prop_index: int
    value: int

    def holds(self, state):
        return state.store.p[self.prop_index] == self.value

    def render(self, names=None):
        return f"p[{self.prop_index}]=={int(self.value)}"


def _wrap(pred: StatePredicate, names, flat_type=None) -> str:
    text = pred.render(names)
    if isinstance(pred, (PAnd, POr)) and type(pred) is not flat_type:
        return f"({text})"
    return text


@dataclass(frozen=True)
class PAnd(StatePredicate):
    left: StatePredicate
    right: StatePredicate

    def holds(self, state):
        return self.left.holds(state) and self.right.holds(state)

    def render(self, names=None):
        return f"{_wrap(self.left, names, PAnd)} and {_wrap(self.right, names)}"


@dataclass(frozen=True)
class POr(StatePredicate):
    left: StatePredicate
    right: StatePredicate

    def holds(self, state):
        return self.left.holds(state) or self.right.holds(state)

    def render(self, names=None):
        return f"{_wrap(self.left, names, POr)} or {_wrap(self.right, names)}"


@dataclass(frozen=True)
class PNot(StatePredicate):
    inner: StatePredicate

    def holds(self, state):
        return not self.inner.holds(state)

    def render(self, names=None):
        inner = self.inner.render(names)
        if isinstance(self.inner, (PAnd, POr)):
            inner = f"({inner})"
        return f"not {inner}"


def check_indices(pred: StatePredicate, rb: RuleBase) -> None:
    """Raise ``ValueError`` if ``pred`` mentions a rule or proposition outside ``rb``."""
    if isinstance(pred, (PAnd, POr)):
        check_indices(pred.left, rb)
        check_indices(pred.right, rb)
    elif isinstance(pred, PNot):
        check_indices(pred.inner, rb)
    elif isinstance(pred, AtLoc):
        if pred.process not in (1, 2):
            raise ValueError(f"process must be 1 or 2, not {pred.process}")
        rid = pred.location.rule_id
        if rid is not None and not 0 <= rid < rb.rule_count:
            raise ValueError(f"rule location {rid} out of range")
    elif isinstance(pred, RuleUsed):
        if not 0 <= pred.rule_id < rb.rule_count:
            raise ValueError(f"rule index {pred.rule_id} out of range")
    elif isinstance(pred, PropIs):
        if not 0 <= pred.prop_index < rb.prop_count:
            raise ValueError(f"proposition index {pred.prop_index} out of range")
        if pred.value not in (0, 1, 2):
            raise ValueError(f"proposition value must be 0, 1 or 2, not {pred.value}")


# -- edge semantics ----------------------------------------------------------

def eval_guard(g: Guard, s: ValuationStore) -> bool:
    if isinstance(g, Cmp):
        return s.p[g.prop_index] == g.required
    if isinstance(g, GuardAnd):
        return eval_guard(g.left, s) and eval_guard(g.right, s)
    if isinstance(g, GuardOr):
        return eval_guard(g.left, s) or eval_guard(g.right, s)
    if isinstance(g, TrueGuard):
        return True
    raise TypeError(f"not a guard: {g!r}")


def apply_update(u: Update, s: ValuationStore) -> ValuationStore:
    """Apply assignments in order.

    ``InitP`` leaves the store alone: exploration starts from the stores
    ``initp()`` produces, and no rule can fire before the first process
    leaves ``start``, so the one-shot call never changes anything.
    """
    p = None
    r = None
    for a in u:
        if isinstance(a, Assign):
            if p is None:
                p = list(s.p)
            p[a.prop_index] = a.value
        elif isinstance(a, SetRuleUsed):
            if r is None:
                r = list(s.r)
            r[a.rule_id] = True
        elif not isinstance(a, InitP):
            raise TypeError(f"not an assignment: {a!r}")
    if p is None and r is None:
        return s
    return ValuationStore(s.p if p is None else tuple(p), s.r if r is None else tuple(r))


# -- traces and verdicts -----------------------------------------------------

@dataclass(frozen=True)
class Step:
    process: int
    edge_index: int
    state: ProductState

    def describe(self, ta: TemplateAutomaton) -> str:
        return f"es{self.process}: {ta.edges[self.edge_index].label(ta.names)}"


@dataclass(frozen=True)
class WitnessTrace:
    initial: ProductState
    steps: Tuple[Step, ...]

    @property
    def final(self) -> ProductState:
        return self.steps[-1].state if self.steps else self.initial

    def __len__(self) -> int:
        return len(self.steps)

    def states(self) -> List[ProductState]:
        return [self.initial] + [step.state for step in self.steps]


@dataclass(frozen=True)
class Verdict:
    satisfied: bool
    witness: Optional[WitnessTrace]
    states_explored: int
    distinct_location_pairs: int


class ReachStats(NamedTuple):
    states: int
    location_pairs: int


class WitnessError(ValueError):
    pass


def replay_witness(trace: WitnessTrace, ta: TemplateAutomaton,
                   initial: Iterable[ValuationStore] = (),
                   pred: Optional[StatePredicate] = None) -> ProductState:
    """Re-execute ``trace`` edge by edge and return its final state.

    Raises :class:`WitnessError` at the first step whose guard fails, whose
    source location is wrong, or whose recorded state differs from the
    recomputed one. ``initial``, when given, must contain the trace's
    starting store; ``pred``, when given, must hold at the end.
    """
    initial = list(initial)
    start = trace.initial
    if start.loc1 != ta.initial or start.loc2 != ta.initial:
        raise WitnessError("trace does not start with both processes at the initial location")
    if initial and start.store not in initial:
        raise WitnessError("trace does not start from an initial store")
    state = start
    for n, step in enumerate(trace.steps):
        if step.process not in (1, 2) or not 0 <= step.edge_index < len(ta.edges):
            raise WitnessError(f"step {n}: bad process or edge index")
        edge = ta.edges[step.edge_index]
        if state.loc(step.process) != edge.src:
            raise WitnessError(f"step {n}: es{step.process} is not at {edge.src.label(ta.names)}")
        if not eval_guard(edge.guard, state.store):
            raise WitnessError(f"step {n}: guard of {edge.label(ta.names)} is false")
        store = apply_update(edge.update, state.store)
        if step.process == 1:
            state = ProductState(edge.dst, state.loc2, store)
        else:
            state = ProductState(state.loc1, edge.dst, store)
        if state != step.state:
            raise WitnessError(f"step {n}: recorded state differs from replayed state")
    if pred is not None and not pred.holds(state):
        raise WitnessError("final state does not satisfy the predicate")
    return state


# -- exploration -------------------------------------------------------------

class Explorer:
    """Reusable exploration context for one rule base and init policy."""

    def __init__(self, rb: RuleBase, policy: InitPolicy = InitPolicy(),
                 cap: int = DEFAULT_STATE_CAP):
        if cap < 1:
            raise ValueError("state cap must be at least 1")
        self.rule_base = rb
        self.policy = policy
        self.cap = cap
        self.template = build_template(rb, policy)
        self.initial_stores = initial_stores(rb, policy)
        self._outgoing = self.template.outgoing()
        self._moves: Dict[Tuple[Location, ValuationStore], list] = {}

    def initial_states(self) -> List[ProductState]:
        loc = self.template.initial
        return [ProductState(loc, loc, store) for store in self.initial_stores]

    def _process_moves(self, loc: Location, store: ValuationStore):
        key = (loc, store)
        moves = self._moves.get(key)
        if moves is None:
            moves = []
            for i in self._outgoing[loc]:
                edge = self.template.edges[i]
                if eval_guard(edge.guard, store):
                    moves.append((i, edge.dst, apply_update(edge.update, store)))
            self._moves[key] = moves
        return moves

    def successors(self, st: ProductState) -> List[Tuple[Step, ProductState]]:
        out = []
        for i, dst, store in self._process_moves(st.loc1, st.store):
            nxt = ProductState(dst, st.loc2, store)
            out.append((Step(1, i, nxt), nxt))
        for i, dst, store in self._process_moves(st.loc2, st.store):
            nxt = ProductState(st.loc1, dst, store)
            out.append((Step(2, i, nxt), nxt))
        return out

    def _search(self, pred: Optional[StatePredicate]):
        parents: Dict[ProductState, Optional[Tuple[ProductState, Step]]] = {}
        queue = deque()
        for st in self.initial_states():
            if st in parents:
                continue
            parents[st] = None
            if pred is not None and pred.holds(st):
                return st, parents
            queue.append(st)
        while queue:
            st = queue.popleft()
            for step, nxt in self.successors(st):
                if nxt in parents:
                    continue
                parents[nxt] = (st, step)
                if len(parents) > self.cap:
                    raise ResourceLimit(self.cap, len(parents))
                if pred is not None and pred.holds(nxt):
                    return nxt, parents
                queue.append(nxt)
        return None, parents

    @staticmethod
    def _trace(goal: ProductState, parents) -> WitnessTrace:
        steps = []
        st = goal
        while parents[st] is not None:
            prev, step = parents[st]
            steps.append(step)
            st = prev
        return WitnessTrace(st, tuple(reversed(steps)))

    def check_ef(self, pred: StatePredicate) -> Verdict:
        check_indices(pred, self.rule_base)
        goal, parents = self._search(pred)
        pairs = len({(st.loc1, st.loc2) for st in parents})
        witness = self._trace(goal, parents) if goal is not None else None
        return Verdict(goal is not None, witness, len(parents), pairs)

    def check_ag(self, pred: StatePredicate) -> Verdict:
        """``A[] pred`` as ``not E<> not pred``; the witness is a counterexample."""
        v = self.check_ef(PNot(pred))
        return Verdict(not v.satisfied, v.witness, v.states_explored, v.distinct_location_pairs)

    def reachable_states(self) -> List[ProductState]:
        _, parents = self._search(None)
        return list(parents)

    def reachable_stats(self) -> ReachStats:
        states = self.reachable_states()
        return ReachStats(len(states), len({(st.loc1, st.loc2) for st in states}))


def successors(st: ProductState, ta: TemplateAutomaton) -> List[Tuple[Step, ProductState]]:
    """One-step successors: process 1's moves first, then process 2's, each
    in template edge order."""
    out = []
    for process in (1, 2):
        loc = st.loc(process)
        for i, edge in enumerate(ta.edges):
            if edge.src != loc or not eval_guard(edge.guard, st.store):
                continue
            store = apply_update(edge.update, st.store)
            if process == 1:
                nxt = ProductState(edge.dst, st.loc2, store)
            else:
                nxt = ProductState(st.loc1, edge.dst, store)
            out.append((Step(process, i, nxt), nxt))
    return out


def check_ef(rb: RuleBase, policy: InitPolicy, pred: StatePredicate,
             cap: int = DEFAULT_STATE_CAP) -> Verdict:
    return Explorer(rb, policy, cap).check_ef(pred)


def check_ag(rb: RuleBase, policy: InitPolicy, pred: StatePredicate,
             cap: int = DEFAULT_STATE_CAP) -> Verdict:
    return Explorer(rb, policy, cap).check_ag(pred)


def reachable_stats(rb: RuleBase, policy: InitPolicy = InitPolicy(),
                    cap: int = DEFAULT_STATE_CAP) -> ReachStats:
    return Explorer(rb, policy, cap).reachable_stats()


def location_pair_bound(rb: RuleBase) -> int:
    return (3 + rb.rule_count) ** 2


__all__ = [
    "AllRulesUsed", "AtLoc", "DEFAULT_STATE_CAP", "Explorer", "PAnd", "PNot", "POr",
    "PTrue", "ProductState", "PropIs", "ReachStats", "ResourceLimit", "RuleUsed",
    "StatePredicate", "Step", "TriValue", "Verdict", "WitnessError", "WitnessTrace",
    "apply_update", "check_ag", "check_ef", "check_indices", "eval_guard",
    "location_pair_bound", "reachable_stats", "replay_witness", "successors",
]

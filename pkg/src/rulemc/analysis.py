"""Confliction and unreachability checks, aggregated into a report."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from .automaton import InitPolicy, Location, ValuationStore
from .explorer import (
    DEFAULT_STATE_CAP,
    AllRulesUsed,
    AtLoc,
    Explorer,
    ProductState,
    ReachStats,
    ResourceLimit,
    Step,
    WitnessTrace,
)
from .rulebase import RuleBase


@dataclass(frozen=True)
class ConflictCandidate:
    rule_x: int  # asserts the proposition
    rule_y: int  # asserts its negation
    prop_index: int


@dataclass(frozen=True)
class ConflictFinding:
    candidate: ConflictCandidate
    confirmed: bool
    witness: Optional[WitnessTrace] = None


@dataclass(frozen=True)
class ReachabilityFinding:
    rule_id: int
    reachable: bool
    witness: Optional[WitnessTrace] = None


@dataclass
class AnalysisReport:
    rules: int
    props: int
    names: List[str]
    policy: InitPolicy
    initial_p: List[Tuple[int, ...]]
    conflicts: List[ConflictFinding] = field(default_factory=list)
    all_rules_used: Optional[bool] = None
    reachability: List[ReachabilityFinding] = field(default_factory=list)
    stats: Optional[ReachStats] = None
    completed: List[str] = field(default_factory=list)

    @property
    def confirmed_conflicts(self) -> List[ConflictFinding]:
        return [c for c in self.conflicts if c.confirmed]

    @property
    def unreachable_rules(self) -> List[int]:
        return [f.rule_id for f in self.reachability if not f.reachable]

    @property
    def has_findings(self) -> bool:
        return bool(self.confirmed_conflicts or self.unreachable_rules)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "rules": self.rules,
            "props": self.props,
            "names": list(self.names),
            "init": {
                "seed_rule": self.policy.seed_rule,
                "initial_p": [list(p) for p in self.initial_p],
            },
            "conflicts": [
                {
                    "x": c.candidate.rule_x,
                    "y": c.candidate.rule_y,
                    "prop": c.candidate.prop_index,
                    "confirmed": c.confirmed,
                    "witness": _trace_to_list(c.witness, self.names),
                }
                for c in self.conflicts
            ],
            "all_rules_used": self.all_rules_used,
            "reachability": [
                {
                    "rule": f.rule_id,
                    "reachable": f.reachable,
                    "witness": _trace_to_list(f.witness, self.names),
                }
                for f in self.reachability
            ],
            "stats": None if self.stats is None else {
                "states": self.stats.states,
                "location_pairs": self.stats.location_pairs,
            },
            "completed": list(self.completed),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AnalysisReport":
        names = data["names"]
        stats = data.get("stats")
        return cls(
            rules=data["rules"],
            props=data["props"],
            names=list(names),
            policy=InitPolicy(data["init"]["seed_rule"]),
            initial_p=[tuple(p) for p in data["init"]["initial_p"]],
            conflicts=[
                ConflictFinding(
                    ConflictCandidate(c["x"], c["y"], c["prop"]),
                    c["confirmed"],
                    _trace_from_list(c.get("witness"), names),
                )
                for c in data["conflicts"]
            ],
            all_rules_used=data["all_rules_used"],
            reachability=[
                ReachabilityFinding(f["rule"], f["reachable"],
                                    _trace_from_list(f.get("witness"), names))
                for f in data["reachability"]
            ],
            stats=None if stats is None else ReachStats(stats["states"], stats["location_pairs"]),
            completed=list(data.get("completed", [])),
        )

    @classmethod
    def from_json(cls, text: str) -> "AnalysisReport":
        return cls.from_dict(json.loads(text))


def _state_to_dict(st: ProductState, names) -> Dict[str, Any]:
    return {
        "es1": st.loc1.label(names),
        "es2": st.loc2.label(names),
        "p": list(st.store.p),
        "r": list(st.store.r),
    }


def _loc_from_label(label: str, names) -> Location:
    fixed = {"start": 0, "rs": 1, "rf": 2}
    if label in fixed:
        return Location.from_index(fixed[label])
    return Location.rule(names.index(label))


def _state_from_dict(d: Dict[str, Any], names) -> ProductState:
    return ProductState(_loc_from_label(d["es1"], names), _loc_from_label(d["es2"], names),
                        ValuationStore(tuple(d["p"]), tuple(d["r"])))


def _trace_to_list(trace: Optional[WitnessTrace], names) -> Optional[List[Dict[str, Any]]]:
    # entry 0 is the initial state (no process, no edge)
    if trace is None:
        return None
    out = [{"process": None, "edge": None, "state": _state_to_dict(trace.initial, names)}]
    for step in trace.steps:
        out.append({"process": step.process, "edge": step.edge_index,
                    "state": _state_to_dict(step.state, names)})
    return out


def _trace_from_list(items, names) -> Optional[WitnessTrace]:
    if items is None:
        return None
    initial = _state_from_dict(items[0]["state"], names)
    steps = tuple(Step(i["process"], i["edge"], _state_from_dict(i["state"], names))
                  for i in items[1:])
    return WitnessTrace(initial, steps)


def conflict_candidates(rb: RuleBase) -> List[ConflictCandidate]:
    """Ordered pairs of rules deducing ``p_i`` and ``~p_i`` respectively,
    sorted by (proposition, positive rule, negative rule)."""
    pos: Dict[int, List[int]] = {}
    neg: Dict[int, List[int]] = {}
    for rule in rb.rules:
        for l in rule.rhs:
            (neg if l.negated else pos).setdefault(l.prop_index, []).append(rule.id)
    out = []
    for prop in sorted(pos):
        for x in pos[prop]:
            for y in neg.get(prop, []):
                if x != y:
                    out.append(ConflictCandidate(x, y, prop))
    return sorted(out, key=lambda c: (c.prop_index, c.rule_x, c.rule_y))


def conflict_predicate(cand: ConflictCandidate):
    return AtLoc(1, Location.rule(cand.rule_x)) & AtLoc(2, Location.rule(cand.rule_y))


def verify_conflict(rb: RuleBase, policy: InitPolicy, cand: ConflictCandidate,
                    explorer: Optional[Explorer] = None) -> ConflictFinding:
    explorer = explorer or Explorer(rb, policy)
    v = explorer.check_ef(conflict_predicate(cand))
    return ConflictFinding(cand, v.satisfied, v.witness)


def verify_unreachability(rb: RuleBase, policy: InitPolicy,
                          explorer: Optional[Explorer] = None
                          ) -> Tuple[bool, List[ReachabilityFinding]]:
    """Global all-rules-used query, then one ``E<> es1.ri`` query per rule."""
    explorer = explorer or Explorer(rb, policy)
    all_used = explorer.check_ef(AllRulesUsed()).satisfied
    findings = []
    for rule in rb.rules:
        v = explorer.check_ef(AtLoc(1, Location.rule(rule.id)))
        findings.append(ReachabilityFinding(rule.id, v.satisfied, v.witness))
    return all_used, findings


class AnalysisInterrupted(ResourceLimit):
    """A :class:`ResourceLimit` carrying the partially filled report."""

    def __init__(self, cause: ResourceLimit, report: AnalysisReport):
        super().__init__(cause.cap, cause.explored)
        self.report = report


def analyze(rb: RuleBase, policy: InitPolicy = InitPolicy(),
            cap: int = DEFAULT_STATE_CAP) -> AnalysisReport:
    """Run conflict, unreachability and state-count checks.

    On a state-cap overflow raises :class:`AnalysisInterrupted`, whose
    ``report.completed`` lists the checks that finished.
    """
    explorer = Explorer(rb, policy, cap)
    report = AnalysisReport(
        rules=rb.rule_count,
        props=rb.prop_count,
        names=rb.names,
        policy=policy,
        initial_p=[s.p for s in explorer.initial_stores],
    )
    try:
        report.conflicts = [verify_conflict(rb, policy, c, explorer)
                            for c in conflict_candidates(rb)]
        report.completed.append("conflicts")
        all_used, findings = verify_unreachability(rb, policy, explorer)
        report.all_rules_used = all_used and all(f.reachable for f in findings)
        report.reachability = findings
        report.completed.append("unreachability")
        report.stats = explorer.reachable_stats()
        report.completed.append("stats")
    except ResourceLimit as exc:
        raise AnalysisInterrupted(exc, report) from exc
    return report

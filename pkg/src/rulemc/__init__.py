"""Model checking of propositional rule bases for confliction and unreachability."""
from .analysis import (
    AnalysisReport,
    ConflictCandidate,
    ConflictFinding,
    ReachabilityFinding,
    analyze,
    conflict_candidates,
    verify_conflict,
    verify_unreachability,
)
from .automaton import InitPolicy, Location, TriValue, ValuationStore, build_template, initial_stores
from .explorer import (
    AllRulesUsed,
    AtLoc,
    Explorer,
    ProductState,
    ResourceLimit,
    Verdict,
    WitnessTrace,
    check_ag,
    check_ef,
    reachable_stats,
    replay_witness,
)
from .query import parse_query
from .rulebase import ParseError, RuleBase, parse_rule_base, validate
from .uppaal_export import export_bundle, export_model, export_queries

__version__ = "0.1.0"

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from randomrb import random_rule_base
from rulemc.analysis import (
    AnalysisInterrupted,
    AnalysisReport,
    ConflictCandidate,
    analyze,
    conflict_candidates,
    verify_conflict,
    verify_unreachability,
)
from rulemc.automaton import InitPolicy, Location
from rulemc.explorer import AtLoc, Explorer, ResourceLimit, replay_witness
from rulemc.rulebase import parse_rule_base

DEFAULT = InitPolicy()


def test_candidates_example(example_rb):
    assert conflict_candidates(example_rb) == [
        ConflictCandidate(0, 1, 4),
        ConflictCandidate(3, 1, 4),
    ]


def test_candidates_none():
    assert conflict_candidates(parse_rule_base("r0: p0 -> p1")) == []


def test_candidates_single_pair():
    rb = parse_rule_base("r0: p0 -> p1\nr1: p0 -> ~p1")
    assert conflict_candidates(rb) == [ConflictCandidate(0, 1, 1)]


def test_candidates_ordering():
    rb = parse_rule_base("r0: p0 -> ~p2 & p1\nr1: p0 -> p2 & ~p1\nr2: p0 -> p1 & p2")
    assert [(c.prop_index, c.rule_x, c.rule_y) for c in conflict_candidates(rb)] == [
        (1, 0, 1), (1, 2, 1), (2, 1, 0), (2, 2, 0),
    ]


def test_verify_conflict_example(example_rb):
    finding = verify_conflict(example_rb, DEFAULT, ConflictCandidate(0, 1, 4))
    assert finding.confirmed
    assert finding.witness.final.loc1 == Location.rule(0)
    assert finding.witness.final.loc2 == Location.rule(1)


def test_verify_conflict_r3_r1(example_rb):
    # oracle.ef finds the joint location at depth 7
    finding = verify_conflict(example_rb, DEFAULT, ConflictCandidate(3, 1, 4))
    assert finding.confirmed
    assert len(finding.witness) == 7


def test_verify_conflict_unconfirmed():
    rb = parse_rule_base("r0: p0 -> p1\nr1: p2 -> ~p1")
    finding = verify_conflict(rb, DEFAULT, ConflictCandidate(0, 1, 1))
    assert not finding.confirmed and finding.witness is None


def test_unreachability_example(example_rb):
    all_used, findings = verify_unreachability(example_rb, DEFAULT)
    assert all_used is False
    assert [f.reachable for f in findings] == [True, True, False, True, True]
    assert findings[2].witness is None


def test_unreachability_single_rule():
    all_used, findings = verify_unreachability(parse_rule_base("r0: p0 -> p0"), DEFAULT)
    assert all_used is True
    assert findings[0].reachable


def test_unreachability_dead_second_rule():
    all_used, findings = verify_unreachability(parse_rule_base("r0: p0 -> p1\nr1: p2 -> p3"), DEFAULT)
    assert all_used is False
    assert [f.reachable for f in findings] == [True, False]


def test_each_reachable_but_not_all_used():
    # whichever rule fires first clears p0, so the other can never fire after it
    rb = parse_rule_base("r0: p0 -> p1 & ~p0\nr1: p0 -> p2 & ~p0")
    all_used, findings = verify_unreachability(rb, DEFAULT)
    assert all(f.reachable for f in findings)
    assert all_used is False
    assert oracle.ef(rb, oracle.all_used) is None


def test_analyze_example(example_rb):
    report = analyze(example_rb)
    assert len(report.conflicts) == 2
    assert all(c.confirmed for c in report.conflicts)
    assert report.all_rules_used is False
    assert len(report.reachability) == 5
    assert report.unreachable_rules == [2]
    assert report.stats.location_pairs <= 64
    assert report.completed == ["conflicts", "unreachability", "stats"]
    assert report.has_findings


def test_analyze_no_conflicts():
    report = analyze(parse_rule_base("r0: p0 -> p1\nr1: p1 -> p2"))
    assert report.conflicts == []
    assert report.all_rules_used is True
    assert not report.has_findings


def test_json_round_trip(example_rb):
    report = analyze(example_rb)
    again = AnalysisReport.from_json(report.to_json())
    assert again == report
    assert again.to_json() == report.to_json()


def test_json_shape(example_rb):
    data = analyze(example_rb).to_dict()
    assert {"rules", "props", "init", "conflicts", "all_rules_used",
            "reachability", "stats"} <= set(data)
    assert data["conflicts"][0]["x"] == 0 and data["conflicts"][0]["y"] == 1
    assert data["conflicts"][0]["prop"] == 4
    assert data["stats"] == {"states": 706, "location_pairs": 49}
    assert data["init"]["initial_p"] == [[1, 2, 2, 2, 2]]


def test_interrupted_report_marks_progress(example_rb):
    with pytest.raises(ResourceLimit) as info:
        analyze(example_rb, DEFAULT, cap=300)
    assert isinstance(info.value, AnalysisInterrupted)
    assert "stats" not in info.value.report.completed


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_report_properties(seed):
    rng = random.Random(seed)
    rb = random_rule_base(rng, 6, 5)
    policy = InitPolicy(rng.randrange(rb.rule_count))
    report = analyze(rb, policy)
    ex = Explorer(rb, policy)
    assert len(report.reachability) == rb.rule_count
    assert report.all_rules_used == (oracle.ef(rb, oracle.all_used, policy.seed_rule) is not None)
    if report.all_rules_used:
        assert all(f.reachable for f in report.reachability)
    for c in report.conflicts:
        x, y = rb.rules[c.candidate.rule_x], rb.rules[c.candidate.rule_y]
        i = c.candidate.prop_index
        assert any(l.prop_index == i and not l.negated for l in x.rhs)
        assert any(l.prop_index == i and l.negated for l in y.rhs)
        swapped = ex.check_ef(AtLoc(1, Location.rule(y.id)) & AtLoc(2, Location.rule(x.id)))
        assert swapped.satisfied == c.confirmed
        if c.confirmed:
            replay_witness(c.witness, ex.template, ex.initial_stores)
    for f in report.reachability:
        if f.reachable:
            replay_witness(f.witness, ex.template, ex.initial_stores,
                           AtLoc(1, Location.rule(f.rule_id)))

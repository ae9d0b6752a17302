"""Command-line interface: ``rulemc check|query|export|stats``.

Exit status: 0 clean / satisfied, 1 findings / not satisfied, 2 input or I/O
error, 3 state cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional, Sequence, TextIO

from .analysis import AnalysisInterrupted, AnalysisReport, analyze
from .automaton import InitPolicy, TemplateAutomaton, build_template
from .explorer import DEFAULT_STATE_CAP, Explorer, ResourceLimit, WitnessTrace, location_pair_bound
from .query import QueryError, parse_query
from .rulebase import ParseError, RuleBase, parse_rule_base, validate
from .uppaal_export import export_bundle

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_INPUT = 2
EXIT_LIMIT = 3


class InputError(Exception):
    pass


def _load(path: str) -> RuleBase:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: cannot read: {exc.strerror or exc}") from exc
    try:
        rb = parse_rule_base(text)
    except ParseError as exc:
        raise InputError(f"{path}:{exc.line}:{exc.column}: {exc.message}") from exc
    problems = validate(rb)
    if problems:
        raise InputError("\n".join(f"{path}: {d}" for d in problems))
    return rb


def _policy(rb: RuleBase, seed: str) -> InitPolicy:
    if seed.isdigit():
        idx = int(seed)
    else:
        try:
            idx = rb.rule_named(seed).id
        except KeyError:
            raise InputError(f"unknown seed rule {seed!r}") from None
    if not 0 <= idx < rb.rule_count:
        raise InputError(f"seed rule index {idx} out of range 0..{rb.rule_count - 1}")
    return InitPolicy(idx)


def _fmt_p(p) -> str:
    return "[" + ",".join(str(v) for v in p) + "]"


def format_trace(trace: WitnessTrace, ta: TemplateAutomaton, indent: str = "    ") -> List[str]:
    names = ta.names

    def state(st):
        r = "".join("T" if v else "F" for v in st.store.r)
        return (f"(es1.{st.loc1.label(names)}, es2.{st.loc2.label(names)}) "
                f"p={_fmt_p(st.store.p)} r={r}")

    lines = [f"{indent}init  {state(trace.initial)}"]
    for step in trace.steps:
        lines.append(f"{indent}{step.describe(ta):<16} {state(step.state)}")
    return lines


def format_report(report: AnalysisReport, ta: TemplateAutomaton, witness: bool = False) -> str:
    names = report.names
    out = [
        f"rule base: {report.rules} rules, {report.props} propositions",
        f"seed rule: {names[report.policy.seed_rule]}; initial p: "
        + " | ".join(_fmt_p(p) for p in report.initial_p),
        "",
        "confliction:",
    ]
    if not report.conflicts:
        out.append("  no conflict candidates")
    for c in report.conflicts:
        x, y = names[c.candidate.rule_x], names[c.candidate.rule_y]
        verdict = "CONFLICT" if c.confirmed else "no conflict"
        out.append(f"  {x} / {y} on p{c.candidate.prop_index}: {verdict} "
                   f"(E<> es1.{x} and es2.{y} "
                   f"{'satisfied' if c.confirmed else 'not satisfied'})")
        if witness and c.witness is not None:
            out.extend(format_trace(c.witness, ta))
    out += ["", "unreachability:",
            f"  all rules used: {'yes' if report.all_rules_used else 'no'}"]
    for f in report.reachability:
        out.append(f"  {names[f.rule_id]}: {'reachable' if f.reachable else 'UNREACHABLE'}")
        if witness and f.witness is not None:
            out.extend(format_trace(f.witness, ta))
    if report.stats is not None:
        m = report.rules
        out += ["", f"states: {report.stats.states}, location pairs: "
                    f"{report.stats.location_pairs} (bound (3+{m})^2 = {(3 + m) ** 2})"]
    return "\n".join(out) + "\n"


def _emit(text: str, out_path: Optional[str], stdout: TextIO) -> None:
    if out_path:
        try:
            Path(out_path).write_text(text, encoding="utf-8", newline="\n")
        except OSError as exc:
            raise InputError(f"{out_path}: cannot write: {exc.strerror or exc}") from exc
    else:
        stdout.write(text)


def cmd_check(args, stdout: TextIO) -> int:
    rb = _load(args.file)
    policy = _policy(rb, args.seed)
    report = analyze(rb, policy, args.cap)
    if args.format == "json":
        text = report.to_json()
    else:
        text = format_report(report, build_template(rb, policy), args.witness)
    _emit(text, args.out, stdout)
    return EXIT_FINDINGS if report.has_findings else EXIT_OK


def cmd_query(args, stdout: TextIO) -> int:
    rb = _load(args.file)
    policy = _policy(rb, args.seed)
    try:
        query = parse_query(args.query, rb)
    except QueryError as exc:
        raise InputError(f"query error {exc}") from exc
    explorer = Explorer(rb, policy, args.cap)
    if query.quantifier == "E<>":
        verdict = explorer.check_ef(query.predicate)
    else:
        verdict = explorer.check_ag(query.predicate)
    lines = ["property is satisfied" if verdict.satisfied else "property is not satisfied"]
    if args.witness and verdict.witness is not None:
        kind = "witness" if query.quantifier == "E<>" else "counterexample"
        lines.append(f"{kind}:")
        lines.extend(format_trace(verdict.witness, explorer.template))
    stdout.write("\n".join(lines) + "\n")
    return EXIT_OK if verdict.satisfied else EXIT_FINDINGS


def cmd_export(args, stdout: TextIO) -> int:
    rb = _load(args.file)
    policy = _policy(rb, args.seed)
    report = analyze(rb, policy, args.cap)
    bundle = export_bundle(rb, report)
    out_dir = Path(args.out) if args.out else Path(".")
    try:
        paths = bundle.write(out_dir, Path(args.file).stem)
    except OSError as exc:
        raise InputError(f"{out_dir}: cannot write export: {exc.strerror or exc}") from exc
    for p in paths:
        stdout.write(f"{p}\n")
    return EXIT_OK


def cmd_stats(args, stdout: TextIO) -> int:
    rb = _load(args.file)
    policy = _policy(rb, args.seed)
    stats = Explorer(rb, policy, args.cap).reachable_stats()
    bound = location_pair_bound(rb)
    if args.format == "json":
        text = json.dumps({"states": stats.states, "location_pairs": stats.location_pairs,
                           "bound": bound}, indent=2) + "\n"
    else:
        text = (f"reachable states:     {stats.states}\n"
                f"location pairs:       {stats.location_pairs}\n"
                f"bound (3+m)^2:        {bound}\n")
    _emit(text, args.out, stdout)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rulemc",
        description="Detect conflicting and unreachable rules by model checking.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="rule base file")
    common.add_argument("--seed", default="0",
                        help="rule whose condition initp() satisfies (name or index, default 0)")
    common.add_argument("--cap", type=int, default=DEFAULT_STATE_CAP,
                        help="maximum number of states to explore")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="run confliction and unreachability checks")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--witness", action="store_true", help="print witness traces")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("query", parents=[common], help="evaluate an E<> or A[] query")
    p.add_argument("query", help='e.g. "E<> es1.r0 and es2.r1"')
    p.add_argument("--witness", action="store_true", help="print a witness or counterexample")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("export", parents=[common], help="write UPPAAL model, queries and manifest")
    p.add_argument("--out", help="output directory (default: current directory)")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("stats", parents=[common], help="reachable state counts vs the (3+m)^2 bound")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", help="write here instead of stdout")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv: Optional[Sequence[str]] = None, stdout: TextIO = None, stderr: TextIO = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    if args.cap < 1:
        stderr.write("rulemc: --cap must be at least 1\n")
        return EXIT_INPUT
    try:
        return args.func(args, stdout)
    except InputError as exc:
        stderr.write(f"rulemc: {exc}\n")
        return EXIT_INPUT
    except AnalysisInterrupted as exc:
        done = ", ".join(exc.report.completed) or "none"
        stderr.write(f"rulemc: {exc} (completed checks: {done})\n")
        return EXIT_LIMIT
    except ResourceLimit as exc:
        stderr.write(f"rulemc: {exc}\n")
        return EXIT_LIMIT


if __name__ == "__main__":
    sys.exit(main())

"""UPPAAL 4.x model and query export.

The model mirrors :func:`rulemc.automaton.build_template`: one template named
``RuleBase`` instantiated twice as ``es1`` and ``es2``, with the arrays ``p``
and ``r`` global so both processes share them.
"""
from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List

from .analysis import AnalysisReport, conflict_predicate
from .automaton import (
    InitP,
    InitPolicy,
    Location,
    TemplateAutomaton,
    TrueGuard,
    build_template,
    format_guard,
    initial_stores,
)
from .explorer import AllRulesUsed, AtLoc
from .rulebase import RuleBase

TEMPLATE_NAME = "RuleBase"

_DOCTYPE = ("<!DOCTYPE nta PUBLIC '-//Uppaal Team//DTD Flat System 1.1//EN' "
            "'http://www.it.uu.se/research/group/darts/uppaal/flat-1_1.dtd'>")


@dataclass
class ExportBundle:
    model_xml: str
    queries_q: str
    manifest: Dict[int, dict]

    def write(self, directory: Path, name: str) -> List[Path]:
        directory = Path(directory)
        paths = [directory / f"{name}.xml", directory / f"{name}.q",
                 directory / f"{name}.manifest.json"]
        paths[0].write_text(self.model_xml, encoding="utf-8", newline="\n")
        paths[1].write_text(self.queries_q, encoding="utf-8", newline="\n")
        manifest = {str(k): v for k, v in self.manifest.items()}
        paths[2].write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8", newline="\n")
        return paths


def global_declarations(rb: RuleBase, policy: InitPolicy) -> str:
    n, m = rb.prop_count, rb.rule_count
    seed = initial_stores(rb, policy)[0].p
    seed_assigns = "".join(f"        p[{i}] = {v};\n" for i, v in enumerate(seed) if v != 2)
    values = ", ".join(str(v) for v in seed)
    return (
        "// p[i]: 0 = false, 1 = true, 2 = nothing\n"
        # p starts at the post-initp() valuation so states before the first
        # initp() call agree with the explorer's
        f"int[0,2] p[{n}] = {{{values}}};\n"
        f"bool r[{m}];\n"
        "bool initialized = false;\n"
        f"typedef int[0,{m - 1}] typem;\n"
        "\n"
        "void initp()\n"
        "{\n"
        "    int i;\n"
        "    if (!initialized) {\n"
        f"        for (i = 0; i < {n}; i++) {{\n"
        "            p[i] = 2;\n"
        "        }\n"
        f"{seed_assigns}"
        "        initialized = true;\n"
        "    }\n"
        "}\n"
    )


def _update_text(edge) -> str:
    return ", ".join("initp()" if isinstance(a, InitP) else str(a) for a in edge.update)


def _layout(loc: Location, m: int):
    # start, rs on the left column; rule locations in a column; rf on the right
    if loc.rule_id is not None:
        return 300, loc.rule_id * 100
    mid = (m - 1) * 50
    return {0: (0, mid), 1: (150, mid), 2: (450, mid)}[loc.index]


def export_model(rb: RuleBase, policy: InitPolicy = InitPolicy()) -> str:
    ta: TemplateAutomaton = build_template(rb, policy)
    names = ta.names
    m = rb.rule_count
    nta = ET.Element("nta")
    ET.SubElement(nta, "declaration").text = global_declarations(rb, policy)
    tpl = ET.SubElement(nta, "template")
    ET.SubElement(tpl, "name").text = TEMPLATE_NAME
    ET.SubElement(tpl, "declaration")
    ids = {}
    for loc in ta.locations:
        ids[loc] = f"id{loc.index}"
        x, y = _layout(loc, m)
        el = ET.SubElement(tpl, "location", id=ids[loc], x=str(x), y=str(y))
        ET.SubElement(el, "name", x=str(x - 10), y=str(y - 30)).text = loc.label(names)
    ET.SubElement(tpl, "init", ref=ids[ta.initial])
    for edge in ta.edges:
        tr = ET.SubElement(tpl, "transition")
        ET.SubElement(tr, "source", ref=ids[edge.src])
        ET.SubElement(tr, "target", ref=ids[edge.dst])
        sx, sy = _layout(edge.src, m)
        dx, dy = _layout(edge.dst, m)
        lx, ly = (sx + dx) // 2, (sy + dy) // 2
        if not isinstance(edge.guard, TrueGuard):
            ET.SubElement(tr, "label", kind="guard", x=str(lx), y=str(ly - 15)).text = \
                format_guard(edge.guard)
        if edge.update:
            ET.SubElement(tr, "label", kind="assignment", x=str(lx), y=str(ly)).text = \
                _update_text(edge)
        if (edge.src.index, edge.dst.index) == (2, 1):
            # rf -> rs would cross the rule column; bend it underneath
            ET.SubElement(tr, "nail", x="300", y=str(m * 100))
    ET.SubElement(nta, "system").text = (
        f"es1 = {TEMPLATE_NAME}();\nes2 = {TEMPLATE_NAME}();\nsystem es1, es2;\n"
    )
    ET.indent(nta)
    body = ET.tostring(nta, encoding="unicode")
    return f"<?xml version=\"1.0\" encoding=\"utf-8\"?>\n{_DOCTYPE}\n{body}\n"


def export_queries(rb: RuleBase, report: AnalysisReport):
    """Query text (one per line) and a manifest keyed by 1-based line number.

    Each manifest entry names the finding the line decides and the verdict
    the internal checker reached for it.
    """
    names = rb.names
    lines: List[str] = []
    manifest: Dict[int, dict] = {}
    for c in report.conflicts:
        cand = c.candidate
        lines.append("E<> " + conflict_predicate(cand).render(names))
        manifest[len(lines)] = {
            "kind": "conflict", "x": names[cand.rule_x], "y": names[cand.rule_y],
            "prop": f"p{cand.prop_index}", "expected": c.confirmed,
        }
    lines.append("E<> " + AllRulesUsed().render(names))
    manifest[len(lines)] = {"kind": "all_rules_used", "expected": report.all_rules_used}
    for f in report.reachability:
        lines.append("E<> " + AtLoc(1, Location.rule(f.rule_id)).render(names))
        manifest[len(lines)] = {"kind": "reachability", "rule": names[f.rule_id],
                                "expected": f.reachable}
    return "".join(line + "\n" for line in lines), manifest


def export_bundle(rb: RuleBase, report: AnalysisReport) -> ExportBundle:
    text, manifest = export_queries(rb, report)
    return ExportBundle(export_model(rb, report.policy), text, manifest)

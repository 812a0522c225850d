"""Conformance replay: the monitor against the reference evaluator.

After every transformation the monitor's cumulative verdicts are checked
against the oracle's verdict set on the current observation: everything
emitted must hold there (observational soundness) and everything the oracle
decides must already be emitted (observational completeness).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple, Union

from ..formula import FormulaTable
from ..ingestion import (
    Config,
    Message,
    RemoveGap,
    SetFacts,
    SetRegister,
    SplitAt,
    StreamIngestor,
    Transformation,
)
from ..monitor import GateGraph, MonitorError, Verdict
from ..oracle import verdict_set


@dataclass(frozen=True)
class Violation:
    kind: str  # "soundness" | "completeness" | "conflict" | "invariant"
    step: int
    ts: Optional[Fraction]
    detail: str


@dataclass
class CompareReport:
    steps: int = 0
    verdicts: Dict[Fraction, bool] = field(default_factory=dict)
    violations: List[Violation] = field(default_factory=list)

    @property
    def sound(self) -> bool:
        return not any(v.kind in ("soundness", "conflict") for v in self.violations)

    @property
    def complete(self) -> bool:
        return not any(v.kind == "completeness" for v in self.violations)

    @property
    def ok(self) -> bool:
        return not self.violations


def apply_transformation(graph: GateGraph, tr: Transformation) -> List[Verdict]:
    if isinstance(tr, SplitAt):
        return graph.add_time_point(tr.gap, tr.ts)
    if isinstance(tr, RemoveGap):
        return graph.remove_interval(tr.gap)
    if isinstance(tr, SetFacts):
        return graph.set_facts(tr.ts, tr.pred, tr.rel)
    if isinstance(tr, SetRegister):
        return graph.set_register(tr.ts, tr.register, tr.value)
    raise TypeError(f"unknown transformation {tr!r}")


def compare_transformations(
    table: FormulaTable,
    transformations: Iterable[Transformation],
    check_nodes: bool = False,
    fail_fast: bool = False,
) -> CompareReport:
    graph = GateGraph(table, debug_checks=False)
    report = CompareReport()
    emitted: Dict[Fraction, bool] = report.verdicts
    for step, tr in enumerate(transformations):
        try:
            batch = apply_transformation(graph, tr)
        except MonitorError as exc:
            report.violations.append(Violation("conflict", step, None, str(exc)))
            return report
        report.steps += 1
        for v in batch:
            if v.ts in emitted and emitted[v.ts] != v.value:
                report.violations.append(
                    Violation("conflict", step, v.ts, "both verdicts emitted for one timestamp")
                )
            emitted[v.ts] = v.value
        w = graph.snapshot_observation()
        expected = dict(verdict_set(w, table))
        for ts, b in emitted.items():
            if expected.get(ts) != b:
                report.violations.append(
                    Violation(
                        "soundness",
                        step,
                        ts,
                        f"emitted {b} but the oracle now says {expected.get(ts)}",
                    )
                )
        for ts, b in expected.items():
            if ts not in emitted:
                report.violations.append(
                    Violation(
                        "completeness",
                        step,
                        ts,
                        f"oracle decided {b} but no verdict was emitted",
                    )
                )
        if check_nodes:
            try:
                graph.validate_against_oracle()
            except MonitorError as exc:
                report.violations.append(Violation("invariant", step, None, str(exc)))
        if fail_fast and report.violations:
            return report
    return report


def compare_messages(
    table: FormulaTable,
    messages: Iterable[Union[Message, Config]],
    check_nodes: bool = False,
) -> CompareReport:
    """Replay a message stream through ingestion and compare per
    transformation."""
    ingestor = StreamIngestor(table)

    def transformations():
        for msg in messages:
            for tr in ingestor.ingest(msg):
                yield tr

    return compare_transformations(table, transformations(), check_nodes=check_nodes)

"""A monitoring session: formula + ingestion state + gate graph.

This is the unit both the CLI and the service drive: feed messages (decoded
or raw JSON lines), get verdicts back as soon as they are known.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, List, Optional, Union

from .formula import Formula, compile_formula, formula_to_text
from .ingestion import (
    Config,
    Message,
    RemoveGap,
    SetFacts,
    SetRegister,
    SplitAt,
    StreamIngestor,
    Transformation,
    decode,
)
from .monitor import GateGraph, Verdict
from .parser import parse_formula
from .rational import to_decimal_str


def transformation_to_json(tr: Transformation) -> str:
    if isinstance(tr, SplitAt):
        obj = {"op": "T1", "gap": str(tr.gap), "ts": to_decimal_str(tr.ts)}
    elif isinstance(tr, RemoveGap):
        obj = {"op": "T2", "gap": str(tr.gap)}
    elif isinstance(tr, SetFacts):
        obj = {
            "op": "T3.1",
            "ts": to_decimal_str(tr.ts),
            "pred": tr.pred,
            "rel": [[str(v) for v in row] for row in tr.rel],
        }
    else:
        obj = {
            "op": "T3.2",
            "ts": to_decimal_str(tr.ts),
            "register": tr.register,
            "value": str(tr.value),
        }
    return json.dumps(obj, separators=(",", ":"))


def verdict_to_json(v: Verdict) -> str:
    return json.dumps(
        {"ts": to_decimal_str(v.ts), "verdict": v.value}, separators=(",", ":")
    )


class MonitorSession:
    def __init__(
        self,
        formula: Union[str, Formula],
        components: Optional[Iterable[str]] = None,
        gc: bool = True,
        debug_checks: bool = False,
        prune_every: int = 256,
        trace: bool = False,
    ):
        self.formula = parse_formula(formula) if isinstance(formula, str) else formula
        self.table = compile_formula(self.formula)
        self.graph = GateGraph(self.table, gc=gc, debug_checks=debug_checks)
        self.ingestor = StreamIngestor(self.table, components=components)
        self.prune_every = prune_every
        self.messages = 0
        self.trace: Optional[List[Transformation]] = [] if trace else None

    @property
    def formula_text(self) -> str:
        return formula_to_text(self.formula)

    def apply(self, tr: Transformation) -> List[Verdict]:
        if self.trace is not None:
            self.trace.append(tr)
        if isinstance(tr, SplitAt):
            return self.graph.add_time_point(tr.gap, tr.ts)
        if isinstance(tr, RemoveGap):
            return self.graph.remove_interval(tr.gap)
        if isinstance(tr, SetFacts):
            return self.graph.set_facts(tr.ts, tr.pred, tr.rel)
        if isinstance(tr, SetRegister):
            return self.graph.set_register(tr.ts, tr.register, tr.value)
        raise TypeError(f"unknown transformation {tr!r}")

    def process(self, msg: Union[Message, Config]) -> List[Verdict]:
        verdicts: List[Verdict] = []
        for tr in self.ingestor.ingest(msg):
            verdicts.extend(self.apply(tr))
        self.messages += 1
        if (
            self.prune_every
            and self.graph.gc_enabled
            and not self.graph.debug_checks
            and self.messages % self.prune_every == 0
        ):
            self.graph.prune_history()
        return verdicts

    def process_line(self, line: Union[str, bytes]) -> List[Verdict]:
        return self.process(decode(line))

    def stats(self) -> dict:
        out = self.graph.stats()
        out["messages"] = self.messages
        return out

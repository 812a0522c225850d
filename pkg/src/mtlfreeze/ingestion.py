"""Message decoding and the component ledger that justifies gap removals.

Each action/alive message is translated into the observation transformations
T1/T2/T3 the monitor consumes.  Sequence-number triples per component track
which spans of that component's timeline are fully known; a knowledge gap is
removed only once every component's triples cover it.
"""

from __future__ import annotations

import json
from bisect import bisect_left, bisect_right, insort
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

from .formula import FormulaTable, Value
from .intervals import Interval
from .rational import RationalError, parse_rational

DEFAULT_REGISTER_VALUE: Value = 0


class IngestError(ValueError):
    pass


@dataclass(frozen=True)
class Action:
    component: str
    ts: Fraction
    seq: int
    facts: Tuple[Tuple[str, Tuple[Tuple[Value, ...], ...]], ...]
    regs: Tuple[Tuple[str, Value], ...]


@dataclass(frozen=True)
class Alive:
    component: str
    ts: Fraction
    seq: int


@dataclass(frozen=True)
class Config:
    components: Tuple[str, ...]


Message = Union[Action, Alive]


# -- transformations handed to the monitor ------------------------------------


@dataclass(frozen=True)
class SplitAt:
    gap: Interval
    ts: Fraction


@dataclass(frozen=True)
class RemoveGap:
    gap: Interval


@dataclass(frozen=True)
class SetFacts:
    ts: Fraction
    pred: str
    rel: Tuple[Tuple[Value, ...], ...]


@dataclass(frozen=True)
class SetRegister:
    ts: Fraction
    register: str
    value: Value


Transformation = Union[SplitAt, RemoveGap, SetFacts, SetRegister]


def coerce_value(raw) -> Value:
    """Wire values are strings; decimal-integer strings become ints."""
    if isinstance(raw, bool):
        raise IngestError("booleans are not data values")
    if isinstance(raw, int):
        return raw
    if isinstance(raw, str):
        stripped = raw.strip()
        if stripped and stripped.lstrip("-").isdigit():
            return int(stripped)
        return raw
    raise IngestError(f"unsupported data value {raw!r}")


def decode(line: Union[str, bytes]) -> Union[Message, Config]:
    if isinstance(line, bytes):
        line = line.decode("utf-8")
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise IngestError(f"malformed JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise IngestError("a message must be a JSON object")
    kind = obj.get("type")
    if kind == "config":
        comps = obj.get("components")
        if not isinstance(comps, list) or not all(isinstance(c, str) for c in comps):
            raise IngestError("config needs a list of component names")
        return Config(tuple(comps))
    if kind not in ("action", "alive"):
        raise IngestError(f"unknown message type {kind!r}")
    component = obj.get("component")
    if not isinstance(component, str) or not component:
        raise IngestError("missing component name")
    ts_raw = obj.get("ts")
    if not isinstance(ts_raw, str):
        raise IngestError("ts must be a decimal string")
    try:
        ts = parse_rational(ts_raw)
    except RationalError as exc:
        raise IngestError(str(exc)) from exc
    seq = obj.get("seq")
    if not isinstance(seq, int) or isinstance(seq, bool) or seq < 0:
        raise IngestError("seq must be a nonnegative integer")
    if kind == "alive":
        return Alive(component, ts, seq)

    facts: List[Tuple[str, Tuple[Tuple[Value, ...], ...]]] = []
    if "facts" in obj:
        raw_facts = obj["facts"]
        if not isinstance(raw_facts, dict):
            raise IngestError("facts must map predicate names to tuple lists")
        for pred, tuples in raw_facts.items():
            rel = tuple(tuple(coerce_value(v) for v in row) for row in tuples)
            facts.append((pred, rel))
    if "pred" in obj:
        args = tuple(coerce_value(v) for v in obj.get("args", []))
        facts.append((obj["pred"], (args,)))
    if not facts:
        raise IngestError("an action carries a pred or a facts map")
    facts.sort()
    regs_raw = obj.get("regs", {})
    if not isinstance(regs_raw, dict):
        raise IngestError("regs must be an object")
    regs = tuple(sorted((r, coerce_value(v)) for r, v in regs_raw.items()))
    return Action(component, ts, seq, tuple(facts), regs)


# -- sequence-number ledger ------------------------------------------------------


@dataclass(frozen=True)
class SeqTriple:
    lo: int
    interval: Interval
    hi: int

    def covers(self, gap: Interval) -> bool:
        return gap.subset_of(self.interval)


def merge_triples(triples: Sequence[SeqTriple], new: SeqTriple) -> List[SeqTriple]:
    """Insert `new`, merging seq-adjacent or seq-overlapping triples to
    fixpoint; the result stays disjoint and ordered consistently in both the
    sequence ranges and the intervals."""
    merged = new
    rest: List[SeqTriple] = []
    for t in sorted(triples, key=lambda t: t.lo):
        if t.hi >= merged.lo - 1 and t.lo <= merged.hi + 1:
            merged = SeqTriple(
                min(t.lo, merged.lo),
                t.interval.union_cover(merged.interval),
                max(t.hi, merged.hi),
            )
        else:
            rest.append(t)
    rest.append(merged)
    rest.sort(key=lambda t: t.lo)
    for a, b in zip(rest, rest[1:]):
        if not a.interval.strictly_before(b.interval):
            raise IngestError(
                f"sequence ranges and intervals disagree: {a} overlaps {b}"
            )
    return rest


class StreamIngestor:
    """Tracks per-component knowledge; turns messages into transformations."""

    def __init__(
        self,
        table: Optional[FormulaTable] = None,
        components: Optional[Sequence[str]] = None,
    ):
        self.table = table
        self.components: Optional[Tuple[str, ...]] = (
            tuple(components) if components else None
        )
        self.ledgers: Dict[str, List[SeqTriple]] = {}
        self.gap_pending: Dict[Interval, Set[str]] = {}
        self._gap_keys: List[Tuple[Tuple[Fraction, int], Interval]] = []
        self._add_gap(Interval.unbounded())
        self.point_owner: Dict[Fraction, Tuple[str, int]] = {}
        self._exact_seen: Set[Message] = set()
        self._action_payload: Dict[Tuple[str, int], Action] = {}
        self._action_seqs: Dict[str, List[Tuple[int, Fraction]]] = {}
        self._alive_ts: Dict[str, Dict[int, Fraction]] = {}
        self._predicates: Tuple[str, ...] = tuple(table.predicates) if table else ()
        self._register_aliases: Dict[str, List[str]] = (
            dict(table.register_aliases) if table else {}
        )

    # -- gap label bookkeeping ---------------------------------------------------

    def _add_gap(self, gap: Interval) -> None:
        self.gap_pending[gap] = self._pending_for(gap)
        insort(self._gap_keys, (gap.sort_key(), gap))

    def _remove_gap(self, gap: Interval) -> None:
        del self.gap_pending[gap]
        self._gap_keys.remove((gap.sort_key(), gap))

    def _pending_for(self, gap: Interval) -> Set[str]:
        components = self.components or ()
        return {
            c
            for c in components
            if not any(t.covers(gap) for t in self.ledgers.get(c, []))
        }

    def _gap_containing(self, tau: Fraction) -> Optional[Interval]:
        i = bisect_right(self._gap_keys, ((tau, 2), None))
        if i == 0:
            return None
        gap = self._gap_keys[i - 1][1]
        return gap if gap.contains(tau) else None

    # -- configuration -------------------------------------------------------------

    def configure(self, config: Config) -> None:
        if self.components is not None and tuple(config.components) != self.components:
            raise IngestError("components are static; cannot reconfigure (A1)")
        self.components = tuple(config.components)
        for gap in self.gap_pending:
            self.gap_pending[gap] = self._pending_for(gap)

    def _require_component(self, name: str) -> None:
        if self.components is None:
            # No config header: single-component stream fixed by the first
            # message (A1).
            self.components = (name,)
            for gap in self.gap_pending:
                self.gap_pending[gap] = self._pending_for(gap)
        if name not in self.components:
            raise IngestError(f"unregistered component {name!r} (A1)")

    # -- consistency checks ----------------------------------------------------------

    def _check_action(self, msg: Action) -> None:
        conflict = self._action_payload.get((msg.component, msg.seq))
        if conflict is not None:
            raise IngestError(
                f"conflicting payloads for ({msg.component}, seq {msg.seq})"
            )
        owner = self.point_owner.get(msg.ts)
        if owner is not None:
            raise IngestError(f"timestamp {msg.ts} already taken by {owner}")
        seqs = self._action_seqs.setdefault(msg.component, [])
        i = bisect_left(seqs, (msg.seq, msg.ts))
        if i > 0 and not seqs[i - 1][1] < msg.ts:
            raise IngestError(
                f"component {msg.component}: ts {msg.ts} of seq {msg.seq} is not "
                f"after seq {seqs[i - 1][0]} at {seqs[i - 1][1]}"
            )
        if i < len(seqs) and not msg.ts < seqs[i][1]:
            raise IngestError(
                f"component {msg.component}: ts {msg.ts} of seq {msg.seq} is not "
                f"before seq {seqs[i][0]} at {seqs[i][1]}"
            )
        for t in self.ledgers.get(msg.component, []):
            if t.interval.contains(msg.ts) and not (t.lo <= msg.seq <= t.hi):
                raise IngestError(
                    f"action at {msg.ts} contradicts completeness claim {t}"
                )
        alive_at = self._alive_ts.get(msg.component, {})
        until = alive_at.get(msg.seq)
        if until is not None and msg.ts > until:
            raise IngestError(
                f"action seq {msg.seq} at {msg.ts} after alive at {until}"
            )

    def _check_alive(self, msg: Alive) -> None:
        seqs = self._action_seqs.get(msg.component, [])
        i = bisect_left(seqs, (msg.seq, Fraction(-1)))
        if i < len(seqs) and seqs[i][0] == msg.seq and msg.ts < seqs[i][1]:
            raise IngestError(
                f"alive at {msg.ts} precedes action seq {msg.seq} at {seqs[i][1]}"
            )
        j = bisect_left(seqs, (msg.seq + 1, Fraction(-1)))
        if j < len(seqs) and not msg.ts < seqs[j][1]:
            raise IngestError(
                f"alive seq {msg.seq} at {msg.ts} conflicts with seq "
                f"{seqs[j][0]} at {seqs[j][1]}"
            )

    # -- main entry ---------------------------------------------------------------------

    def ingest(self, msg: Union[Message, Config]) -> List[Transformation]:
        if isinstance(msg, Config):
            self.configure(msg)
            return []
        self._require_component(msg.component)
        if msg in self._exact_seen:
            return []  # exact duplicate: replay after monitor recovery
        out: List[Transformation] = []
        if isinstance(msg, Action):
            self._check_action(msg)
            out.extend(self._action_transformations(msg))
            insort(self._action_seqs.setdefault(msg.component, []), (msg.seq, msg.ts))
            self._action_payload[(msg.component, msg.seq)] = msg
            triple = SeqTriple(msg.seq, Interval.point(msg.ts), msg.seq)
        else:
            self._check_alive(msg)
            alive_at = self._alive_ts.setdefault(msg.component, {})
            alive_at[msg.seq] = max(msg.ts, alive_at.get(msg.seq, msg.ts))
            if msg.seq == 0:
                # Counter still zero: no action happened anywhere in [0, ts].
                triple = SeqTriple(0, Interval.closed(Fraction(0), msg.ts), 0)
            else:
                triple = SeqTriple(msg.seq, Interval.point(msg.ts), msg.seq)
        self._exact_seen.add(msg)
        merged = merge_triples(self.ledgers.get(msg.component, []), triple)
        self.ledgers[msg.component] = merged
        span = next(
            t.interval for t in merged if t.lo <= triple.lo and triple.hi <= t.hi
        )
        out.extend(RemoveGap(gap) for gap in self.completed_gaps(msg.component, span))
        return out

    def _action_transformations(self, msg: Action) -> List[Transformation]:
        out: List[Transformation] = []
        gap = self._gap_containing(msg.ts)
        if gap is None:
            raise IngestError(
                f"timestamp {msg.ts} falls into an interval already declared complete"
            )
        out.append(SplitAt(gap, msg.ts))
        self._remove_gap(gap)
        for piece in (gap.portion_below(msg.ts), gap.portion_above(msg.ts)):
            if piece is not None:
                self._add_gap(piece)
        self.point_owner[msg.ts] = (msg.component, msg.seq)

        named = set()
        for pred, rel in msg.facts:
            if pred in named:
                raise IngestError(f"predicate {pred} listed twice in one message")
            named.add(pred)
            out.append(SetFacts(msg.ts, pred, rel))
        # One event per time point: every other monitored predicate is empty.
        for pred in self._predicates:
            if pred not in named:
                out.append(SetFacts(msg.ts, pred, ()))
        regs = dict(msg.regs)
        for source, aliases in self._register_aliases.items():
            value = regs.get(source, DEFAULT_REGISTER_VALUE)
            for alias in aliases:
                out.append(SetRegister(msg.ts, alias, value))
        return out

    # -- gap completion ---------------------------------------------------------------------

    def completed_gaps(
        self, component: Optional[str] = None, span: Optional[Interval] = None
    ) -> List[Interval]:
        """Discharge pending sets and collect gaps ready for removal.

        With `component`/`span` given, only gaps inside the freshly covered
        span are re-examined (the only ones whose pending sets can change).
        """
        if self.components is None:
            return []
        if span is None:
            candidates = [gap for _, gap in self._gap_keys]
        else:
            lo = bisect_left(self._gap_keys, (span.sort_key(), None))
            candidates = []
            for _, gap in self._gap_keys[lo:]:
                if not gap.subset_of(span):
                    break
                candidates.append(gap)
        done: List[Interval] = []
        for gap in candidates:
            if not gap.is_bounded:
                continue
            pending = self.gap_pending[gap]
            if component is not None:
                if any(t.covers(gap) for t in self.ledgers.get(component, [])):
                    pending.discard(component)
            else:
                for c in list(pending):
                    if any(t.covers(gap) for t in self.ledgers.get(c, [])):
                        pending.discard(c)
            if not pending:
                done.append(gap)
        for gap in done:
            self._remove_gap(gap)
        done.sort(key=lambda g: g.sort_key())
        return done

"""Mutable observation mirror used inside the monitor.

The persistent `Observation` is the model of record, but splicing a tuple per
transformation is O(n); the monitor instead keeps letters in a doubly linked
list with interval and timestamp indexes, and snapshots on demand.
"""

from __future__ import annotations

from bisect import bisect_right, insort
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Tuple

from ..formula import Value
from ..intervals import Interval
from ..observation import Letter, Observation, ObservationError


class _Cell:
    __slots__ = ("interval", "facts", "regs", "prev", "next")

    def __init__(self, interval: Interval):
        self.interval = interval
        self.facts: Dict[str, FrozenSet[Tuple[Value, ...]]] = {}
        self.regs: Dict[str, Value] = {}
        self.prev: Optional["_Cell"] = None
        self.next: Optional["_Cell"] = None


class ObsState:
    def __init__(self):
        cell = _Cell(Interval.unbounded())
        self.first: _Cell = cell
        self.cells: Dict[Interval, _Cell] = {cell.interval: cell}
        self.points: Dict[Fraction, _Cell] = {}
        self._gap_keys: List[Tuple[Tuple[Fraction, int], Interval]] = [
            (cell.interval.sort_key(), cell.interval)
        ]

    # -- queries -------------------------------------------------------------

    def __contains__(self, interval: Interval) -> bool:
        return interval in self.cells

    def gap_containing(self, tau: Fraction) -> Optional[Interval]:
        i = bisect_right(self._gap_keys, ((tau, 2), None))
        if i == 0:
            return None
        candidate = self._gap_keys[i - 1][1]
        return candidate if candidate.contains(tau) else None

    def neighbor(self, interval: Interval, offset: int) -> Optional[Interval]:
        cell = self.cells.get(interval)
        if cell is None:
            return None
        step = abs(offset)
        forward = offset > 0
        for _ in range(step):
            cell = cell.next if forward else cell.prev
            if cell is None:
                return None
        return cell.interval

    def facts_at(self, interval: Interval) -> Optional[Dict[str, FrozenSet[Tuple[Value, ...]]]]:
        cell = self.cells.get(interval)
        return None if cell is None else cell.facts

    def gap_intervals(self) -> List[Interval]:
        return [iv for _, iv in self._gap_keys]

    # -- transformations -----------------------------------------------------

    def split(self, tau: Fraction) -> Tuple[Interval, List[Interval]]:
        """T1; returns (split gap, replacement pieces in order)."""
        if tau in self.points:
            raise ObservationError(f"timestamp {tau} is already a time point")
        gap = self.gap_containing(tau)
        if gap is None:
            raise ObservationError(f"timestamp {tau} lies in no current interval")
        cell = self.cells[gap]
        pieces: List[Interval] = []
        below = gap.portion_below(tau)
        if below is not None:
            pieces.append(below)
        point = Interval.point(tau)
        pieces.append(point)
        above = gap.portion_above(tau)
        if above is not None:
            pieces.append(above)

        new_cells = [_Cell(iv) for iv in pieces]
        for a, b in zip(new_cells, new_cells[1:]):
            a.next, b.prev = b, a
        new_cells[0].prev = cell.prev
        new_cells[-1].next = cell.next
        if cell.prev is not None:
            cell.prev.next = new_cells[0]
        else:
            self.first = new_cells[0]
        if cell.next is not None:
            cell.next.prev = new_cells[-1]

        del self.cells[gap]
        self._gap_keys.remove((gap.sort_key(), gap))
        for nc in new_cells:
            self.cells[nc.interval] = nc
            if nc.interval.is_singleton:
                self.points[tau] = nc
            else:
                insort(self._gap_keys, (nc.interval.sort_key(), nc.interval))
        return gap, pieces

    def remove(self, gap: Interval) -> None:
        cell = self.cells.get(gap)
        if cell is None:
            raise ObservationError(f"no letter has interval {gap}")
        if gap.is_singleton:
            raise ObservationError(f"{gap} is a time point, not removable")
        if not gap.is_bounded:
            raise ObservationError("the unbounded tail cannot be removed")
        if cell.prev is not None:
            cell.prev.next = cell.next
        else:
            self.first = cell.next
        if cell.next is not None:
            cell.next.prev = cell.prev
        del self.cells[gap]
        self._gap_keys.remove((gap.sort_key(), gap))

    def set_facts(self, tau: Fraction, pred: str, rel) -> None:
        cell = self._point(tau)
        if pred in cell.facts:
            raise ObservationError(f"{pred} already defined at {tau} (A4)")
        cell.facts[pred] = frozenset(tuple(t) for t in rel)

    def set_register(self, tau: Fraction, reg: str, value: Value) -> None:
        cell = self._point(tau)
        if reg in cell.regs:
            raise ObservationError(f"register {reg} already set at {tau}")
        cell.regs[reg] = value

    def _point(self, tau: Fraction) -> _Cell:
        cell = self.points.get(tau)
        if cell is None:
            raise ObservationError(f"{tau} is not a time point")
        return cell

    # -- export ---------------------------------------------------------------

    def snapshot(self) -> Observation:
        letters = []
        cell = self.first
        while cell is not None:
            letters.append(Letter(cell.interval, dict(cell.facts), dict(cell.regs)))
            cell = cell.next
        return Observation(tuple(letters))

    def prune_before(self, keep_from: Interval) -> int:
        """Drop letters strictly left of keep_from; returns how many."""
        dropped = 0
        cell = self.first
        key = keep_from.sort_key()
        while cell is not None and cell.interval.sort_key() < key:
            nxt = cell.next
            del self.cells[cell.interval]
            if cell.interval.is_singleton:
                del self.points[cell.interval.singleton_value]
            else:
                self._gap_keys.remove((cell.interval.sort_key(), cell.interval))
            cell.prev = None
            if nxt is not None:
                nxt.prev = None
            self.first = nxt
            cell.next = None
            cell = nxt
            dropped += 1
        return dropped

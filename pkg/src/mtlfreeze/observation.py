"""Observations: finite words of interval-tagged letters with partial knowledge.

Values are persistent; every transformation returns a new observation sharing
letter objects with the old one, so evaluators and tests can snapshot freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

from .formula import Value
from .intervals import Interval

FactMap = Mapping[str, FrozenSet[Tuple[Value, ...]]]
RegMap = Mapping[str, Value]


class ObservationError(ValueError):
    pass


@dataclass(frozen=True)
class Letter:
    interval: Interval
    facts: Dict[str, FrozenSet[Tuple[Value, ...]]] = field(default_factory=dict)
    regs: Dict[str, Value] = field(default_factory=dict)

    def __post_init__(self):
        if (self.facts or self.regs) and not self.interval.is_singleton:
            raise ObservationError(
                f"knowledge attached to the nonsingleton interval {self.interval}"
            )

    def with_interval(self, interval: Interval) -> "Letter":
        return Letter(interval, self.facts, self.regs)

    def extends(self, other: "Letter") -> bool:
        """Partial-order check on the letter content (σ, ρ extension)."""
        for pred, rel in other.facts.items():
            if pred not in self.facts or self.facts[pred] != rel:
                return False
        for reg, value in other.regs.items():
            if reg not in self.regs or self.regs[reg] != value:
                return False
        return True


@dataclass(frozen=True)
class Observation:
    letters: Tuple[Letter, ...]

    def __post_init__(self):
        if not self.letters:
            raise ObservationError("an observation has at least one letter")
        if self.letters[-1].interval.is_bounded:
            raise ObservationError("the last interval must be right-unbounded")
        for a, b in zip(self.letters, self.letters[1:]):
            if not a.interval.strictly_before(b.interval):
                raise ObservationError(
                    f"intervals out of order: {a.interval} before {b.interval}"
                )

    # -- queries -------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.letters)

    def positions(self) -> range:
        return range(len(self.letters))

    def interval_at(self, i: int) -> Interval:
        return self.letters[i].interval

    def is_time_point(self, i: int) -> bool:
        return self.letters[i].interval.is_singleton

    def ts(self, i: int) -> Fraction:
        return self.letters[i].interval.singleton_value

    def timestamps(self) -> List[Fraction]:
        return [l.interval.singleton_value for l in self.letters if l.interval.is_singleton]

    def position_of_timestamp(self, tau: Fraction) -> Optional[int]:
        for i, letter in enumerate(self.letters):
            if letter.interval.is_singleton and letter.interval.lo == tau:
                return i
        return None

    def find_containing(self, tau: Fraction) -> Optional[int]:
        for i, letter in enumerate(self.letters):
            if letter.interval.contains(tau):
                return i
        return None

    # -- transformations -----------------------------------------------------

    def split(self, tau: Fraction) -> "Observation":
        """T1: introduce the time point {tau} inside a knowledge gap."""
        i = self.find_containing(tau)
        if i is None:
            raise ObservationError(f"timestamp {tau} lies in no interval (already removed?)")
        letter = self.letters[i]
        if letter.interval.is_singleton:
            raise ObservationError(f"timestamp {tau} is already a time point")
        pieces = []
        below = letter.interval.portion_below(tau)
        if below is not None:
            pieces.append(letter.with_interval(below))
        pieces.append(letter.with_interval(Interval.point(tau)))
        above = letter.interval.portion_above(tau)
        if above is not None:
            pieces.append(letter.with_interval(above))
        return Observation(self.letters[:i] + tuple(pieces) + self.letters[i + 1 :])

    def remove(self, gap: Interval) -> "Observation":
        """T2: drop a bounded knowledge gap."""
        for i, letter in enumerate(self.letters):
            if letter.interval == gap:
                if letter.interval.is_singleton:
                    raise ObservationError(f"{gap} is a time point, not removable")
                if not letter.interval.is_bounded:
                    raise ObservationError("the unbounded tail cannot be removed")
                return Observation(self.letters[:i] + self.letters[i + 1 :])
        raise ObservationError(f"no letter has interval {gap}")

    def set_facts(self, tau: Fraction, pred: str, rel) -> "Observation":
        """T3.1: define one predicate's interpretation at a time point."""
        i = self._time_point_index(tau)
        letter = self.letters[i]
        if pred in letter.facts:
            raise ObservationError(f"{pred} already defined at {tau} (A4)")
        facts = dict(letter.facts)
        facts[pred] = frozenset(tuple(t) for t in rel)
        replaced = Letter(letter.interval, facts, letter.regs)
        return Observation(self.letters[:i] + (replaced,) + self.letters[i + 1 :])

    def set_register(self, tau: Fraction, reg: str, value: Value) -> "Observation":
        """T3.2: freeze one register's value at a time point."""
        i = self._time_point_index(tau)
        letter = self.letters[i]
        if reg in letter.regs:
            raise ObservationError(f"register {reg} already set at {tau}")
        regs = dict(letter.regs)
        regs[reg] = value
        replaced = Letter(letter.interval, letter.facts, regs)
        return Observation(self.letters[:i] + (replaced,) + self.letters[i + 1 :])

    def _time_point_index(self, tau: Fraction) -> int:
        i = self.position_of_timestamp(tau)
        if i is None:
            raise ObservationError(f"{tau} is not a time point")
        return i

    # -- serialization -------------------------------------------------------

    def to_json_obj(self) -> list:
        out = []
        for letter in self.letters:
            out.append(
                {
                    "interval": str(letter.interval),
                    "facts": {
                        p: sorted([list(t) for t in rel])
                        for p, rel in sorted(letter.facts.items())
                    },
                    "regs": dict(sorted(letter.regs.items())),
                }
            )
        return out


def initial() -> Observation:
    return Observation((Letter(Interval.unbounded()),))


def refines(u: Observation, v: Observation) -> bool:
    """True iff v carries at least u's knowledge (u ⊑ v).

    Greedy left-to-right construction of the monotone position map; valid
    because intervals within an observation are disjoint and increasing.
    """
    ui = 0
    for vletter in v.letters:
        while ui < len(u.letters) and not vletter.interval.subset_of(u.letters[ui].interval):
            ui += 1
        if ui == len(u.letters):
            return False
        if not vletter.extends(u.letters[ui]):
            return False
    return True

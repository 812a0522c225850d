"""Nonempty intervals over the nonnegative rationals, possibly right-unbounded.

Closedness flags are kept explicit: singleton detection and gap splitting
depend on distinguishing [a,b) from (a,b).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

from .rational import parse_rational, to_decimal_str
from .truth import F, T, Truth3, U


class IntervalError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Interval:
    """lo/hi bounds with closedness; hi=None encodes an unbounded right end.

    Hash and key material are precomputed: intervals key every dict in the
    monitor, and Fraction hashing is expensive.
    """

    lo: Fraction
    hi: Optional[Fraction]
    lo_closed: bool
    hi_closed: bool

    def __post_init__(self):
        if self.lo < 0:
            raise IntervalError(f"negative left bound: {self.lo}")
        if self.hi is None:
            if self.hi_closed:
                raise IntervalError("an unbounded interval cannot be right-closed")
        else:
            if self.lo > self.hi:
                raise IntervalError(f"empty interval: lo={self.lo} > hi={self.hi}")
            if self.lo == self.hi and not (self.lo_closed and self.hi_closed):
                raise IntervalError("degenerate interval needs both endpoints closed")
        ident = (
            self.lo.numerator,
            self.lo.denominator,
            None if self.hi is None else self.hi.numerator,
            None if self.hi is None else self.hi.denominator,
            self.lo_closed,
            self.hi_closed,
        )
        object.__setattr__(self, "_ident", ident)
        object.__setattr__(self, "_hash", hash(ident))
        object.__setattr__(self, "_key", (self.lo, 0 if self.lo_closed else 1))
        object.__setattr__(
            self, "_singleton", self.hi is not None and self.lo == self.hi
        )

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if not isinstance(other, Interval):
            return NotImplemented
        return self._ident == other._ident

    # -- constructors ------------------------------------------------------

    @staticmethod
    def point(tau: Fraction) -> "Interval":
        return Interval(tau, tau, True, True)

    @staticmethod
    def closed(lo: Fraction, hi: Fraction) -> "Interval":
        return Interval(lo, hi, True, True)

    @staticmethod
    def right_open(lo: Fraction, hi: Fraction) -> "Interval":
        return Interval(lo, hi, True, False)

    @staticmethod
    def open(lo: Fraction, hi: Fraction) -> "Interval":
        return Interval(lo, hi, False, False)

    @staticmethod
    def left_open(lo: Fraction, hi: Fraction) -> "Interval":
        return Interval(lo, hi, False, True)

    @staticmethod
    def unbounded(lo: Fraction = Fraction(0), lo_closed: bool = True) -> "Interval":
        return Interval(lo, None, lo_closed, False)

    # -- basic queries -----------------------------------------------------

    @property
    def is_singleton(self) -> bool:
        return self._singleton

    @property
    def is_bounded(self) -> bool:
        return self.hi is not None

    @property
    def singleton_value(self) -> Fraction:
        if not self.is_singleton:
            raise IntervalError(f"{self} is not a singleton")
        return self.lo

    def contains(self, tau: Fraction) -> bool:
        if tau < self.lo or (tau == self.lo and not self.lo_closed):
            return False
        if self.hi is None:
            return True
        return tau < self.hi or (tau == self.hi and self.hi_closed)

    def sort_key(self) -> Tuple[Fraction, int]:
        # Total order on the pairwise-disjoint intervals of one observation.
        return self._key

    def intersects(self, other: "Interval") -> bool:
        lo, lo_closed = _max_lo(self, other)
        hi, hi_closed = _min_hi(self, other)
        if hi is None:
            return True
        if lo > hi:
            return False
        if lo == hi:
            return lo_closed and hi_closed
        return True

    def subset_of(self, other: "Interval") -> bool:
        if self.lo < other.lo:
            return False
        if self.lo == other.lo and self.lo_closed and not other.lo_closed:
            return False
        if other.hi is None:
            return True
        if self.hi is None:
            return False
        if self.hi > other.hi:
            return False
        if self.hi == other.hi and self.hi_closed and not other.hi_closed:
            return False
        return True

    def strictly_before(self, other: "Interval") -> bool:
        """I < J: disjoint and entirely to the left."""
        if self.hi is None:
            return False
        if self.hi < other.lo:
            return True
        if self.hi == other.lo:
            return not (self.hi_closed and other.lo_closed)
        return False

    # -- pieces used by the T1 split ----------------------------------------

    def portion_below(self, tau: Fraction) -> Optional["Interval"]:
        """self ∩ [0, tau); None when empty."""
        if self.lo > tau or self.lo == tau:
            return None
        if self.hi is not None and (self.hi < tau or (self.hi == tau and not self.hi_closed)):
            hi, hi_closed = self.hi, self.hi_closed
        else:
            hi, hi_closed = tau, False
        return Interval(self.lo, hi, self.lo_closed, hi_closed)

    def portion_above(self, tau: Fraction) -> Optional["Interval"]:
        """self ∩ (tau, ∞); None when empty."""
        if self.hi is not None and self.hi <= tau:
            return None
        if self.lo > tau:
            lo, lo_closed = self.lo, self.lo_closed
        else:
            lo, lo_closed = tau, False
        return Interval(lo, self.hi, lo_closed, self.hi_closed)

    def union_cover(self, other: "Interval") -> "Interval":
        """Smallest interval containing both operands."""
        if (self.lo, not self.lo_closed) <= (other.lo, not other.lo_closed):
            lo, lo_closed = self.lo, self.lo_closed
        else:
            lo, lo_closed = other.lo, other.lo_closed
        if self.hi is None or other.hi is None:
            return Interval(lo, None, lo_closed, False)
        if (self.hi, self.hi_closed) >= (other.hi, other.hi_closed):
            hi, hi_closed = self.hi, self.hi_closed
        else:
            hi, hi_closed = other.hi, other.hi_closed
        return Interval(lo, hi, lo_closed, hi_closed)

    # -- text --------------------------------------------------------------

    def __str__(self) -> str:
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        hi = "*" if self.hi is None else to_decimal_str(self.hi)
        return f"{left}{to_decimal_str(self.lo)},{hi}{right}"

    def __repr__(self) -> str:
        return f"Interval{str(self)}"

    _TEXT_RE = re.compile(r"^\s*([\[\(])\s*([^,\s]+)\s*,\s*([^\]\)\s]+)\s*([\]\)])\s*$")

    @staticmethod
    def parse(text: str) -> "Interval":
        m = Interval._TEXT_RE.match(text)
        if m is None:
            raise IntervalError(f"cannot parse interval {text!r}")
        left, lo_text, hi_text, right = m.groups()
        lo = parse_rational(lo_text)
        hi = None if hi_text in ("*", "inf") else parse_rational(hi_text)
        return Interval(lo, hi, left == "[", right == "]")


def _max_lo(a: Interval, b: Interval) -> Tuple[Fraction, bool]:
    if a.lo > b.lo:
        return a.lo, a.lo_closed
    if b.lo > a.lo:
        return b.lo, b.lo_closed
    return a.lo, a.lo_closed and b.lo_closed


def _min_hi(a: Interval, b: Interval) -> Tuple[Optional[Fraction], bool]:
    if a.hi is None:
        return b.hi, b.hi_closed
    if b.hi is None:
        return a.hi, a.hi_closed
    if a.hi < b.hi:
        return a.hi, a.hi_closed
    if b.hi < a.hi:
        return b.hi, b.hi_closed
    return a.hi, a.hi_closed and b.hi_closed


def interval_minus(i: Interval, j: Interval) -> Optional[Interval]:
    """{τ − τ' | τ ∈ i, τ' ∈ j} ∩ Q≥0, or None when that set is empty.

    The raw difference of two intervals is again an interval, so only
    endpoint arithmetic is needed; ∞ propagates on the right.
    """
    if i.hi is None:
        hi, hi_closed = None, False
    else:
        hi, hi_closed = i.hi - j.lo, i.hi_closed and j.lo_closed
    if j.hi is None:
        lo, lo_closed = None, False  # raw left bound is -inf
    else:
        lo, lo_closed = i.lo - j.hi, i.lo_closed and j.hi_closed

    if hi is not None:
        if hi < 0:
            return None
        if hi == 0 and not hi_closed:
            # Only a touch at zero remains and it is open.
            return None
    if lo is None or lo < 0:
        lo, lo_closed = Fraction(0), True
    return Interval(lo, hi, lo_closed, hi_closed)


_ZERO = Fraction(0)


def interval_mc(i: Interval, j: Interval, constraint: Interval) -> Truth3:
    """Three-valued metric-constraint check on the difference i − j.

    Equivalent to interval_minus followed by subset/intersection tests, but
    works on raw bounds: this sits on the monitor's hottest path.
    """
    if i.hi is None:
        dhi, dhi_c = None, False
    else:
        dhi, dhi_c = i.hi - j.lo, i.hi_closed and j.lo_closed
    if dhi is not None and (dhi < 0 or (dhi == 0 and not dhi_c)):
        return F  # empty difference
    if j.hi is None:
        dlo, dlo_c = _ZERO, True
    else:
        dlo, dlo_c = i.lo - j.hi, i.lo_closed and j.hi_closed
        if dlo < 0:
            dlo, dlo_c = _ZERO, True

    # diff ⊆ constraint?
    subset = True
    if dlo < constraint.lo or (
        dlo == constraint.lo and dlo_c and not constraint.lo_closed
    ):
        subset = False
    elif constraint.hi is not None:
        if dhi is None or dhi > constraint.hi or (
            dhi == constraint.hi and dhi_c and not constraint.hi_closed
        ):
            subset = False
    if subset:
        return T

    # diff ∩ constraint = ∅ ?
    lo, lo_c = (dlo, dlo_c) if dlo > constraint.lo else (constraint.lo, constraint.lo_closed)
    if dlo == constraint.lo:
        lo_c = dlo_c and constraint.lo_closed
    if dhi is None:
        hi, hi_c = constraint.hi, constraint.hi_closed
    elif constraint.hi is None:
        hi, hi_c = dhi, dhi_c
    elif dhi < constraint.hi:
        hi, hi_c = dhi, dhi_c
    elif constraint.hi < dhi:
        hi, hi_c = constraint.hi, constraint.hi_closed
    else:
        hi, hi_c = dhi, dhi_c and constraint.hi_closed
    if hi is not None and (lo > hi or (lo == hi and not (lo_c and hi_c))):
        return F
    return U

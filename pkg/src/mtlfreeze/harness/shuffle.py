"""Out-of-order replay: arrival time = timestamp + N(mu, sigma) delay.

Message contents are untouched; only the delivery order changes.  With
sigma=0 the output equals the input.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple, TypeVar, Union

from ..ingestion import Config, Message
from .prng import SplitMix64

T = TypeVar("T")


@dataclass(frozen=True)
class ShuffleSpec:
    mu: float = 10.0
    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")


def shuffle(messages: Sequence[Message], spec: ShuffleSpec) -> List[Message]:
    return shuffle_keyed(messages, [float(m.ts) for m in messages], spec)


def shuffle_keyed(items: Sequence[T], timestamps: Sequence[float], spec: ShuffleSpec) -> List[T]:
    """Generic variant used to reorder raw log lines byte-for-byte."""
    if len(items) != len(timestamps):
        raise ValueError("one timestamp per item required")
    rng = SplitMix64(spec.seed)
    arrivals = [ts + rng.gauss(spec.mu, spec.sigma) for ts in timestamps]
    order = sorted(range(len(items)), key=lambda i: (arrivals[i], i))
    return [items[i] for i in order]


def count_inversions(messages: Sequence[Union[Message, Config]]) -> int:
    """Timestamp-order inversions; 0 means the stream is in order."""
    stamps = [m.ts for m in messages if not isinstance(m, Config)]
    inversions = 0
    for i, a in enumerate(stamps):
        for b in stamps[i + 1 :]:
            if b < a:
                inversions += 1
    return inversions

"""Synthetic single-component banking logs for the benchmark profiles.

Per second the event count is drawn within ±10% of the configured rate;
timestamps sit on a millisecond grid so every rational stays small.  The
violation fraction controls how many suspicious transactions never get their
report; everything is a pure function of the seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from ..ingestion import Action, Message
from ..rational import to_decimal_str
from .prng import SplitMix64

DEFAULT_COMPONENT = "C1"
SUSPICIOUS_THRESHOLD = 2000
SUSPICIOUS_SHARE = 0.08

_BODIES = {
    "P1": (
        "FREEZE c <- cid . FREEZE t <- tid . FREEZE a <- sum . "
        "(trans(c, t, a) AND a > 2000) IMPLIES EVENTUALLY[0,3] report(t)"
    ),
    "P2": (
        "FREEZE c <- cid . FREEZE t <- tid . FREEZE a <- sum . "
        "(trans(c, t, a) AND a > 2000) IMPLIES ALWAYS(0,5] "
        "FREEZE t2 <- tid . FREEZE a2 <- sum . (trans(c, t2, a2) IMPLIES a2 <= 2000)"
    ),
    "P3": (
        "FREEZE c <- cid . FREEZE t <- tid . FREEZE a <- sum . "
        "(trans(c, t, a) AND a > 2000) IMPLIES "
        "((FREEZE t2 <- tid . FREEZE a2 <- sum . (trans(c, t2, a2) IMPLIES t = t2)) "
        "WEAKUNTIL report(t))"
    ),
    "P4": (
        "FREEZE c <- cid . FREEZE t <- tid . FREEZE a <- sum . "
        "(trans(c, t, a) AND a > 2000) IMPLIES ALWAYS[0,6] "
        "FREEZE t2 <- tid . FREEZE a2 <- sum . "
        "(trans(c, t2, a2) IMPLIES EVENTUALLY[0,3] report(t2))"
    ),
    "P1'": "(transaction AND suspicious) IMPLIES EVENTUALLY[0,3] report",
    "P2'": (
        "(transaction AND suspicious) IMPLIES ALWAYS(0,5] "
        "(transaction IMPLIES NOT suspicious)"
    ),
    "P3'": (
        "(transaction AND suspicious) IMPLIES "
        "((transaction IMPLIES EVENTUALLY[0,3] report) WEAKUNTIL unflag)"
    ),
    "P4'": (
        "(transaction AND suspicious) IMPLIES ALWAYS[0,6] "
        "(transaction IMPLIES EVENTUALLY[0,3] report)"
    ),
}

PROFILES = tuple(_BODIES)


def profile_formula(profile: str, full: bool = False) -> str:
    """Formula text for a profile; `full` restores the outer ALWAYS (only
    false verdicts are then reachable on a finite observation)."""
    name = profile.replace("p", "'") if profile.endswith("p") else profile
    if name not in _BODIES:
        raise ValueError(f"unknown profile {profile!r}; known: {', '.join(PROFILES)}")
    body = _BODIES[name]
    return f"ALWAYS ({body})" if full else body


def is_propositional(profile: str) -> bool:
    return profile.endswith("'") or profile.endswith("p")


@dataclass(frozen=True)
class GenSpec:
    profile: str = "P1'"
    rate: int = 10
    duration: int = 10
    seed: int = 0
    violation_fraction: float = 0.1

    def __post_init__(self):
        if self.rate < 1:
            raise ValueError("rate must be at least 1 event/second")
        if self.duration < 1:
            raise ValueError("duration must be at least 1 second")
        if not 0.0 <= self.violation_fraction <= 1.0:
            raise ValueError("violation_fraction must lie in [0, 1]")


def _timestamps(rng: SplitMix64, spec: GenSpec) -> List[Fraction]:
    out: List[Fraction] = []
    lo = -(-9 * spec.rate // 10)  # ceil(0.9 r)
    hi = 11 * spec.rate // 10     # floor(1.1 r)
    for second in range(spec.duration):
        count = rng.randint(lo, max(lo, hi))
        count = min(count, 1000)  # millisecond grid capacity per second
        offsets = set()
        while len(offsets) < count:
            offsets.add(rng.below(1000))
        base = 1000 * second
        out.extend(Fraction(base + off, 1000) for off in sorted(offsets))
    return out


def generate(spec: GenSpec) -> List[Message]:
    rng = SplitMix64(spec.seed)
    stamps = _timestamps(rng, spec)
    propositional = is_propositional(spec.profile)
    has_unflag = spec.profile in ("P3'", "P3p")
    messages: List[Message] = []
    # Scheduled reports: (due timestamp, transaction id or None).
    pending: List[Tuple[Fraction, Optional[int]]] = []
    next_tid = 1
    customers = [f"c{i}" for i in range(1, 21)]

    for seq, ts in enumerate(stamps, start=1):
        due = pending and pending[0][0] <= ts
        if due:
            _, tid = pending.pop(0)
            if propositional:
                if has_unflag and rng.chance(0.25):
                    messages.append(
                        Action(DEFAULT_COMPONENT, ts, seq, (("unflag", ((),)),), ())
                    )
                    continue
                messages.append(
                    Action(DEFAULT_COMPONENT, ts, seq, (("report", ((),)),), ())
                )
            else:
                messages.append(
                    Action(
                        DEFAULT_COMPONENT,
                        ts,
                        seq,
                        (("report", ((tid,),)),),
                        (("tid", tid),),
                    )
                )
            continue
        suspicious = rng.chance(SUSPICIOUS_SHARE)
        compliant = suspicious and not rng.chance(spec.violation_fraction)
        if compliant:
            delay_ms = rng.randint(100, 2500)
            pending.append((ts + Fraction(delay_ms, 1000), next_tid))
            pending.sort(key=lambda item: item[0])
        if propositional:
            facts: List[Tuple[str, Tuple[Tuple, ...]]] = [("transaction", ((),))]
            if suspicious:
                facts.append(("suspicious", ((),)))
            facts.sort()
            messages.append(Action(DEFAULT_COMPONENT, ts, seq, tuple(facts), ()))
        else:
            amount = (
                rng.randint(SUSPICIOUS_THRESHOLD + 1, 5000)
                if suspicious
                else rng.randint(1, SUSPICIOUS_THRESHOLD)
            )
            customer = rng.choice(customers)
            messages.append(
                Action(
                    DEFAULT_COMPONENT,
                    ts,
                    seq,
                    (("trans", ((customer, next_tid, amount),)),),
                    (("cid", customer), ("sum", amount), ("tid", next_tid)),
                )
            )
            next_tid += 1
    return messages


def encode_message(msg: Message) -> str:
    """One JSON line per message (inverse of ingestion.decode)."""
    if isinstance(msg, Action):
        obj: Dict = {
            "type": "action",
            "component": msg.component,
            "ts": to_decimal_str(msg.ts),
            "seq": msg.seq,
        }
        if len(msg.facts) == 1 and len(msg.facts[0][1]) == 1:
            pred, rel = msg.facts[0]
            obj["pred"] = pred
            obj["args"] = [str(v) for v in rel[0]]
        else:
            obj["facts"] = {
                pred: [[str(v) for v in row] for row in rel] for pred, rel in msg.facts
            }
        if msg.regs:
            obj["regs"] = {name: str(value) for name, value in msg.regs}
        return json.dumps(obj, separators=(",", ":"), sort_keys=True)
    return json.dumps(
        {
            "type": "alive",
            "component": msg.component,
            "ts": to_decimal_str(msg.ts),
            "seq": msg.seq,
        },
        separators=(",", ":"),
        sort_keys=True,
    )

"""Benchmark grid: event rates x delivery disruption, CSV output."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass
from typing import List, Optional, Sequence

from ..session import MonitorSession
from .generate import GenSpec, generate, profile_formula
from .shuffle import ShuffleSpec, shuffle

CSV_FIELDS = (
    "profile",
    "rate",
    "mu",
    "sigma",
    "events",
    "wall_seconds",
    "events_per_second",
    "peak_nodes",
    "verdicts",
)


@dataclass
class BenchRow:
    profile: str
    rate: int
    mu: float
    sigma: float
    events: int
    wall_seconds: float
    events_per_second: float
    peak_nodes: int
    verdicts: int


def run_case(
    profile: str,
    rate: int,
    duration: int,
    seed: int,
    mu: float,
    sigma: float,
    full: bool = False,
    violation_fraction: float = 0.1,
) -> BenchRow:
    messages = generate(
        GenSpec(
            profile=profile,
            rate=rate,
            duration=duration,
            seed=seed,
            violation_fraction=violation_fraction,
        )
    )
    if sigma > 0:
        messages = shuffle(messages, ShuffleSpec(mu=mu, sigma=sigma, seed=seed + 1))
    session = MonitorSession(profile_formula(profile, full=full))
    started = time.perf_counter()
    for msg in messages:
        session.process(msg)
    wall = time.perf_counter() - started
    stats = session.stats()
    return BenchRow(
        profile=profile,
        rate=rate,
        mu=mu,
        sigma=sigma,
        events=len(messages),
        wall_seconds=round(wall, 4),
        events_per_second=round(len(messages) / wall, 1) if wall > 0 else float("inf"),
        peak_nodes=stats["peak_nodes"],
        verdicts=stats["verdicts"],
    )


def run_grid(
    profile: str,
    rates: Sequence[int],
    sigmas: Sequence[float],
    duration: int = 60,
    seed: int = 0,
    mu: float = 10.0,
    full: bool = False,
) -> List[BenchRow]:
    return [
        run_case(profile, rate, duration, seed, mu, sigma, full=full)
        for rate in rates
        for sigma in sigmas
    ]


def rows_to_csv(rows: Sequence[BenchRow]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_FIELDS)
    writer.writeheader()
    for row in rows:
        writer.writerow({field: getattr(row, field) for field in CSV_FIELDS})
    return buffer.getvalue()

"""Random closed formulas and valid transformation sequences for conformance
fuzzing.  Everything is driven by a seeded SplitMix64, so any failing case is
reproducible from its seed alone."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

from ..formula import (
    Cmp,
    Const,
    Formula,
    FormulaTable,
    Freeze,
    Next,
    Not,
    Or,
    Pred,
    Prev,
    Since,
    TrueF,
    Until,
    Var,
    compile_formula,
    formula_to_text,
)
from ..ingestion import RemoveGap, SetFacts, SetRegister, SplitAt, Transformation
from ..intervals import Interval
from ..observation import Observation, initial
from ..parser import parse_formula
from .prng import SplitMix64

PREDICATES = (("p", 0), ("q", 1), ("rel", 1))
REGISTERS = ("r1", "r2")
DATA = (0, 1, 2)
CMP_OPS = ("<", "<=", "=", "!=", ">=", ">")


def _random_interval(rng: SplitMix64, quarter_limit: int = 24) -> Interval:
    """Bounds on the 1/4 grid; sometimes right-unbounded."""
    lo_q = rng.randint(0, quarter_limit - 1)
    lo = Fraction(lo_q, 4)
    if rng.chance(0.3):
        return Interval.unbounded(lo, rng.chance(0.7))
    hi_q = rng.randint(lo_q, quarter_limit)
    hi = Fraction(hi_q, 4)
    if hi == lo:
        return Interval.point(lo)
    return Interval(lo, hi, rng.chance(0.7), rng.chance(0.7))


def _random_term(rng: SplitMix64, scope: List[str]):
    if scope and rng.chance(0.7):
        return Var(rng.choice(scope))
    return Const(rng.choice(DATA))


def _random_atom(rng: SplitMix64, scope: List[str]) -> Formula:
    roll = rng.below(4)
    if roll == 0:
        return TrueF()
    if roll == 1:
        name, arity = rng.choice(PREDICATES)
        return Pred(name, tuple(_random_term(rng, scope) for _ in range(arity)))
    if roll == 2 and scope:
        return Cmp(rng.choice(CMP_OPS), Var(rng.choice(scope)), _random_term(rng, scope))
    name, arity = rng.choice(PREDICATES)
    return Pred(name, tuple(_random_term(rng, scope) for _ in range(arity)))


def random_formula(
    rng: SplitMix64, max_depth: int = 4, max_freezes: int = 2
) -> Formula:
    counter = [0]

    def go(depth: int, scope: List[str], freezes_left: int) -> Formula:
        if depth <= 0:
            return _random_atom(rng, scope)
        roll = rng.below(8)
        if roll == 0:
            return _random_atom(rng, scope)
        if roll == 1:
            return Not(go(depth - 1, scope, freezes_left))
        if roll == 2:
            return Or(go(depth - 1, scope, freezes_left), go(depth - 1, scope, freezes_left))
        if roll == 3 and freezes_left > 0:
            counter[0] += 1
            var = f"x{counter[0]}"
            reg = rng.choice(REGISTERS)
            return Freeze(reg, reg, var, go(depth - 1, scope + [var], freezes_left - 1))
        if roll == 4:
            return Prev(_random_interval(rng), go(depth - 1, scope, freezes_left))
        if roll == 5:
            return Next(_random_interval(rng), go(depth - 1, scope, freezes_left))
        if roll == 6:
            return Since(
                _random_interval(rng),
                go(depth - 1, scope, freezes_left),
                go(depth - 1, scope, freezes_left),
            )
        return Until(
            _random_interval(rng),
            go(depth - 1, scope, freezes_left),
            go(depth - 1, scope, freezes_left),
        )

    raw = go(max_depth, [], max_freezes)
    # Round through the printer/parser: normalizes names and verifies closure.
    return parse_formula(formula_to_text(raw))


def random_transformation_sequence(
    rng: SplitMix64,
    table: FormulaTable,
    steps: int = 15,
    grid_denominator: int = 4,
    horizon: int = 20,
) -> List[Tuple[Transformation, Observation]]:
    """A valid observation sequence as (transformation, resulting observation)
    pairs, with all timestamps on the 1/grid_denominator grid up to horizon."""
    w = initial()
    out: List[Tuple[Transformation, Observation]] = []
    aliases = list(table.registers)
    preds = list(table.predicates.items())
    for _ in range(steps):
        options = []
        gaps = [l.interval for l in w.letters if not l.interval.is_singleton]
        split_candidates = []
        for gap in gaps:
            lo_q = int(gap.lo * grid_denominator)
            hi = gap.hi if gap.hi is not None else Fraction(horizon)
            hi_q = int(hi * grid_denominator)
            points = [
                Fraction(qq, grid_denominator)
                for qq in range(lo_q, hi_q + 1)
                if gap.contains(Fraction(qq, grid_denominator))
            ]
            if points:
                split_candidates.append((gap, points))
        if split_candidates:
            options.append("t1")
        removable = [g for g in gaps if g.is_bounded]
        if removable:
            options.append("t2")
        fact_slots = []
        reg_slots = []
        for letter in w.letters:
            if not letter.interval.is_singleton:
                continue
            tau = letter.interval.singleton_value
            for name, arity in preds:
                if name not in letter.facts:
                    fact_slots.append((tau, name, arity))
            for alias in aliases:
                if alias not in letter.regs:
                    reg_slots.append((tau, alias))
        if fact_slots:
            options.append("t31")
        if reg_slots:
            options.append("t32")
        if not options:
            break
        # Bias toward adding knowledge at time points once they exist.
        weighted = [o for o in options for _ in (0, 1)] + options
        kind = rng.choice(weighted)
        if kind == "t1":
            gap, points = rng.choice(split_candidates)
            tau = rng.choice(points)
            w = w.split(tau)
            out.append((SplitAt(gap, tau), w))
        elif kind == "t2":
            gap = rng.choice(removable)
            w = w.remove(gap)
            out.append((RemoveGap(gap), w))
        elif kind == "t31":
            tau, name, arity = rng.choice(fact_slots)
            size = rng.below(3)
            rel = set()
            for _ in range(size):
                rel.add(tuple(rng.choice(DATA) for _ in range(arity)))
            w = w.set_facts(tau, name, rel)
            out.append((SetFacts(tau, name, tuple(sorted(rel))), w))
        else:
            tau, alias = rng.choice(reg_slots)
            value = rng.choice(DATA)
            w = w.set_register(tau, alias, value)
            out.append((SetRegister(tau, alias, value), w))
    return out


@dataclass(frozen=True)
class FuzzCase:
    seed: int
    formula: Formula
    table: FormulaTable
    steps: List[Tuple[Transformation, Observation]]


def make_case(seed: int, steps: int = 15) -> FuzzCase:
    rng = SplitMix64(seed)
    formula = random_formula(rng)
    table = compile_formula(formula)
    seq = random_transformation_sequence(rng, table, steps=steps)
    return FuzzCase(seed=seed, formula=formula, table=table, steps=seq)

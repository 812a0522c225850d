"""Reference evaluator for the three-valued semantics over observations.

Deliberately non-incremental: it unfolds the inductive definition directly
(with memoization) and serves as ground truth for every monitor test.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, FrozenSet, Optional, Set, Tuple

from .formula import (
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
    Value,
    Var,
    compile_formula,
)
from .intervals import Interval, interval_mc
from .observation import Observation
from .truth import F, T, Truth3, U, and3, implies3, not3, or3
from .valuation import EMPTY, Valuation, v_get, v_restrict, v_set

VerdictSet = FrozenSet[Tuple[Fraction, bool]]


def cmp_values(op: str, a: Value, b: Value) -> bool:
    """Rigid comparison; ints and strings are never equal, orderings across
    the two sorts are false."""
    same_sort = type(a) is type(b)
    if op == "=":
        return same_sort and a == b
    if op == "!=":
        return not (same_sort and a == b)
    if not same_sort:
        return False
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    raise ValueError(f"unknown comparison {op!r}")


class Oracle:
    def __init__(self, table: FormulaTable, w: Observation, memoize: bool = True):
        self.table = table
        self.w = w
        self.memoize = memoize
        self._memo: Dict[Tuple[int, int, Valuation], Truth3] = {}

    # -- helpers -------------------------------------------------------------

    def _tp(self, i: int) -> Truth3:
        # Never false: a gap may still produce a time point in a refinement.
        return T if self.w.is_time_point(i) else U

    def _mc(self, later: int, earlier: int, constraint: Interval) -> Truth3:
        return interval_mc(
            self.w.interval_at(later), self.w.interval_at(earlier), constraint
        )

    def _resolve(self, term, nu: Valuation) -> Optional[Value]:
        if isinstance(term, Const):
            return term.value
        return v_get(nu, term.name)

    # -- evaluation ----------------------------------------------------------

    def eval(self, i: int, nu: Valuation, f: Formula) -> Truth3:
        idx = self.table.idx(f)
        nu = v_restrict(nu, self.table.free[idx])
        key = (idx, i, nu)
        if self.memoize:
            hit = self._memo.get(key)
            if hit is not None:
                return hit
        value = self._eval(i, nu, f)
        if self.memoize:
            self._memo[key] = value
        return value

    def _eval(self, i: int, nu: Valuation, f: Formula) -> Truth3:
        if isinstance(f, TrueF):
            return T
        if isinstance(f, Pred):
            sigma = self.w.letters[i].facts
            if f.name not in sigma:
                return U
            args = [self._resolve(t, nu) for t in f.args]
            if any(a is None for a in args):
                return U
            return T if tuple(args) in sigma[f.name] else F
        if isinstance(f, Cmp):
            lhs = self._resolve(f.lhs, nu)
            rhs = self._resolve(f.rhs, nu)
            if lhs is None or rhs is None:
                return U
            return T if cmp_values(f.op, lhs, rhs) else F
        if isinstance(f, Freeze):
            regs = self.w.letters[i].regs
            if f.register in regs:
                return self.eval(i, v_set(nu, f.var, regs[f.register]), f.body)
            return self.eval(i, nu, f.body)  # variable stays unbound
        if isinstance(f, Not):
            return not3(self.eval(i, nu, f.body))
        if isinstance(f, Or):
            left = self.eval(i, nu, f.left)
            if left is T:
                return T
            return or3(left, self.eval(i, nu, f.right))
        if isinstance(f, Since):
            return self._since(i, nu, f)
        if isinstance(f, Until):
            return self._until(i, nu, f)
        if isinstance(f, Prev):
            return self._prev_next(i, nu, f, forward=False)
        if isinstance(f, Next):
            return self._prev_next(i, nu, f, forward=True)
        raise TypeError(f"unknown formula node {f!r}")

    def _since(self, i: int, nu: Valuation, f: Since) -> Truth3:
        result = F
        for j in range(i, -1, -1):
            disjunct = and3(self._tp(j), self._mc(i, j, f.interval))
            if disjunct is not F:
                disjunct = and3(disjunct, self.eval(j, nu, f.right))
            if disjunct is not F:
                for k in range(j + 1, i + 1):
                    disjunct = and3(
                        disjunct, implies3(self._tp(k), self.eval(k, nu, f.left))
                    )
                    if disjunct is F:
                        break
            result = or3(result, disjunct)
            if result is T:
                return T
        return result

    def _until(self, i: int, nu: Valuation, f: Until) -> Truth3:
        result = F
        for j in range(i, len(self.w)):
            disjunct = and3(self._tp(j), self._mc(j, i, f.interval))
            if disjunct is not F:
                disjunct = and3(disjunct, self.eval(j, nu, f.right))
            if disjunct is not F:
                for k in range(i, j):
                    disjunct = and3(
                        disjunct, implies3(self._tp(k), self.eval(k, nu, f.left))
                    )
                    if disjunct is F:
                        break
            result = or3(result, disjunct)
            if result is T:
                return T
        return result

    def _prev_next(self, i: int, nu: Valuation, f, forward: bool) -> Truth3:
        constraint = f.interval
        n = len(self.w)
        step = 1 if forward else -1

        if constraint == Interval.point(Fraction(0)):
            c0 = F
        else:
            c0 = and3(
                and3(self._mc(i, i, constraint), self.eval(i, nu, f.body)),
                not3(self._tp(i)),
            )
            assert c0 is not T, "c0 carries a negated tp literal; it can never be true"

        j1 = i + step
        if 0 <= j1 < n:
            pair = (j1, i) if forward else (i, j1)
            c1 = and3(
                and3(self._mc(pair[0], pair[1], constraint), self.eval(j1, nu, f.body)),
                and3(self._tp(j1), self._tp(i)),
            )
        else:
            c1 = F

        j2 = i + 2 * step
        if 0 <= j2 < n:
            pair = (j2, i) if forward else (i, j2)
            c2 = and3(
                and3(self._mc(pair[0], pair[1], constraint), self.eval(j2, nu, f.body)),
                not3(self._tp(i + step)),
            )
            assert c2 is not T, "c2 carries a negated tp literal; it can never be true"
        else:
            c2 = F

        return or3(or3(c0, c1), c2)


def eval_at(
    w: Observation,
    tau: Fraction,
    nu: Valuation,
    table: FormulaTable,
    oracle: Optional[Oracle] = None,
) -> Truth3:
    """Def-3.4 style evaluation: ? at any tau that is not a time point."""
    i = w.position_of_timestamp(tau)
    if i is None:
        return U
    if oracle is None:
        oracle = Oracle(table, w)
    return oracle.eval(i, nu, table.root)


def verdict_set(w: Observation, table: FormulaTable) -> VerdictSet:
    oracle = Oracle(table, w)
    out: Set[Tuple[Fraction, bool]] = set()
    for i in w.positions():
        if not w.is_time_point(i):
            continue
        value = oracle.eval(i, EMPTY, table.root)
        if value is T:
            out.add((w.ts(i), True))
        elif value is F:
            out.add((w.ts(i), False))
    return frozenset(out)


def make_table(formula: Formula) -> FormulaTable:
    return compile_formula(formula)

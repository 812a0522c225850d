"""Formula trees with freeze quantifiers and rigid comparison atoms.

AST nodes compare by identity on purpose: the same proposition occurring twice
must stay two distinct subformulas, so dictionaries keyed by subformula behave
like the indexed tables the evaluators need.  Structural checks go through
`formula_equal`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Tuple, Union

from .intervals import Interval
from .rational import to_decimal_str

Value = Union[int, str]

CMP_OPS = ("<", "<=", "=", "!=", ">=", ">")


@dataclass(frozen=True, eq=False)
class Var:
    name: str


@dataclass(frozen=True, eq=False)
class Const:
    value: Value


Term = Union[Var, Const]


@dataclass(frozen=True, eq=False)
class TrueF:
    pass


@dataclass(frozen=True, eq=False)
class Pred:
    name: str
    args: Tuple[Term, ...]


@dataclass(frozen=True, eq=False)
class Cmp:
    op: str
    lhs: Term
    rhs: Term


@dataclass(frozen=True, eq=False)
class Freeze:
    register: str         # unique alias after normalization
    source_register: str  # register name as written / as it appears on the wire
    var: str
    body: "Formula"


@dataclass(frozen=True, eq=False)
class Not:
    body: "Formula"


@dataclass(frozen=True, eq=False)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, eq=False)
class Prev:
    interval: Interval
    body: "Formula"


@dataclass(frozen=True, eq=False)
class Next:
    interval: Interval
    body: "Formula"


@dataclass(frozen=True, eq=False)
class Since:
    interval: Interval
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, eq=False)
class Until:
    interval: Interval
    left: "Formula"
    right: "Formula"


Formula = Union[TrueF, Pred, Cmp, Freeze, Not, Or, Prev, Next, Since, Until]

ATOMIC_TYPES = (TrueF, Pred, Cmp)
TEMPORAL_TYPES = (Prev, Next, Since, Until)


def is_atomic(f: Formula) -> bool:
    return isinstance(f, ATOMIC_TYPES)


def children(f: Formula) -> Tuple[Formula, ...]:
    if isinstance(f, (Freeze, Not, Prev, Next)):
        return (f.body,)
    if isinstance(f, (Or, Since, Until)):
        return (f.left, f.right)
    return ()


def subformulas(f: Formula) -> List[Formula]:
    """Preorder walk: every parent precedes its children."""
    out: List[Formula] = []
    stack = [f]
    while stack:
        node = stack.pop()
        out.append(node)
        stack.extend(reversed(children(node)))
    return out


def term_vars(t: Term) -> FrozenSet[str]:
    return frozenset((t.name,)) if isinstance(t, Var) else frozenset()


def free_vars(f: Formula) -> FrozenSet[str]:
    if isinstance(f, TrueF):
        return frozenset()
    if isinstance(f, Pred):
        out: FrozenSet[str] = frozenset()
        for a in f.args:
            out |= term_vars(a)
        return out
    if isinstance(f, Cmp):
        return term_vars(f.lhs) | term_vars(f.rhs)
    if isinstance(f, Freeze):
        return free_vars(f.body) - {f.var}
    got: FrozenSet[str] = frozenset()
    for c in children(f):
        got |= free_vars(c)
    return got


def formula_equal(a: Formula, b: Formula) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, TrueF):
        return True
    if isinstance(a, Pred):
        return a.name == b.name and len(a.args) == len(b.args) and all(
            _term_equal(x, y) for x, y in zip(a.args, b.args)
        )
    if isinstance(a, Cmp):
        return a.op == b.op and _term_equal(a.lhs, b.lhs) and _term_equal(a.rhs, b.rhs)
    if isinstance(a, Freeze):
        return (
            a.register == b.register
            and a.source_register == b.source_register
            and a.var == b.var
            and formula_equal(a.body, b.body)
        )
    if isinstance(a, (Prev, Next, Since, Until)) and a.interval != b.interval:
        return False
    return all(formula_equal(x, y) for x, y in zip(children(a), children(b)))


def _term_equal(a: Term, b: Term) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Var):
        return a.name == b.name
    return type(a.value) is type(b.value) and a.value == b.value


# ---------------------------------------------------------------------------
# Printing (inverse of the parser on normalized formulas)
# ---------------------------------------------------------------------------


def _term_text(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t.value, int):
        return str(t.value)
    return '"' + t.value.replace('"', '\\"') + '"'


def _interval_suffix(i: Interval) -> str:
    if i == Interval.unbounded():
        return ""
    left = "[" if i.lo_closed else "("
    right = "]" if i.hi_closed else ")"
    hi = "*" if i.hi is None else to_decimal_str(i.hi)
    return f"{left}{to_decimal_str(i.lo)},{hi}{right}"


def formula_to_text(f: Formula) -> str:
    """Render in the published grammar; parses back to an equal formula."""
    if isinstance(f, TrueF):
        return "TRUE"
    if isinstance(f, Pred):
        if not f.args:
            return f.name
        return f"{f.name}({', '.join(_term_text(a) for a in f.args)})"
    if isinstance(f, Cmp):
        return f"{_term_text(f.lhs)} {f.op} {_term_text(f.rhs)}"
    if isinstance(f, Freeze):
        return f"FREEZE {f.var} <- {f.source_register} . {formula_to_text(f.body)}"
    if isinstance(f, Not):
        return f"NOT ({formula_to_text(f.body)})"
    if isinstance(f, Or):
        return f"({formula_to_text(f.left)}) OR ({formula_to_text(f.right)})"
    if isinstance(f, Prev):
        return f"PREV{_interval_suffix(f.interval)} ({formula_to_text(f.body)})"
    if isinstance(f, Next):
        return f"NEXT{_interval_suffix(f.interval)} ({formula_to_text(f.body)})"
    if isinstance(f, Since):
        return (
            f"({formula_to_text(f.left)}) SINCE{_interval_suffix(f.interval)} "
            f"({formula_to_text(f.right)})"
        )
    if isinstance(f, Until):
        return (
            f"({formula_to_text(f.left)}) UNTIL{_interval_suffix(f.interval)} "
            f"({formula_to_text(f.right)})"
        )
    raise TypeError(f"unknown formula node {f!r}")


# ---------------------------------------------------------------------------
# Compiled table
# ---------------------------------------------------------------------------


@dataclass
class FormulaTable:
    """Preorder index over a closed, normalized formula.

    Evaluators address subformulas by their index; identity of AST nodes backs
    the mapping, so the formula must not be rebuilt after compilation.
    """

    root: Formula
    nodes: List[Formula] = field(default_factory=list)
    parent: List[Optional[int]] = field(default_factory=list)
    free: List[FrozenSet[str]] = field(default_factory=list)
    index_of: Dict[int, int] = field(default_factory=dict)  # id(node) -> index
    predicates: Dict[str, int] = field(default_factory=dict)  # name -> arity
    registers: Dict[str, int] = field(default_factory=dict)  # alias -> freeze index
    register_aliases: Dict[str, List[str]] = field(default_factory=dict)

    @property
    def root_index(self) -> int:
        return 0

    def idx(self, node: Formula) -> int:
        return self.index_of[id(node)]

    def child_indices(self, index: int) -> Tuple[int, ...]:
        return tuple(self.idx(c) for c in children(self.nodes[index]))


class FormulaError(ValueError):
    pass


def compile_formula(root: Formula) -> FormulaTable:
    if free_vars(root):
        raise FormulaError(f"formula is not closed: free {sorted(free_vars(root))}")
    table = FormulaTable(root=root)
    order = subformulas(root)
    table.nodes = order
    table.index_of = {id(n): i for i, n in enumerate(order)}
    table.parent = [None] * len(order)
    table.free = [free_vars(n) for n in order]
    seen_vars: Dict[str, int] = {}
    for i, node in enumerate(order):
        for c in children(node):
            table.parent[table.idx(c)] = i
        if isinstance(node, Pred):
            arity = table.predicates.setdefault(node.name, len(node.args))
            if arity != len(node.args):
                raise FormulaError(f"predicate {node.name} used with arities {arity} and {len(node.args)}")
        elif isinstance(node, Freeze):
            if node.var in seen_vars:
                raise FormulaError(f"variable {node.var} frozen twice")
            seen_vars[node.var] = i
            if node.register in table.registers:
                raise FormulaError(f"register alias {node.register} reused")
            table.registers[node.register] = i
            table.register_aliases.setdefault(node.source_register, []).append(node.register)
    return table

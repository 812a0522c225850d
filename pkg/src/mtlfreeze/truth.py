"""Strong Kleene three-valued logic ordered by knowledge."""

from __future__ import annotations

from enum import Enum


class Truth3(Enum):
    TRUE = "t"
    FALSE = "f"
    UNKNOWN = "?"

    def __repr__(self) -> str:  # compact in test output
        return self.value

    @property
    def is_boolean(self) -> bool:
        return self is not Truth3.UNKNOWN


T = Truth3.TRUE
F = Truth3.FALSE
U = Truth3.UNKNOWN


def from_bool(b: bool) -> Truth3:
    return T if b else F


def not3(a: Truth3) -> Truth3:
    if a is T:
        return F
    if a is F:
        return T
    return U


def or3(a: Truth3, b: Truth3) -> Truth3:
    if a is T or b is T:
        return T
    if a is F and b is F:
        return F
    return U


def and3(a: Truth3, b: Truth3) -> Truth3:
    if a is F or b is F:
        return F
    if a is T and b is T:
        return T
    return U


def implies3(a: Truth3, b: Truth3) -> Truth3:
    return or3(not3(a), b)


def kleene_apply(op: str, a: Truth3, b: Truth3 | None = None) -> Truth3:
    """Dispatch by operator name; `b` is required exactly for binary ops."""
    if op == "not":
        if b is not None:
            raise TypeError("'not' is unary")
        return not3(a)
    if b is None:
        raise TypeError(f"{op!r} is binary")
    if op == "or":
        return or3(a, b)
    if op == "and":
        return and3(a, b)
    if op == "implies":
        return implies3(a, b)
    raise ValueError(f"unknown operator {op!r}")


def meet3(a: Truth3, b: Truth3) -> Truth3:
    """Greatest lower bound in the knowledge order (? below both t and f)."""
    return a if a is b else U


def leq_knowledge(a: Truth3, b: Truth3) -> bool:
    """a precedes-or-equals b: refinements may only move ? up to t or f."""
    return a is U or a is b

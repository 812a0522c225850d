"""Partial valuations as small immutable sorted tuples (hashable node keys)."""

from __future__ import annotations

from typing import FrozenSet, Optional, Tuple

from .formula import Value

Valuation = Tuple[Tuple[str, Value], ...]

EMPTY: Valuation = ()


def v_get(nu: Valuation, name: str) -> Optional[Value]:
    for key, value in nu:
        if key == name:
            return value
    return None


def v_bound(nu: Valuation, name: str) -> bool:
    return any(key == name for key, _ in nu)


def v_set(nu: Valuation, name: str, value: Value) -> Valuation:
    items = [(k, v) for k, v in nu if k != name]
    items.append((name, value))
    items.sort(key=lambda kv: kv[0])
    return tuple(items)


def v_del(nu: Valuation, name: str) -> Valuation:
    return tuple((k, v) for k, v in nu if k != name)


def v_restrict(nu: Valuation, names: FrozenSet[str]) -> Valuation:
    return tuple((k, v) for k, v in nu if k in names)


def v_to_dict(nu: Valuation) -> dict:
    return dict(nu)

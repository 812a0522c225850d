"""Exact nonnegative rationals for timestamps and interval bounds.

Timestamps travel on the wire as decimal strings and must convert exactly;
float is never allowed anywhere near a bound.
"""

from __future__ import annotations

import re
from fractions import Fraction

_DECIMAL_RE = re.compile(r"^\s*([0-9]+)(?:\.([0-9]+))?\s*$")


class RationalError(ValueError):
    pass


def parse_rational(text: str) -> Fraction:
    """Parse a nonnegative decimal string ("3", "3.0", "0.25") exactly."""
    m = _DECIMAL_RE.match(text)
    if m is None:
        raise RationalError(f"not a nonnegative decimal rational: {text!r}")
    whole, frac = m.group(1), m.group(2)
    value = Fraction(int(whole))
    if frac:
        value += Fraction(int(frac), 10 ** len(frac))
    return value


def to_decimal_str(value: Fraction) -> str:
    """Render a rational as an exact decimal string.

    Only rationals whose denominator divides a power of ten can appear on the
    wire; anything else falls back to "p/q" (never produced by our own I/O).
    """
    if value < 0:
        raise RationalError(f"negative rational not representable here: {value}")
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{value.numerator}/{value.denominator}"
    digits = max(twos, fives)
    scaled = value.numerator * 10**digits // value.denominator
    if digits == 0:
        return str(scaled)
    text = str(scaled).rjust(digits + 1, "0")
    return f"{text[:-digits]}.{text[-digits:]}"


def coerce_rational(value) -> Fraction:
    """Accept Fraction, int, or decimal string. Floats are rejected."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise RationalError(f"cannot use {type(value).__name__} as an exact rational")

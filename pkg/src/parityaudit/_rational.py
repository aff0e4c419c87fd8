"""Exact-rational helpers shared across the package."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

Rational = Union[int, float, str, Fraction]


def as_fraction(x: Rational) -> Fraction:
    """Convert ``x`` to a Fraction, reading floats by their shortest decimal repr.

    ``as_fraction(0.8) == Fraction(4, 5)``, so a tolerance typed as ``0.8``
    behaves as the decimal the user wrote rather than its binary neighbour.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"not a finite number: {x!r}")
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {type(x).__name__} as a rational")


def round_half_away(x: Fraction) -> int:
    """Round to the nearest integer, ties away from zero."""
    if x < 0:
        return -round_half_away(-x)
    return math.floor(x + Fraction(1, 2))


def ratio(num, den) -> Fraction | None:
    """``num/den`` as an exact Fraction, or None when the denominator is zero."""
    if den == 0:
        return None
    return Fraction(num) / Fraction(den)


def sig6(x: Fraction | int | float) -> float:
    """Decimal rendering with 6 significant digits."""
    return float(f"{float(x):.6g}")

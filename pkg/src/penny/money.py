"""Money is integer micro-USD everywhere.

Arithmetic happens in exact rationals and touches an int exactly once,
at the rounding boundary. Banker's rounding keeps column sums stable
when many half-cent quantities meet.
"""

from __future__ import annotations

from fractions import Fraction

MICROS_PER_USD = 10**6


def round_half_even(amount: Fraction) -> int:
    """Nearest integer; ties go to the even neighbour."""
    floor = amount.numerator // amount.denominator
    remainder = amount - floor
    twice = 2 * remainder.numerator
    if twice < remainder.denominator:
        return floor
    if twice > remainder.denominator:
        return floor + 1
    return floor if floor % 2 == 0 else floor + 1


def display_usd(micro: int) -> str:
    """Render integer micro-USD as a dollar string, six places."""
    sign = "-" if micro < 0 else ""
    whole, frac = divmod(abs(micro), MICROS_PER_USD)
    return f"{sign}${whole}.{frac:06d}"

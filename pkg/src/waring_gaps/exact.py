"""Canonical rational rendering and parsing.

Everything that feeds a verdict is kept as a reduced ``Fraction`` or a
Python integer; decimal output exists for human eyes only and is produced
with integer arithmetic, never ``float``.
"""

from __future__ import annotations

from fractions import Fraction


def fraction_str(x: Fraction | int) -> str:
    """Render a rational canonically, as ``p`` or ``p/q`` in lowest terms."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(text: str | int | Fraction) -> Fraction:
    """Parse ``p``, ``p/q`` or an already-rational value into a Fraction."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return Fraction(int(num.strip()), int(den.strip()))
    return Fraction(int(text))


def decimal_str(x: Fraction | int, digits: int = 12) -> str:
    """Display-only decimal rendering, truncated toward zero.

    Computed with exact integer division so the same rational always
    renders to the same string; not to be used in any comparison.
    """
    x = Fraction(x)
    sign = "-" if x < 0 else ""
    ax = abs(x)
    whole, rem = divmod(ax.numerator, ax.denominator)
    frac_digits = (rem * 10**digits) // ax.denominator
    return f"{sign}{whole}.{str(frac_digits).zfill(digits)}"

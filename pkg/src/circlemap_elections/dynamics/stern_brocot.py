"""Stern–Brocot descent and Farey enumeration over exact fractions."""

from __future__ import annotations

import math
from collections.abc import Iterator
from fractions import Fraction

from circlemap_elections.core.errors import ValidationError

type Bound = float | Fraction


def simplest_in(lo: Bound, hi: Bound, q_max: int) -> Fraction | None:
    """Smallest-denominator fraction in the closed interval [lo, hi], if its denominator <= q_max.

    Walks the Stern–Brocot tree between the integers around `lo`, taking runs of equal turns in
    one step so intervals close to a fraction do not cost one mediant per unit of denominator.
    """

    if q_max < 1:
        raise ValidationError(f"q-max must be >= 1 (got {q_max})")
    low = Fraction(lo)
    high = Fraction(hi)
    if low > high:
        raise ValidationError(f"empty interval [{lo}, {hi}]")
    whole = math.ceil(low)
    if whole <= high:
        return Fraction(whole)

    ln, ld = math.floor(low), 1
    rn, rd = ln + 1, 1
    while True:
        mn, md = ln + rn, ld + rd
        if md > q_max:
            return None
        if Fraction(mn, md) < low:
            # smallest k with (ln + k·rn)/(ld + k·rd) >= low
            k = math.ceil((low * ld - ln) / (rn - low * rd))
            ln, ld = ln + (k - 1) * rn, ld + (k - 1) * rd
        elif Fraction(mn, md) > high:
            # smallest k with (k·ln + rn)/(k·ld + rd) <= high
            k = math.ceil((rn - high * rd) / (high * ld - ln))
            rn, rd = (k - 1) * ln + rn, (k - 1) * ld + rd
        else:
            return Fraction(mn, md)


def farey(q_max: int) -> Iterator[Fraction]:
    """Farey sequence of order q_max on [0, 1), in increasing order."""

    if q_max < 1:
        raise ValidationError(f"q-max must be >= 1 (got {q_max})")
    a, b, c, d = 0, 1, 1, q_max
    while a < b:
        yield Fraction(a, b)
        k = (q_max + b) // d
        a, b, c, d = c, d, k * c - a, k * d - b

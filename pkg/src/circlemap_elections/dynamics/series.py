"""Certified enclosures of the series b₋, b₊, ψ and φ_ρ.

Every series has the shape Σ_{j≥0} aʲ c_j with integer coefficients |c_j| ≤ j+2 (plus a shift
⌊x⌋ for φ_ρ). Rational ρ = p/q with a small denominator is summed in closed form: the
coefficients are periodic in j up to a linear drift, so the infinite sum collapses to q terms.
Any other ρ is truncated at an index J whose tail bound
Σ_{j>J} (j+2)aʲ = a^{J+1}[(J+3)/(1-a) + a/(1-a)²] is below tol/2, and the tail is added as an
interval. All arithmetic runs in mpmath interval arithmetic and is rounded outward to floats.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np
from mpmath import iv

from circlemap_elections.core.config import DEFAULT_CONFIG
from circlemap_elections.core.errors import ValidationError

logger = logging.getLogger(__name__)

INTERVAL_DPS = 30
CLOSED_FORM_MAX_Q = 4096
MAX_SERIES_TERMS = 200_000

iv.dps = INTERVAL_DPS

type Rho = float | Fraction
type Interval = Any


@dataclass(frozen=True, slots=True)
class Enclosure:
    """Closed interval [lo, hi] known to contain a quantity."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.lo <= self.hi:
            raise ValidationError(f"enclosure endpoints out of order: [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, value: float) -> Enclosure:
        return cls(value, value)

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, value: float, *, slack: float = 0.0) -> bool:
        return self.lo - slack <= value <= self.hi + slack

    def shifted(self, offset: float) -> Enclosure:
        return Enclosure(
            math.nextafter(self.lo + offset, -math.inf),
            math.nextafter(self.hi + offset, math.inf),
        )


def to_enclosure(value: Interval) -> Enclosure:
    """Round an mpmath interval outward to float endpoints."""

    lo = float(value.a)
    hi = float(value.b)
    if iv.mpf(lo) > value.a:
        lo = math.nextafter(lo, -math.inf)
    if iv.mpf(hi) < value.b:
        hi = math.nextafter(hi, math.inf)
    return Enclosure(lo, hi)


def as_fraction(value: Rho) -> Fraction:
    """Exact rational value of a float or Fraction."""

    if isinstance(value, Fraction):
        return value
    if not math.isfinite(value):
        raise ValidationError(f"expected a finite number (got {value})")
    return Fraction(value)


def tail_bound(a: float, J: int) -> float:
    """Σ_{j>J} (j+2)aʲ in closed form."""

    return a ** (J + 1) * ((J + 3) / (1.0 - a) + a / (1.0 - a) ** 2)


def truncation_index(a: float, tol: float, *, scale: float = 1.0) -> int:
    """Smallest J with scale·Σ_{j>J} (j+2)aʲ < tol/2."""

    J = 0
    while scale * tail_bound(a, J) >= tol / 2:
        J += 1
        if J > MAX_SERIES_TERMS:
            raise ValidationError(
                f"a={a!r} is too close to 1: the series needs more than {MAX_SERIES_TERMS} terms"
            )
    return J


def _check_slope(a: float) -> None:
    if not 0.0 < a < 1.0:
        raise ValidationError(f"a must satisfy 0 < a < 1 (got {a})")


def _check_rho(rho: Fraction) -> None:
    if not 0 <= rho <= 1:
        raise ValidationError(f"rho must satisfy 0 <= rho <= 1 (got {rho})")


def _check_tol(tol: float) -> None:
    if not tol > 0.0:
        raise ValidationError(f"tol must be > 0 (got {tol})")


def _ceil_coefficient(value: Fraction) -> int:
    return math.ceil(value)


def _floor_coefficient(value: Fraction) -> int:
    return math.floor(value)


def _closed_form_sum(
    a_iv: Interval,
    rho: Fraction,
    shift: Fraction,
    rounding: Callable[[Fraction], int],
) -> Interval:
    """Σ_{j≥0} aʲ R(shift + (j+1)ρ) for ρ = p/q, R ∈ {⌈·⌉, ⌊·⌋}.

    With j+1 = mq + r the coefficient is R(shift + rp/q) + mp, hence the sum equals
    [Σ_{r=1}^{q} a^{r-1} R(shift + rp/q) + p a^q/(1-a)] / (1-a^q).
    """

    p, q = rho.numerator, rho.denominator
    head = iv.mpf(0)
    power = iv.mpf(1)
    for r in range(1, q + 1):
        head += power * rounding(shift + r * rho)
        power *= a_iv
    # power == a^q here
    return (head + p * power / (1 - a_iv)) / (1 - power)


def _truncated_sum(
    a: float,
    a_iv: Interval,
    rho: Fraction,
    shift: Fraction,
    rounding: Callable[[Fraction], int],
    *,
    tol: float,
    scale: float,
) -> Interval:
    """Σ_{j≥0} aʲ R(shift + (j+1)ρ) for 0 <= shift < 1, tail as an interval."""

    J = truncation_index(a, tol, scale=scale)
    logger.debug("series for rho with denominator %d truncated at J=%d", rho.denominator, J)
    partial = iv.mpf(0)
    power = iv.mpf(1)
    for j in range(J + 1):
        partial += power * rounding(shift + (j + 1) * rho)
        power *= a_iv
    tail = tail_bound_interval(a_iv, J)
    # coefficients lie in [0, j+2] for shift in [0,1) and rho in [0,1]
    return partial + tail * iv.mpf([0, 1])


def tail_bound_interval(a_iv: Interval, J: int) -> Interval:
    return a_iv ** (J + 1) * ((J + 3) / (1 - a_iv) + a_iv / (1 - a_iv) ** 2)


def _series(
    a: float,
    rho: Fraction,
    shift: Fraction,
    rounding: Callable[[Fraction], int],
    *,
    tol: float,
    scale: float,
) -> Interval:
    a_iv = iv.mpf(a)
    if rho.denominator <= CLOSED_FORM_MAX_Q:
        return _closed_form_sum(a_iv, rho, shift, rounding)
    return _truncated_sum(a, a_iv, rho, shift, rounding, tol=tol, scale=scale)


def b_lower_interval(a: float, rho: Rho, tol: float = DEFAULT_CONFIG.tol) -> Interval:
    """b₋(a,ρ) = (1-a)² Σ aʲ ⌈(j+1)ρ⌉ as an mpmath interval."""

    _check_slope(a)
    _check_tol(tol)
    exact = as_fraction(rho)
    _check_rho(exact)
    scale = (1.0 - a) ** 2
    total = _series(a, exact, Fraction(0), _ceil_coefficient, tol=tol, scale=scale)
    return (1 - iv.mpf(a)) ** 2 * total


def b_upper_interval(a: float, rho: Rho, tol: float = DEFAULT_CONFIG.tol) -> Interval:
    """b₊(a,ρ) = 1-a + (1-a)² Σ aʲ ⌊(j+1)ρ⌋ as an mpmath interval."""

    _check_slope(a)
    _check_tol(tol)
    exact = as_fraction(rho)
    _check_rho(exact)
    scale = (1.0 - a) ** 2
    total = _series(a, exact, Fraction(0), _floor_coefficient, tol=tol, scale=scale)
    one_minus_a = 1 - iv.mpf(a)
    return one_minus_a + one_minus_a**2 * total


def b_lower(a: float, rho: Rho, tol: float = DEFAULT_CONFIG.tol) -> Enclosure:
    """Enclosure of b₋(a,ρ), the left end of the offsets with rotation number ρ."""

    return to_enclosure(b_lower_interval(a, rho, tol))


def b_upper(a: float, rho: Rho, tol: float = DEFAULT_CONFIG.tol) -> Enclosure:
    """Enclosure of b₊(a,ρ), the right end of the offsets with rotation number ρ."""

    return to_enclosure(b_upper_interval(a, rho, tol))


def psi(a: float, b: float, rho: Rho, tol: float = DEFAULT_CONFIG.tol) -> Enclosure:
    """ψ(ρ) = (b - b₋(a,ρ))/(1-a)."""

    return to_enclosure(psi_interval(a, b, rho, tol))


def psi_right(a: float, b: float, rho: Rho, tol: float = DEFAULT_CONFIG.tol) -> Enclosure:
    """ψ(ρ+) = (b - b₊(a,ρ))/(1-a)."""

    value = (iv.mpf(b) - b_upper_interval(a, rho, tol)) / (1 - iv.mpf(a))
    return to_enclosure(value)


def psi_interval(a: float, b: float, rho: Rho, tol: float = DEFAULT_CONFIG.tol) -> Interval:
    return (iv.mpf(b) - b_lower_interval(a, rho, tol)) / (1 - iv.mpf(a))


def phi_rho(
    a: float,
    b: float,
    rho: Rho,
    x: Rho,
    tol: float = DEFAULT_CONFIG.tol,
    *,
    left: bool = False,
) -> Enclosure:
    """φ_ρ(x) = b/(1-a) + (1-a) Σ aʲ ⌊x-(j+1)ρ⌋, or its left limit φ_ρ(x-).

    φ_ρ(x+1) = φ_ρ(x) + 1, so the integer part of x is split off and the series is summed at
    the fractional part, where every coefficient ⌊y - (j+1)ρ⌋ = -⌈(j+1)ρ - y⌉ lies in
    [-(j+2), 0].
    """

    _check_slope(a)
    _check_tol(tol)
    exact_rho = as_fraction(rho)
    _check_rho(exact_rho)
    exact_x = as_fraction(x)
    whole = math.floor(exact_x)
    y = exact_x - whole
    if left and y == 0:
        whole -= 1
        y = Fraction(1)

    def coefficient(value: Fraction) -> int:
        # value = (j+1)ρ - y + 1: ⌊y - (j+1)ρ⌋ = 1 - ⌈value⌉, its left limit is -⌊value⌋
        if left:
            return math.floor(value)
        return math.ceil(value)

    a_iv = iv.mpf(a)
    one_minus_a = 1 - a_iv
    scale = 1.0 - a
    # Σ aʲ ⌈(j+1)ρ - y + 1⌉ with shift 1 - y in [0, 1)
    total = _series(a, exact_rho, 1 - y, coefficient, tol=tol, scale=scale)
    ones = 1 / one_minus_a
    if left:
        series_value = -total
    else:
        series_value = ones - total
    value = iv.mpf(b) / one_minus_a + one_minus_a * series_value + whole
    return to_enclosure(value)


def phi_rho_grid(
    a: float, b: float, rho: float, xs: np.ndarray, *, tol: float = 1e-15
) -> np.ndarray:
    """Vectorized float evaluation of φ_ρ on many points (no certification)."""

    _check_slope(a)
    J = truncation_index(a, tol, scale=1.0 - a)
    shifts = (np.arange(J + 1, dtype=np.float64) + 1.0) * rho
    weights = a ** np.arange(J + 1, dtype=np.float64)
    floors = np.floor(xs[:, None] - shifts[None, :])
    return b / (1.0 - a) + (1.0 - a) * (floors @ weights)

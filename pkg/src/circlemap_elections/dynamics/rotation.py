"""Rotation number ρ(a,b): certification, plateaus, orbit averages and periodic orbits."""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import StrEnum
from fractions import Fraction
from itertools import islice

import numpy as np

from circlemap_elections.core.config import DEFAULT_CONFIG
from circlemap_elections.core.errors import CircleMapError, ValidationError
from circlemap_elections.dynamics.circle_map import (
    AlwaysLower,
    AlwaysUpper,
    BranchPolicy,
    MapParams,
    Orbit,
    iterate_orbit,
    lift_orbit,
)
from circlemap_elections.dynamics.series import (
    Enclosure,
    Rho,
    b_lower,
    b_upper,
    phi_rho,
    phi_rho_grid,
    psi,
)
from circlemap_elections.dynamics.stern_brocot import farey, simplest_in

logger = logging.getLogger(__name__)

BOUNDARY_ULPS = 4


class BoundaryCase(StrEnum):
    LOWER = "LowerBoundary"
    INTERIOR = "Interior"
    UPPER = "UpperBoundary"


@dataclass(frozen=True, slots=True)
class RationalRotation:
    """ρ = p/q with b inside the plateau [b₋, b₊].

    `boundary_uncertain` is set when b lies within the enclosure widths of a plateau end; the
    rotation number is then reported with the nearest end as `boundary_case`.
    """

    p: int
    q: int
    boundary_case: BoundaryCase = BoundaryCase.INTERIOR
    boundary_uncertain: bool = False

    @property
    def value(self) -> Fraction:
        return Fraction(self.p, self.q)

    def __float__(self) -> float:
        return self.p / self.q


@dataclass(frozen=True, slots=True)
class EnclosedRotation:
    """ρ ∈ [lo, hi] with no plateau of denominator <= q_max certified."""

    lo: float
    hi: float
    boundary_ambiguous: bool = False

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __float__(self) -> float:
        return self.mid


type RotationNumber = RationalRotation | EnclosedRotation


@dataclass(frozen=True, slots=True)
class Plateau:
    """Plateau [lower, upper] of ρ = p/q; endpoints are float closed forms accurate to ±pad."""

    rho: Fraction
    lower: float
    upper: float
    pad: float

    @property
    def length(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True, slots=True)
class PlateauSweep:
    a: float
    q_max: int
    plateaus: tuple[Plateau, ...]
    total_length: float

    @property
    def missing_bound(self) -> float:
        """Upper bound on the measure of plateaus with denominator > q_max."""

        return (self.q_max + 1.0 / (1.0 - self.a)) * self.a**self.q_max


@dataclass(frozen=True, slots=True)
class PeriodicOrbitInfo:
    """Sorted points of the periodic orbit C and its position relative to 0 and 1."""

    points: tuple[float, ...]
    p: int
    q: int
    boundary_case: BoundaryCase
    boundary_uncertain: bool
    return_defect: float


def rho_bounds(params: MapParams) -> tuple[float, float]:
    """a+b-1 <= ρ <= b."""

    return max(0.0, params.a + params.b - 1.0), params.b


def plateau(
    a: float, p: int, q: int, tol: float = DEFAULT_CONFIG.tol
) -> tuple[Enclosure, Enclosure]:
    """Enclosures of the plateau ends b₋(a, p/q) and b₊(a, p/q)."""

    _check_fraction(p, q)
    rho = Fraction(p, q)
    return b_lower(a, rho, tol), b_upper(a, rho, tol)


def plateau_length(a: float, q: int) -> float:
    """b₊ - b₋ = a^{q-1}(1-a)²/(1-a^q)."""

    if q < 1:
        raise ValidationError(f"q must be >= 1 (got {q})")
    return a ** (q - 1) * (1.0 - a) ** 2 / (1.0 - a**q)


def _check_fraction(p: int, q: int) -> None:
    if q < 1 or p < 0 or p >= q:
        raise ValidationError(f"expected 0 <= p/q < 1 (got {p}/{q})")
    if math.gcd(p, q) != 1:
        raise ValidationError(f"fraction {p}/{q} is not reduced")


def plateaus_with_denominator(a: float, q: int, numerators: Sequence[int]) -> list[Plateau]:
    """Float plateaus of p/q for the given numerators, evaluated together."""

    if not 0.0 < a < 1.0:
        raise ValidationError(f"a must satisfy 0 < a < 1 (got {a})")
    tops = np.asarray(numerators, dtype=np.int64)
    r = np.arange(1, q + 1, dtype=np.int64)
    products = tops[:, None] * r[None, :]
    ceilings = (products + q - 1) // q
    floors = products // q
    weights = a ** np.arange(q, dtype=np.float64)
    drift = tops * a**q / (1.0 - a)
    scale = (1.0 - a) ** 2 / (1.0 - a**q)
    lower = scale * (ceilings @ weights + drift)
    upper = (1.0 - a) + scale * (floors @ weights + drift)
    pad = (2 * q + 32) * np.finfo(np.float64).eps * (1.0 + 1.0 / (1.0 - a))
    return [
        Plateau(rho=Fraction(int(p), q), lower=float(lo), upper=float(hi), pad=float(pad))
        for p, lo, hi in zip(tops, lower, upper, strict=True)
    ]


def numerators_by_denominator(q_max: int) -> dict[int, list[int]]:
    """Farey sequence of order q_max grouped by denominator."""

    groups: defaultdict[int, list[int]] = defaultdict(list)
    for rho in farey(q_max):
        groups[rho.denominator].append(rho.numerator)
    return dict(groups)


def build_sweep(a: float, q_max: int, groups: Iterable[list[Plateau]]) -> PlateauSweep:
    plateaus = sorted((item for group in groups for item in group), key=lambda item: item.rho)
    lengths = [plateau_length(a, item.rho.denominator) for item in plateaus]
    return PlateauSweep(
        a=a,
        q_max=q_max,
        plateaus=tuple(plateaus),
        total_length=math.fsum(lengths),
    )


def plateau_sweep(a: float, q_max: int) -> PlateauSweep:
    """Every plateau with denominator <= q_max, sorted by ρ, with the total plateau length."""

    if q_max < 1:
        raise ValidationError(f"q-max must be >= 1 (got {q_max})")
    groups = numerators_by_denominator(q_max)
    return build_sweep(
        a, q_max, (plateaus_with_denominator(a, q, tops) for q, tops in sorted(groups.items()))
    )


def _candidate(a: float, b: float, rho: Fraction, tol: float) -> RationalRotation | None:
    """Test b ∈ [b₋(a,ρ), b₊(a,ρ)]; flag results that hinge on an endpoint enclosure.

    b is uncertain when it lies within one enclosure width (plus a few ulps of b) of an end.
    """

    if rho >= 1:
        return None
    lower = b_lower(a, rho, tol)
    upper = b_upper(a, rho, tol)
    p, q = rho.numerator, rho.denominator
    if lower.lo == lower.hi == b:
        return RationalRotation(p, q, BoundaryCase.LOWER)
    if upper.lo == upper.hi == b:
        return RationalRotation(p, q, BoundaryCase.UPPER)
    if lower.hi < b < upper.lo:
        return RationalRotation(p, q, BoundaryCase.INTERIOR)
    slack = max(lower.width, upper.width) + BOUNDARY_ULPS * math.ulp(b)
    if lower.contains(b, slack=slack) or upper.contains(b, slack=slack):
        nearest = (
            BoundaryCase.LOWER if abs(b - lower.mid) <= abs(b - upper.mid) else BoundaryCase.UPPER
        )
        logger.warning(
            "b=%r lies within %.1e of the %s end of the rho=%s plateau; certification is uncertain",
            b,
            slack,
            nearest.value,
            rho,
        )
        return RationalRotation(p, q, nearest, boundary_uncertain=True)
    return None


def _unit_slope_rotation(params: MapParams, q_max: int) -> RotationNumber:
    exact = Fraction(params.b)
    if exact.denominator <= q_max:
        return RationalRotation(exact.numerator, exact.denominator)
    return EnclosedRotation(params.b, params.b)


def rotation_number(
    params: MapParams,
    *,
    q_max: int = DEFAULT_CONFIG.q_max,
    tol: float = DEFAULT_CONFIG.tol,
) -> RotationNumber:
    """ρ(a,b) = sup{ρ : ψ(ρ) >= 0}, certified rational when a plateau with q <= q_max holds b.

    Bisection keeps ψ(lo) >= 0 > ψ(hi) on certified enclosures; after every step the simplest
    fraction of the bracket is tested against its plateau.
    """

    if params.unit_slope:
        return _unit_slope_rotation(params, q_max)
    a, b = params.a, params.b
    lo, hi = 0.0, 1.0
    straddled = False
    tested: set[Fraction] = set()
    while True:
        candidate = simplest_in(lo, hi, q_max)
        if candidate is not None and candidate not in tested:
            tested.add(candidate)
            result = _candidate(a, b, candidate, tol)
            if result is not None:
                return _checked(params, result, tol)
        if hi - lo <= tol:
            break
        middle = 0.5 * (lo + hi)
        value = psi(a, b, middle, tol)
        if value.lo >= 0.0:
            lo = middle
        elif value.hi < 0.0:
            hi = middle
        else:
            logger.debug("psi enclosure straddles 0 at rho=%r; stopping bisection", middle)
            straddled = True
            break
        logger.debug("rho bracket [%r, %r]", lo, hi)

    candidate = simplest_in(max(0.0, lo - tol), hi + tol, q_max)
    if candidate is not None and candidate not in tested:
        result = _candidate(a, b, candidate, tol)
        if result is not None:
            return _checked(params, result, tol)
    return _checked(params, EnclosedRotation(lo, hi, boundary_ambiguous=straddled), tol)


def _checked(params: MapParams, result: RotationNumber, tol: float) -> RotationNumber:
    low, high = rho_bounds(params)
    if isinstance(result, RationalRotation):
        inside = low - tol <= float(result) <= high + tol
    else:
        inside = result.hi >= low - tol and result.lo <= high + tol
    if not inside:
        raise CircleMapError(
            f"rotation number {result} violates a+b-1 <= rho <= b "
            f"for a={params.a!r}, b={params.b!r}"
        )
    return result


def rotation_number_orbit_estimate(params: MapParams, n: int) -> Enclosure:
    """[F₋ⁿ(0)/n - 1/n, F₋ⁿ(0)/n + 1/n] ∩ [0, 1)."""

    if n < 1:
        raise ValidationError(f"n must be >= 1 (got {n})")
    center = lift_orbit(params, 0.0, n) / n
    return Enclosure(
        max(0.0, center - 1.0 / n),
        min(center + 1.0 / n, math.nextafter(1.0, 0.0)),
    )


def orbit_mean(
    params: MapParams,
    x0: float,
    n: int,
    policy: BranchPolicy | None = None,
) -> float:
    """(1/n) Σ_{i<n} x_i."""

    if n < 1:
        raise ValidationError(f"n must be >= 1 (got {n})")
    steps = iterate_orbit(params, x0, policy or AlwaysLower())
    return math.fsum(step.x for step in islice(steps, n)) / n


def chi(params: MapParams, rho: Rho) -> float:
    """Centre of mass χ = (b-ρ)/(1-a) of the invariant measure."""

    if params.unit_slope:
        raise ValidationError("chi is undefined for a = 1")
    return (params.b - float(rho)) / (1.0 - params.a)


def symbol_frequency_check(orbit: Orbit, rho: Rho) -> tuple[float, float]:
    """Mean of ε_i and max_n |Σ_{i<n} ε_i - ρn| along the orbit."""

    if len(orbit.points) < 2:
        raise ValidationError("orbit must contain at least two points")
    symbols = np.asarray(orbit.symbols, dtype=np.float64)
    partial = np.concatenate(([0.0], np.cumsum(symbols)))
    counts = np.arange(partial.size, dtype=np.float64)
    deviation = float(np.max(np.abs(partial - float(rho) * counts)))
    return float(symbols.mean()), deviation


def periodic_orbit(
    params: MapParams,
    *,
    q_max: int = DEFAULT_CONFIG.q_max,
    tol: float = DEFAULT_CONFIG.tol,
) -> PeriodicOrbitInfo | None:
    """C = {φ_ρ(k/q) : k < q} when ρ is certified rational, else None."""

    rotation = rotation_number(params, q_max=q_max, tol=tol)
    if not isinstance(rotation, RationalRotation):
        return None
    if params.unit_slope:
        raise ValidationError("the periodic orbit is not unique for a = 1")
    a, b = params.a, params.b
    p, q = rotation.p, rotation.q
    rho = rotation.value
    points = [min(max(phi_rho(a, b, rho, Fraction(k, q), tol).mid, 0.0), 1.0) for k in range(q)]
    if rotation.boundary_case is BoundaryCase.LOWER:
        points[0] = 0.0
    elif rotation.boundary_case is BoundaryCase.UPPER:
        points[-1] = 1.0
    policy: BranchPolicy = (
        AlwaysUpper() if rotation.boundary_case is BoundaryCase.UPPER else AlwaysLower()
    )
    defect = 0.0
    for start in points:
        end = start
        for step in islice(iterate_orbit(params, start, policy), q):
            end = step.x_next
        defect = max(defect, abs(end - start))
    if defect > 1e-9:
        logger.warning("periodic orbit for rho=%d/%d returns with defect %.3g", p, q, defect)
    return PeriodicOrbitInfo(
        points=tuple(points),
        p=p,
        q=q,
        boundary_case=rotation.boundary_case,
        boundary_uncertain=rotation.boundary_uncertain,
        return_defect=defect,
    )


def conjugacy_defect(params: MapParams, rho: float, xs: np.ndarray) -> float:
    """max over xs of the circle distance between f₋({φ_ρ(x)}) and {φ_ρ(x+ρ)}."""

    a, b = params.a, params.b
    left = np.mod(a * np.mod(phi_rho_grid(a, b, rho, xs), 1.0) + b, 1.0)
    right = np.mod(phi_rho_grid(a, b, rho, xs + rho), 1.0)
    gap = np.abs(left - right)
    return float(np.max(np.minimum(gap, 1.0 - gap)))


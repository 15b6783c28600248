"""Invariant set Λ±, gap structure, dynamics classification and invariant-measure samples."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import StrEnum
from fractions import Fraction
from functools import singledispatch
from itertools import islice

import numpy as np
from scipy import stats

from circlemap_elections.core.config import DEFAULT_CONFIG
from circlemap_elections.core.errors import ValidationError
from circlemap_elections.dynamics.circle_map import (
    AlwaysLower,
    BranchPolicy,
    MapParams,
    Orbit,
    discontinuity,
    iterate_orbit,
)
from circlemap_elections.dynamics.rotation import (
    BoundaryCase,
    EnclosedRotation,
    PeriodicOrbitInfo,
    RationalRotation,
    RotationNumber,
    rotation_number,
)
from circlemap_elections.dynamics.series import phi_rho, phi_rho_grid
from circlemap_elections.dynamics.stern_brocot import simplest_in

type Span = tuple[float, float]


@dataclass(frozen=True, slots=True)
class IntervalUnion:
    """Sorted, pairwise disjoint closed intervals in [0, 1]; points are degenerate intervals."""

    intervals: tuple[Span, ...]

    @property
    def total_length(self) -> float:
        return math.fsum(right - left for left, right in self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def distance(self, x: float) -> float:
        return min(
            (max(left - x, 0.0, x - right) for left, right in self.intervals),
            default=math.inf,
        )

    def contains(self, x: float, *, slack: float = 0.0) -> bool:
        return self.distance(x) <= slack


class DynamicsClass(StrEnum):
    CASE_1A = "Case1a"
    CASE_1B_ZERO = "Case1b_zero"
    CASE_1B_ONE = "Case1b_one"
    CASE_2 = "Case2"


@dataclass(frozen=True, slots=True)
class Classification:
    case: DynamicsClass
    ambiguous: bool
    rotation: RotationNumber


@dataclass(frozen=True, slots=True)
class Gap:
    """Gap (left, right) of Λ± opened at x_i = {iρ̂}."""

    index: int
    left: float
    right: float

    @property
    def length(self) -> float:
        return self.right - self.left


class MeasureKind(StrEnum):
    EMPIRICAL = "Empirical"
    PUSHFORWARD = "Pushforward"


@dataclass(frozen=True, slots=True, eq=False)
class MeasureSample:
    points: np.ndarray
    kind: MeasureKind

    def __len__(self) -> int:
        return int(self.points.size)


@dataclass(frozen=True, slots=True)
class PowerGauge:
    alpha: float


@dataclass(frozen=True, slots=True)
class LogInverseGauge:
    """h(t) = 1/|log t|."""


@dataclass(frozen=True, slots=True)
class LogInverseSquaredGauge:
    """h(t) = 1/|log t|²."""


type Gauge = PowerGauge | LogInverseGauge | LogInverseSquaredGauge


def _merge(spans: list[Span]) -> tuple[Span, ...]:
    merged: list[Span] = []
    for left, right in sorted(spans):
        if merged and left <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], right))
        else:
            merged.append((left, right))
    return tuple(merged)


def _image(params: MapParams, span: Span, tau: float | None) -> list[Span]:
    a, b = params.a, params.b
    left, right = span
    if tau is not None and left <= tau <= right:
        level = round(a * tau + b)
        # f₊ on [left, τ], f₋ on [τ, right]
        return [
            (a * left + b - level + 1.0, 1.0),
            (0.0, a * right + b - level),
        ]
    level = math.floor(a * left + b)
    return [(a * left + b - level, a * right + b - level)]


def invariant_intervals(params: MapParams, n: int) -> IntervalUnion:
    """f±ⁿ([0,1]) as at most n+1 closed intervals of total length aⁿ."""

    if n < 0:
        raise ValidationError(f"n must be >= 0 (got {n})")
    tau = discontinuity(params).value
    spans: tuple[Span, ...] = ((0.0, 1.0),)
    for _ in range(n):
        spans = _merge([piece for span in spans for piece in _image(params, span, tau)])
    return IntervalUnion(spans)


def classify(
    params: MapParams,
    *,
    q_max: int = DEFAULT_CONFIG.q_max,
    tol: float = DEFAULT_CONFIG.tol,
) -> Classification:
    """Case 1a/1b (periodic orbit, with or without 0 or 1 on it) or Case 2 (Cantor set)."""

    rotation = rotation_number(params, q_max=q_max, tol=tol)
    if isinstance(rotation, EnclosedRotation):
        return Classification(DynamicsClass.CASE_2, rotation.boundary_ambiguous, rotation)
    case = {
        BoundaryCase.LOWER: DynamicsClass.CASE_1B_ZERO,
        BoundaryCase.UPPER: DynamicsClass.CASE_1B_ONE,
        BoundaryCase.INTERIOR: DynamicsClass.CASE_1A,
    }[rotation.boundary_case]
    return Classification(case, rotation.boundary_uncertain, rotation)


def _require_irrational_regime(rotation: RotationNumber | float, q_max: int) -> float:
    if isinstance(rotation, RationalRotation):
        raise ValidationError(
            f"rotation number {rotation.p}/{rotation.q} is rational; "
            "gaps and the pushforward measure need the irrational regime"
        )
    if isinstance(rotation, EnclosedRotation):
        if simplest_in(rotation.lo, rotation.hi, q_max) is not None:
            raise ValidationError(
                f"enclosure [{rotation.lo}, {rotation.hi}] contains a fraction with q <= {q_max}"
            )
        return rotation.mid
    return float(rotation)


def gaps(
    params: MapParams,
    rotation: RotationNumber | float,
    m: int,
    *,
    q_max: int = DEFAULT_CONFIG.q_max,
    tol: float = DEFAULT_CONFIG.tol,
) -> list[Gap]:
    """The first m gaps (φ_ρ(x_i-), φ_ρ(x_i)) at x_i = {iρ̂}, each of length (1-a)a^{i-1}."""

    if m < 1:
        raise ValidationError(f"m must be >= 1 (got {m})")
    rho_hat = Fraction(_require_irrational_regime(rotation, q_max))
    a, b = params.a, params.b
    found: list[Gap] = []
    for index in range(1, m + 1):
        x = (index * rho_hat) % 1
        left = phi_rho(a, b, rho_hat, x, tol, left=True)
        right = phi_rho(a, b, rho_hat, x, tol)
        found.append(Gap(index=index, left=left.mid, right=right.mid))
    return found


@singledispatch
def gauge_value(gauge: object, t: float) -> float:
    raise TypeError(f"unsupported gauge: {type(gauge).__name__}")


@gauge_value.register
def _power(gauge: PowerGauge, t: float) -> float:
    return t**gauge.alpha


@gauge_value.register
def _log_inverse(gauge: LogInverseGauge, t: float) -> float:
    del gauge
    return 1.0 / abs(math.log(t))


@gauge_value.register
def _log_inverse_squared(gauge: LogInverseSquaredGauge, t: float) -> float:
    del gauge
    return 1.0 / math.log(t) ** 2


def gauge_cover_value(params: MapParams, n: int, gauge: Gauge) -> float:
    """(n+1)·h(aⁿ), the h-weight of the depth-n cover of Λ±."""

    if n < 1:
        raise ValidationError(f"n must be >= 1 (got {n})")
    if params.unit_slope:
        raise ValidationError("gauge covers need a < 1")
    return (n + 1) * gauge_value(gauge, params.a**n)


def empirical_measure(
    params: MapParams,
    x0: float,
    n: int,
    policy: BranchPolicy | None = None,
) -> MeasureSample:
    """First n orbit points x_0..x_{n-1}."""

    if n < 1:
        raise ValidationError(f"n must be >= 1 (got {n})")
    steps = iterate_orbit(params, x0, policy or AlwaysLower())
    points = np.fromiter((step.x for step in islice(steps, n)), dtype=np.float64, count=n)
    return MeasureSample(points=points, kind=MeasureKind.EMPIRICAL)


def pushforward_measure(
    params: MapParams,
    rotation: RotationNumber | float,
    m_points: int,
    *,
    q_max: int = DEFAULT_CONFIG.q_max,
) -> MeasureSample:
    """φ_ρ((k+½)/m) for k < m: the image of Lebesgue measure under φ_ρ."""

    if m_points < 1:
        raise ValidationError(f"m must be >= 1 (got {m_points})")
    rho = _require_irrational_regime(rotation, q_max)
    grid = (np.arange(m_points, dtype=np.float64) + 0.5) / m_points
    values = phi_rho_grid(params.a, params.b, rho, grid)
    return MeasureSample(points=np.clip(values, 0.0, 1.0), kind=MeasureKind.PUSHFORWARD)


def ks_distance(first: MeasureSample, second: MeasureSample) -> float:
    """Two-sample Kolmogorov–Smirnov statistic."""

    return float(stats.ks_2samp(first.points, second.points).statistic)


def sample_mean(sample: MeasureSample) -> float:
    return math.fsum(sample.points.tolist()) / len(sample)


def attractor_distance(orbit: Orbit, periodic: PeriodicOrbitInfo, *, tail: int = 1) -> float:
    """Largest distance from the last `tail` orbit points to the periodic orbit C."""

    if tail < 1:
        raise ValidationError(f"tail must be >= 1 (got {tail})")
    cycle = np.asarray(periodic.points, dtype=np.float64)
    points = np.asarray(orbit.points[-tail:], dtype=np.float64)
    return float(np.max(np.min(np.abs(points[:, None] - cycle[None, :]), axis=1)))

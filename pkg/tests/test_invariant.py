from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from circlemap_elections.core.config import load_calibration
from circlemap_elections.core.errors import ValidationError
from circlemap_elections.dynamics.circle_map import MapParams, orbit, reflect
from circlemap_elections.dynamics.invariant import (
    DynamicsClass,
    LogInverseGauge,
    LogInverseSquaredGauge,
    MeasureKind,
    PowerGauge,
    attractor_distance,
    classify,
    empirical_measure,
    gauge_cover_value,
    gaps,
    invariant_intervals,
    ks_distance,
    pushforward_measure,
    sample_mean,
)
from circlemap_elections.dynamics.rotation import (
    RationalRotation,
    chi,
    periodic_orbit,
    rotation_number,
)
from circlemap_elections.dynamics.series import b_lower

INV_SQRT2 = 1.0 / math.sqrt(2.0)
IRRATIONAL = MapParams(a=0.8, b=b_lower(0.8, INV_SQRT2).mid)
HALF = MapParams(a=0.5, b=b_lower(0.5, INV_SQRT2).mid)


@pytest.mark.parametrize(
    ("b", "expected"),
    [
        (0.70, DynamicsClass.CASE_1A),
        (2.0 / 3.0, DynamicsClass.CASE_1B_ZERO),
        (5.0 / 6.0, DynamicsClass.CASE_1B_ONE),
    ],
)
def test_classify_rational_cases(b: float, expected: DynamicsClass) -> None:
    assert classify(MapParams(a=0.5, b=b)).case is expected


def test_classify_irrational_case() -> None:
    result = classify(IRRATIONAL)

    assert result.case is DynamicsClass.CASE_2
    assert not result.ambiguous


@pytest.mark.parametrize("params", [MapParams(a=0.5, b=0.7), IRRATIONAL, MapParams(a=0.3, b=0.0)])
def test_invariant_intervals_shrink_geometrically(params: MapParams) -> None:
    for n in range(13):
        union = invariant_intervals(params, n)
        assert len(union) <= n + 1
        assert union.total_length == pytest.approx(params.a**n, abs=1e-9)
        for (_, right), (left, _) in zip(union.intervals, union.intervals[1:], strict=False):
            assert right < left


def test_invariant_intervals_contain_the_periodic_orbit() -> None:
    params = MapParams(a=0.5, b=0.7)
    info = periodic_orbit(params)
    assert info is not None

    union = invariant_intervals(params, 30)

    assert all(union.contains(point, slack=1e-9) for point in info.points)


def test_orbits_are_attracted_to_the_periodic_orbit() -> None:
    params = MapParams(a=0.5, b=0.7)
    info = periodic_orbit(params)
    assert info is not None

    result = orbit(params, 0.1, 200)

    assert attractor_distance(result, info, tail=2) <= 1e-9


def test_pushforward_sample_lies_in_the_cantor_set() -> None:
    rotation = rotation_number(IRRATIONAL)
    union = invariant_intervals(IRRATIONAL, 20)
    sample = pushforward_measure(IRRATIONAL, rotation, 200)

    assert sample.kind is MeasureKind.PUSHFORWARD
    assert all(union.contains(float(point), slack=1e-9) for point in sample.points)


def test_gap_lengths_follow_geometric_law() -> None:
    found = gaps(HALF, INV_SQRT2, 10)

    assert [gap.index for gap in found] == list(range(1, 11))
    for gap in found:
        expected = (1.0 - HALF.a) * HALF.a ** (gap.index - 1)
        assert gap.length == pytest.approx(expected, abs=1e-8)
    spans = sorted((gap.left, gap.right) for gap in found)
    for (_, right), (left, _) in zip(spans, spans[1:], strict=False):
        assert right <= left + 1e-12


def test_gaps_avoid_the_invariant_intervals() -> None:
    rotation = rotation_number(IRRATIONAL)
    union = invariant_intervals(IRRATIONAL, 8)

    for gap in gaps(IRRATIONAL, rotation, 8):
        middle = 0.5 * (gap.left + gap.right)
        assert not union.contains(middle)
        assert union.distance(middle) >= 0.5 * gap.length - 1e-9


def test_gaps_and_pushforward_reject_rational_rotation() -> None:
    params = MapParams(a=0.5, b=0.7)
    rotation = rotation_number(params)

    with pytest.raises(ValidationError, match="rational"):
        gaps(params, rotation, 3)
    with pytest.raises(ValidationError, match="rational"):
        pushforward_measure(params, rotation, 10)


def test_gauge_cover_values() -> None:
    params = MapParams(a=0.5, b=0.3)
    log_a = abs(math.log(params.a))

    assert gauge_cover_value(params, 200, LogInverseGauge()) <= 1.01 / log_a
    assert gauge_cover_value(params, 200, LogInverseSquaredGauge()) < 0.05
    assert gauge_cover_value(params, 200, PowerGauge(0.1)) < 1e-3
    with pytest.raises(ValidationError):
        gauge_cover_value(params, 0, LogInverseGauge())


@pytest.mark.parametrize("params", [HALF, IRRATIONAL])
def test_empirical_and_pushforward_measures_agree(params: MapParams) -> None:
    calibration = load_calibration()

    empirical = empirical_measure(params, 0.0, 20_000)
    pushforward = pushforward_measure(params, INV_SQRT2, 20_000)

    assert len(empirical) == len(pushforward) == 20_000
    assert empirical.kind is MeasureKind.EMPIRICAL
    assert ks_distance(empirical, pushforward) <= calibration.ks_max_distance
    center = chi(params, INV_SQRT2)
    assert sample_mean(pushforward) == pytest.approx(center, abs=calibration.pushforward_mean_tol)
    assert sample_mean(empirical) == pytest.approx(center, abs=calibration.pushforward_mean_tol)


def test_empirical_measure_of_a_periodic_orbit_is_atomic() -> None:
    params = MapParams(a=0.5, b=2.0 / 3.0)

    sample = empirical_measure(params, 0.0, 100)

    assert np.unique(np.round(sample.points, 9)).tolist() == pytest.approx([0.0, 2.0 / 3.0])


@settings(max_examples=40, deadline=None)
@given(
    a=st.floats(min_value=0.2, max_value=0.9),
    b=st.floats(min_value=0.0, max_value=0.99),
    n=st.integers(min_value=0, max_value=15),
)
def test_invariant_intervals_are_nested(a: float, b: float, n: int) -> None:
    params = MapParams(a=a, b=b)
    outer = invariant_intervals(params, n)
    inner = invariant_intervals(params, n + 1)

    for left, right in inner.intervals:
        for point in (left, 0.5 * (left + right), right):
            assert outer.contains(point, slack=1e-9)
    assert inner.total_length <= outer.total_length + 1e-12


SWAPPED_CASE = {
    DynamicsClass.CASE_1A: DynamicsClass.CASE_1A,
    DynamicsClass.CASE_1B_ZERO: DynamicsClass.CASE_1B_ONE,
    DynamicsClass.CASE_1B_ONE: DynamicsClass.CASE_1B_ZERO,
    DynamicsClass.CASE_2: DynamicsClass.CASE_2,
}


@pytest.mark.parametrize(
    "params",
    [
        MapParams(a=0.5, b=0.7),
        MapParams(a=0.5, b=2.0 / 3.0),
        MapParams(a=0.5, b=5.0 / 6.0),
        MapParams(a=0.3, b=0.0),
        IRRATIONAL,
    ],
)
def test_reflection_swaps_the_boundary_cases(params: MapParams) -> None:
    original = classify(params)
    mirrored = classify(reflect(params))

    assert mirrored.case is SWAPPED_CASE[original.case]


@settings(max_examples=40, deadline=None)
@given(a=st.floats(min_value=0.2, max_value=0.8), b=st.floats(min_value=0.0, max_value=0.99))
def test_reflection_negates_the_rotation_number(a: float, b: float) -> None:
    params = MapParams(a=a, b=b)
    original = classify(params)
    mirrored = classify(reflect(params))
    assume(not original.ambiguous and not mirrored.ambiguous)
    assume(isinstance(original.rotation, RationalRotation))

    assert mirrored.case is SWAPPED_CASE[original.case]
    assert isinstance(mirrored.rotation, RationalRotation)
    assert mirrored.rotation.value == (1 - original.rotation.value) % 1


@pytest.mark.slow
def test_invariant_intervals_at_full_depth() -> None:
    rng = np.random.default_rng(17)
    for a, b in zip(rng.uniform(0.2, 0.8, 10), rng.uniform(0.0, 0.99, 10), strict=True):
        params = MapParams(a=float(a), b=float(b))
        for n in range(31):
            union = invariant_intervals(params, n)
            assert len(union) <= n + 1
            assert union.total_length == pytest.approx(params.a**n, abs=1e-9)
        log_a = abs(math.log(params.a))
        assert gauge_cover_value(params, 200, LogInverseGauge()) <= 1.01 / log_a

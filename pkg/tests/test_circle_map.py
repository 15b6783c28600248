from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError as PydanticValidationError

from circlemap_elections.core.errors import BranchScriptExhaustedError, ValidationError
from circlemap_elections.dynamics.circle_map import (
    AlwaysLower,
    AlwaysUpper,
    MapParams,
    Scripted,
    SeededRandom,
    admissible_symbols,
    discontinuity,
    inverse,
    lift_lower,
    lift_orbit,
    lift_upper,
    orbit,
    reflect,
    step_lower,
    step_upper,
)


def test_map_params_reject_out_of_range_values() -> None:
    with pytest.raises(PydanticValidationError):
        MapParams(a=1.0, b=0.5)
    with pytest.raises(PydanticValidationError):
        MapParams(a=0.0, b=0.5)
    with pytest.raises(PydanticValidationError):
        MapParams(a=0.5, b=1.0)
    with pytest.raises(PydanticValidationError):
        MapParams(a=math.nan, b=0.5)

    unit = MapParams(a=1.0, b=0.25, allow_unit_slope=True)
    assert unit.unit_slope


def test_discontinuity_location() -> None:
    tau = discontinuity(MapParams(a=0.5, b=0.7))
    assert tau.exists
    assert tau.value == pytest.approx(0.6)

    assert not discontinuity(MapParams(a=0.5, b=0.3)).exists
    at_zero = discontinuity(MapParams(a=0.5, b=0.0))
    assert at_zero.exists
    assert at_zero.value == 0.0


def test_branches_split_only_at_tau() -> None:
    params = MapParams(a=0.5, b=0.7)

    assert step_lower(params, 0.6) == 0.0
    assert step_upper(params, 0.6) == 1.0
    assert step_lower(params, 0.2) == pytest.approx(0.8)
    assert step_upper(params, 0.2) == pytest.approx(0.8)
    assert step_lower(params, 0.9) == pytest.approx(0.15)


def test_lifts_commute_with_integer_shifts() -> None:
    params = MapParams(a=0.37, b=0.81)
    for x in (0.0, 0.25, 0.5, 0.99):
        assert lift_lower(params, x + 3) == pytest.approx(lift_lower(params, x) + 3)
        assert lift_upper(params, x + 0.5 + 2) == pytest.approx(
            lift_upper(params, x + 0.5) + 2
        )
    # F₊ is the left limit of F₋ at integers
    assert lift_upper(params, 1.0) == pytest.approx(params.a + params.b)
    assert lift_lower(params, 1.0) == pytest.approx(1.0 + params.b)


def test_orbit_through_tau_records_branch_choices() -> None:
    params = MapParams(a=0.5, b=2.0 / 3.0)

    result = orbit(params, 0.0, 6)

    assert result.points == pytest.approx((0.0, 2 / 3, 0.0, 2 / 3, 0.0, 2 / 3, 0.0))
    assert result.symbols == (0, 1, 0, 1, 0, 1)
    assert result.choices_at_tau == ((1, "lower"), (3, "lower"), (5, "lower"))


def test_upper_branch_leaves_the_lower_cycle() -> None:
    params = MapParams(a=0.5, b=2.0 / 3.0)

    result = orbit(params, 2.0 / 3.0, 2, AlwaysUpper())

    assert result.points[1] == 1.0
    assert result.points[2] == pytest.approx(1.0 / 6.0)
    assert result.symbols == (0, 1)


def test_scripted_policy_raises_when_exhausted() -> None:
    params = MapParams(a=0.5, b=2.0 / 3.0)

    with pytest.raises(BranchScriptExhaustedError, match="exhausted"):
        orbit(params, 0.0, 10, Scripted(("lower",)))


def test_seeded_random_policy_is_reproducible() -> None:
    params = MapParams(a=0.5, b=2.0 / 3.0)

    first = orbit(params, 0.0, 40, SeededRandom(7))
    second = orbit(params, 0.0, 40, SeededRandom(7))

    assert first == second
    assert {branch for _, branch in first.choices_at_tau} <= {"lower", "upper"}


def test_orbit_rejects_bad_arguments() -> None:
    params = MapParams(a=0.5, b=0.3)
    with pytest.raises(ValidationError):
        orbit(params, 1.5, 3)
    with pytest.raises(ValidationError):
        orbit(params, 0.5, -1)


def test_lift_orbit_matches_iterated_lift() -> None:
    params = MapParams(a=0.6, b=0.35)
    x = 0.0
    for _ in range(50):
        x = lift_lower(params, x)

    assert lift_orbit(params, 0.0, 50) == pytest.approx(x, abs=1e-9)


def test_inverse_undoes_the_map() -> None:
    params = MapParams(a=0.7, b=0.6)
    for x in (0.05, 0.3, 0.55, 0.8, 0.95):
        preimage = inverse(params, step_lower(params, x))
        assert preimage == pytest.approx(x)
    assert inverse(params, 0.45) is None
    with pytest.raises(ValidationError):
        inverse(MapParams(a=0.3, b=0.2), 0.5)


def test_reflection_maps_offset_to_fractional_negation() -> None:
    reflected = reflect(MapParams(a=0.5, b=0.3))
    assert reflected.a == 0.5
    assert reflected.b == pytest.approx(0.2)


@settings(max_examples=80, deadline=None)
@given(
    a=st.floats(min_value=0.05, max_value=0.95),
    b=st.floats(min_value=0.0, max_value=0.95),
    x0=st.floats(min_value=0.0, max_value=1.0),
    upper=st.booleans(),
)
def test_orbit_stays_in_unit_interval_with_admissible_symbols(
    a: float, b: float, x0: float, upper: bool
) -> None:
    params = MapParams(a=a, b=b)
    policy = AlwaysUpper() if upper else AlwaysLower()

    result = orbit(params, x0, 200, policy)

    assert all(0.0 <= point <= 1.0 for point in result.points)
    assert set(result.symbols) <= admissible_symbols(params)
    for x, x_next, symbol in zip(result.points, result.points[1:], result.symbols, strict=False):
        assert a * x + b - x_next == pytest.approx(symbol, abs=1e-9)

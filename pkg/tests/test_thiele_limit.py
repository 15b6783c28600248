from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circlemap_elections.core.config import load_calibration
from circlemap_elections.core.errors import ValidationError
from circlemap_elections.elections.engine import Method, party_counts, run
from circlemap_elections.elections.profile import BallotProfile, parse_compact_votes
from circlemap_elections.elections.simplex import SimplexPoint, project_to_simplex
from circlemap_elections.elections.thiele_limit import (
    FlatDirections,
    Unique,
    block_decompose,
    compare_with_simulation,
    compose_blocks,
    directional_derivatives,
    gradient,
    objective,
    objective_dominance,
    pairs_only_limit,
    solve_limit,
)

FIVE_VOTES = parse_compact_votes("1A, 1B, 1C, 1AB, 1AC")
EXCLUDED_C = parse_compact_votes("2A, 2B, 1AC, 1BC")


def test_five_vote_limit_is_inverse_root_five() -> None:
    result = solve_limit(FIVE_VOTES)
    x_a = 1.0 / math.sqrt(5.0)

    assert result.point.x == pytest.approx((x_a, (1 - x_a) / 2, (1 - x_a) / 2), abs=1e-9)
    assert result.support == (0, 1, 2)
    assert isinstance(result.uniqueness, Unique)
    assert result.residual <= 1e-8


def test_nine_vote_limit() -> None:
    result = solve_limit(parse_compact_votes("1A, 2B, 3C, 1AB, 1AC, 1BC"))

    assert result.point.x == pytest.approx((0.1797714258, 0.341215728, 0.4790128462), abs=1e-6)


def test_limit_with_a_party_left_out() -> None:
    result = solve_limit(EXCLUDED_C)

    assert result.point.x == pytest.approx((0.5, 0.5, 0.0), abs=1e-9)
    assert result.support == (0, 1)
    derivatives = directional_derivatives(EXCLUDED_C, result.point)
    assert derivatives[2] < 0.0
    assert derivatives[:2] == pytest.approx([0.0, 0.0], abs=1e-8)

    seats = run(Method.THIELE, EXCLUDED_C, 10_000, record_scores=False)
    assert party_counts(seats)[2] == 0
    comparison = compare_with_simulation(EXCLUDED_C, 1000, limit=result)
    assert comparison.distance <= 1e-9


def test_flat_directions_for_bundled_parties() -> None:
    profile = parse_compact_votes("1A, 1BC")

    result = solve_limit(profile)

    assert result.point.x[0] == pytest.approx(0.5, abs=1e-9)
    assert isinstance(result.uniqueness, FlatDirections)
    (direction,) = result.uniqueness.basis
    assert direction[0] == pytest.approx(0.0, abs=1e-12)
    assert direction[1] == pytest.approx(-direction[2])
    comparison = compare_with_simulation(profile, 100, limit=result)
    assert comparison.distance <= 1e-9


def test_simulation_approaches_the_limit() -> None:
    comparison = compare_with_simulation(FIVE_VOTES, 10_000)

    assert comparison.distance <= load_calibration().thiele_simulation_distance
    assert sum(comparison.shares.x) == pytest.approx(1.0)


def test_pairs_only_closed_form_matches_solver() -> None:
    rng = np.random.default_rng(2)
    for _ in range(20):
        ab, ac, bc = (float(value) for value in rng.uniform(1.0, 2.0, size=3))
        profile = BallotProfile.from_weights(["A", "B", "C"], {"AB": ab, "AC": ac, "BC": bc})
        expected = pairs_only_limit(profile)
        assert solve_limit(profile).point.x == pytest.approx(expected.x, abs=1e-9)

    dominant = BallotProfile.from_weights(["A", "B", "C"], {"AB": 3.0, "AC": 1.0, "BC": 1.0})
    assert pairs_only_limit(dominant).x == pytest.approx((0.5, 0.5, 0.0))
    assert solve_limit(dominant).point.x == pytest.approx((0.5, 0.5, 0.0), abs=1e-8)
    with pytest.raises(ValidationError):
        pairs_only_limit(FIVE_VOTES)


def test_block_solutions_compose() -> None:
    rng = np.random.default_rng(9)
    for _ in range(10):
        weights = rng.uniform(0.1, 1.0, size=6)
        profile = BallotProfile.from_weights(
            ["A", "B", "C", "D"],
            dict(zip(["A", "B", "AB", "C", "D", "CD"], weights.tolist(), strict=True)),
        )
        blocks = block_decompose(profile)

        assert [block.parties for block in blocks] == [(0, 1), (2, 3)]
        assert sum(block.weight for block in blocks) == pytest.approx(1.0)
        composed = compose_blocks(blocks, profile.num_parties)
        assert composed.x == pytest.approx(solve_limit(profile).point.x, abs=1e-9)


def test_limit_dominates_random_points() -> None:
    for profile in (FIVE_VOTES, EXCLUDED_C, parse_compact_votes("3A, 1B, 2AB, 1BC, 2C")):
        point = solve_limit(profile).point
        assert objective_dominance(profile, point, samples=1000, seed=4) <= 1e-9


def test_objective_and_gradient_at_the_boundary() -> None:
    vertex = SimplexPoint((1.0, 0.0, 0.0))

    assert objective(FIVE_VOTES, vertex) == -math.inf
    assert gradient(FIVE_VOTES, vertex)[1] == math.inf
    assert objective(FIVE_VOTES, SimplexPoint.barycenter(3)) == pytest.approx(
        3 * math.log(1 / 3) + 2 * math.log(2 / 3)
    )
    with pytest.raises(ValidationError, match="coordinates"):
        objective(FIVE_VOTES, SimplexPoint((0.5, 0.5)))


def test_simplex_projection() -> None:
    projected = project_to_simplex(np.array([0.9, 0.8, -0.5]))

    assert projected == pytest.approx([0.55, 0.45, 0.0])
    with pytest.raises(ValidationError):
        SimplexPoint((0.7, 0.7))
    with pytest.raises(ValidationError):
        SimplexPoint.from_array([0.0, 0.0])


def _full_profile(seed: int, parties: int = 3) -> BallotProfile:
    rng = np.random.default_rng(seed)
    names = [chr(ord("A") + index) for index in range(parties)]
    weights: dict[tuple[str, ...] | frozenset[str] | str, float] = {}
    for mask in range(1, 1 << parties):
        members = tuple(name for index, name in enumerate(names) if mask >> index & 1)
        weights[members] = float(rng.uniform(0.1, 2.0))
    return BallotProfile.from_weights(names, weights)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000), parties=st.integers(2, 4))
def test_gradient_matches_finite_differences(seed: int, parties: int) -> None:
    profile = _full_profile(seed, parties)
    x = np.random.default_rng(seed + 1).dirichlet(np.ones(parties)) * 0.9 + 0.1 / parties
    point = SimplexPoint.from_array(x)
    grad = gradient(profile, point)
    h = 1e-6

    for i in range(1, parties):
        step = np.zeros(parties)
        step[i], step[0] = h, -h
        forward = objective(profile, SimplexPoint.from_array(point.as_array() + step))
        backward = objective(profile, SimplexPoint.from_array(point.as_array() - step))
        difference = (forward - backward) / (2 * h)
        assert difference == pytest.approx(grad[i] - grad[0], rel=1e-5, abs=1e-7)

    derivatives = directional_derivatives(profile, point)
    scale = float(np.max(np.abs(grad)))
    assert math.fsum((point.as_array() * derivatives).tolist()) == pytest.approx(
        0.0, abs=1e-9 * scale
    )
    assert derivatives == pytest.approx(grad - profile.total_weight, rel=1e-9, abs=1e-9)


def test_directional_derivatives_vanish_at_the_limit() -> None:
    for profile in (FIVE_VOTES, parse_compact_votes("1A, 2B, 3C, 1AB, 1AC, 1BC")):
        point = solve_limit(profile).point
        assert directional_derivatives(profile, point) == pytest.approx([0.0] * 3, abs=1e-8)


@settings(max_examples=15, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=10_000),
    factor=st.floats(min_value=1e-2, max_value=1e2),
)
def test_limit_ignores_the_vote_scale(seed: int, factor: float) -> None:
    profile = _full_profile(seed)

    plain = solve_limit(profile)
    scaled = solve_limit(profile.scaled(factor))

    assert isinstance(plain.uniqueness, Unique)
    assert scaled.point.x == pytest.approx(plain.point.x, abs=1e-10)


def test_isolated_party_gets_its_vote_share() -> None:
    profile = BallotProfile.from_weights(["A", "B", "C"], {"A": 1.0, "B": 2.0, "AB": 1.5, "C": 1.5})

    result = solve_limit(profile)

    assert result.point.x[2] == pytest.approx(1.5 / profile.total_weight, abs=1e-9)
    blocks = block_decompose(profile)
    assert [block.parties for block in blocks] == [(0, 1), (2,)]
    assert compose_blocks(blocks, 3).x == pytest.approx(result.point.x, abs=1e-9)

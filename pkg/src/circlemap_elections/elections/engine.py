"""Sequential seat allocation: party versions of Phragmén's and Thiele's methods."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from enum import StrEnum
from functools import singledispatch

import numpy as np

from circlemap_elections.core.config import DEFAULT_CONFIG
from circlemap_elections.core.errors import BranchScriptExhaustedError, ValidationError
from circlemap_elections.elections.profile import BallotProfile
from circlemap_elections.elections.simplex import SimplexPoint

logger = logging.getLogger(__name__)


class Method(StrEnum):
    PHRAGMEN = "phragmen"
    PHRAGMEN_REDUCED = "phragmen-reduced"
    THIELE = "thiele"


@dataclass(frozen=True, slots=True)
class LowestIndex:
    """Ties go to the party listed first."""


@dataclass(frozen=True, slots=True)
class SeededLot:
    """Ties drawn uniformly at random, reproducible from the seed."""

    seed: int


@dataclass(frozen=True, slots=True)
class ScriptedTies:
    """One listed party index per tie, in order; each must be among the tied parties."""

    choices: tuple[int, ...]


type TieBreak = LowestIndex | SeededLot | ScriptedTies
type TieResolver = Callable[[Sequence[int], int], int]


@dataclass(frozen=True, slots=True)
class PowerState:
    """Free voting power x_σ per ballot (in profile order), seats per party, elapsed time t."""

    free_power: tuple[float, ...]
    seats: tuple[int, ...]
    time: float = 0.0

    @classmethod
    def initial(cls, profile: BallotProfile) -> PowerState:
        return cls((0.0,) * len(profile.ballots), (0,) * profile.num_parties)


@dataclass(frozen=True, slots=True)
class ReducedState:
    """Place numbers q_σ per ballot; Σ q_σ equals the seats allocated so far."""

    place_numbers: tuple[float, ...]
    seats: tuple[int, ...]

    @classmethod
    def initial(cls, profile: BallotProfile) -> ReducedState:
        return cls((0.0,) * len(profile.ballots), (0,) * profile.num_parties)


@dataclass(frozen=True, slots=True)
class ThieleState:
    """n_σ per ballot: seats won so far by the parties of σ, counted with repetition."""

    counts: tuple[int, ...]
    seats: tuple[int, ...]

    @classmethod
    def initial(cls, profile: BallotProfile) -> ThieleState:
        return cls((0,) * len(profile.ballots), (0,) * profile.num_parties)


type EngineState = PowerState | ReducedState | ThieleState


@dataclass(frozen=True, slots=True)
class StepResult[TState]:
    winner: int
    state: TState
    scores: tuple[float, ...]
    tie: bool
    time: float | None


@dataclass(frozen=True, slots=True)
class SeatSequence:
    """Winners in seat order with the score vector seen at each step.

    `times` holds the cumulative voting power t spent when each seat was filled
    (Phragmén methods only).
    """

    method: Method
    parties: tuple[str, ...]
    winners: tuple[int, ...]
    per_step_scores: tuple[tuple[float, ...], ...]
    tie_flags: tuple[bool, ...]
    times: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        size = len(self.winners)
        scored = len(self.per_step_scores)
        if len(self.tie_flags) != size or scored not in (0, size):
            raise ValidationError("seat sequence fields have inconsistent lengths")

    def __len__(self) -> int:
        return len(self.winners)

    @property
    def any_tie(self) -> bool:
        return any(self.tie_flags)

    def names(self) -> str:
        return "".join(self.parties[winner] for winner in self.winners)


@singledispatch
def tie_resolver(tiebreak: object, num_parties: int) -> TieResolver:
    """Build a stateful resolver for one run."""

    raise TypeError(f"unsupported tie-break: {type(tiebreak).__name__}")


@tie_resolver.register
def _lowest(tiebreak: LowestIndex, num_parties: int) -> TieResolver:
    del tiebreak, num_parties
    return _lowest_resolver


@tie_resolver.register
def _lot(tiebreak: SeededLot, num_parties: int) -> TieResolver:
    del num_parties
    rng = np.random.default_rng(tiebreak.seed)
    return lambda tied, step: int(tied[int(rng.integers(len(tied)))])


@tie_resolver.register
def _scripted(tiebreak: ScriptedTies, num_parties: int) -> TieResolver:
    for choice in tiebreak.choices:
        if not 0 <= choice < num_parties:
            raise ValidationError(f"tie script names party index {choice} out of range")
    remaining = iter(tiebreak.choices)

    def resolve(tied: Sequence[int], step: int) -> int:
        try:
            choice = next(remaining)
        except StopIteration:
            raise BranchScriptExhaustedError(
                f"tie script exhausted at seat {step + 1} "
                f"({len(tiebreak.choices)} choice(s) given)"
            ) from None
        if choice not in tied:
            raise ValidationError(
                f"tie script chose party index {choice} at seat {step + 1}, "
                f"but the tied parties are {list(tied)}"
            )
        return choice

    return resolve


def _select(
    scores: Sequence[float],
    *,
    maximize: bool,
    tie_tol: float,
    resolve: TieResolver,
    step: int,
) -> tuple[int, bool]:
    best = max(scores) if maximize else min(scores)
    slack = tie_tol * abs(best)
    tied = [party for party, score in enumerate(scores) if abs(score - best) <= slack]
    if len(tied) == 1:
        return tied[0], False
    winner = resolve(tied, step)
    logger.debug("tie between parties %s at seat %d resolved to %d", tied, step + 1, winner)
    return winner, True


def _lowest_resolver(tied: Sequence[int], step: int) -> int:
    del step
    return min(tied)


def _add_seat(seats: tuple[int, ...], winner: int) -> tuple[int, ...]:
    return tuple(count + 1 if party == winner else count for party, count in enumerate(seats))


def phragmen_loads(profile: BallotProfile, state: PowerState) -> list[float]:
    """V_i = Σ_{σ∋i} v_σ x_σ."""

    ballots = profile.ballots
    return [
        math.fsum(ballots[position].weight * state.free_power[position] for position in members)
        for members in profile.supporters
    ]


def phragmen_step_power(
    profile: BallotProfile,
    state: PowerState,
    resolve: TieResolver = _lowest_resolver,
    *,
    step: int = 0,
    tie_tol: float = DEFAULT_CONFIG.tie_tol,
    state_tol: float = DEFAULT_CONFIG.state_tol,
) -> StepResult[PowerState]:
    """Elect the party whose supporters first reach one seat's worth of power.

    Δ_i = (1 - V_i)/W̄_i; the winner's ballots are emptied, all others gain Δ*.
    """

    loads = phragmen_loads(profile, state)
    worst = max(loads)
    if worst > 1.0 + state_tol:
        raise ValidationError(f"state left the load cube: a party load is {worst!r} > 1")
    scores = tuple(
        max(1.0 - load, 0.0) / weight
        for load, weight in zip(loads, profile.party_weights, strict=True)
    )
    winner, tie = _select(scores, maximize=False, tie_tol=tie_tol, resolve=resolve, step=step)
    delta = scores[winner]
    power = tuple(
        0.0 if winner in ballot else state.free_power[position] + delta
        for position, ballot in enumerate(profile.ballots)
    )
    time = state.time + delta
    next_state = PowerState(power, _add_seat(state.seats, winner), time)
    return StepResult(winner, next_state, scores, tie, time)


def phragmen_step_reduced(
    profile: BallotProfile,
    state: ReducedState,
    resolve: TieResolver = _lowest_resolver,
    *,
    step: int = 0,
    tie_tol: float = DEFAULT_CONFIG.tie_tol,
) -> StepResult[ReducedState]:
    """W_i = Σ_{σ∋i} v_σ / (1 + Σ_{σ∋i} q_σ); the winner's ballots get q_σ = v_σ/W_winner."""

    ballots = profile.ballots
    scores = tuple(
        math.fsum(ballots[position].weight for position in members)
        / (1.0 + math.fsum(state.place_numbers[position] for position in members))
        for members in profile.supporters
    )
    winner, tie = _select(scores, maximize=True, tie_tol=tie_tol, resolve=resolve, step=step)
    reduced = scores[winner]
    places = tuple(
        ballot.weight / reduced if winner in ballot else state.place_numbers[position]
        for position, ballot in enumerate(ballots)
    )
    next_state = ReducedState(places, _add_seat(state.seats, winner))
    return StepResult(winner, next_state, scores, tie, 1.0 / reduced)


def thiele_step(
    profile: BallotProfile,
    state: ThieleState,
    resolve: TieResolver = _lowest_resolver,
    *,
    step: int = 0,
    tie_tol: float = DEFAULT_CONFIG.tie_tol,
) -> StepResult[ThieleState]:
    """W_i = Σ_{σ∋i} v_σ/(1+n_σ); the winner adds one to n_σ for each σ ∋ winner."""

    ballots = profile.ballots
    scores = tuple(
        math.fsum(ballots[position].weight / (1 + state.counts[position]) for position in members)
        for members in profile.supporters
    )
    winner, tie = _select(scores, maximize=True, tie_tol=tie_tol, resolve=resolve, step=step)
    counts = tuple(
        count + 1 if winner in ballot else count
        for count, ballot in zip(state.counts, ballots, strict=True)
    )
    next_state = ThieleState(counts, _add_seat(state.seats, winner))
    return StepResult(winner, next_state, scores, tie, None)


def run(
    method: Method,
    profile: BallotProfile,
    n_seats: int,
    tiebreak: TieBreak | None = None,
    *,
    tie_tol: float = DEFAULT_CONFIG.tie_tol,
    state_tol: float = DEFAULT_CONFIG.state_tol,
    record_scores: bool = True,
) -> SeatSequence:
    """Fill n_seats seats one at a time."""

    if n_seats < 1:
        raise ValidationError(f"seats must be >= 1 (got {n_seats})")
    resolve = tie_resolver(tiebreak or LowestIndex(), profile.num_parties)
    winners: list[int] = []
    scores: list[tuple[float, ...]] = []
    ties: list[bool] = []
    times: list[float] = []
    result: StepResult[PowerState] | StepResult[ReducedState] | StepResult[ThieleState]
    state: EngineState
    match method:
        case Method.PHRAGMEN:
            state = PowerState.initial(profile)
        case Method.PHRAGMEN_REDUCED:
            state = ReducedState.initial(profile)
        case Method.THIELE:
            state = ThieleState.initial(profile)
    for step in range(n_seats):
        if isinstance(state, PowerState):
            result = phragmen_step_power(
                profile, state, resolve, step=step, tie_tol=tie_tol, state_tol=state_tol
            )
        elif isinstance(state, ReducedState):
            result = phragmen_step_reduced(profile, state, resolve, step=step, tie_tol=tie_tol)
        else:
            result = thiele_step(profile, state, resolve, step=step, tie_tol=tie_tol)
        state = result.state
        winners.append(result.winner)
        ties.append(result.tie)
        if record_scores:
            scores.append(result.scores)
        if result.time is not None:
            times.append(result.time)
    logger.info(
        "%s: %d seats, %d tie(s), seats per party %s",
        method.value,
        n_seats,
        sum(ties),
        dict(zip(profile.parties, state.seats, strict=True)),
    )
    return SeatSequence(
        method=method,
        parties=profile.parties,
        winners=tuple(winners),
        per_step_scores=tuple(scores),
        tie_flags=tuple(ties),
        times=tuple(times) if method is not Method.THIELE else None,
    )


def party_counts(sequence: SeatSequence, n: int | None = None) -> tuple[int, ...]:
    """Seats per party among the first n winners."""

    limit = len(sequence) if n is None else n
    if not 0 <= limit <= len(sequence):
        raise ValidationError(f"prefix {limit} outside 0..{len(sequence)}")
    counts = np.bincount(
        np.asarray(sequence.winners[:limit], dtype=np.int64), minlength=len(sequence.parties)
    )
    return tuple(int(count) for count in counts)


def seat_shares(sequence: SeatSequence, n: int | None = None) -> SimplexPoint:
    """p_i = n_i/n at prefix n."""

    counts = party_counts(sequence, n)
    total = sum(counts)
    if total == 0:
        raise ValidationError("seat shares need at least one seat")
    return SimplexPoint(tuple(count / total for count in counts))


def eventual_period(
    winners: Sequence[int],
    max_period: int,
    *,
    min_cycles: int = 3,
) -> tuple[int, int] | None:
    """Smallest (preperiod, period) with winners[i] == winners[i+period] from preperiod on.

    The periodic tail must span at least `min_cycles` periods and half the sequence.
    """

    if max_period < 1:
        raise ValidationError(f"max-period must be >= 1 (got {max_period})")
    sequence = np.asarray(winners, dtype=np.int64)
    for period in range(1, min(max_period, sequence.size // min_cycles) + 1):
        mismatches = np.nonzero(sequence[:-period] != sequence[period:])[0]
        start = int(mismatches[-1]) + 1 if mismatches.size else 0
        if sequence.size - start >= max(min_cycles * period, sequence.size // 2):
            return start, period
    return None

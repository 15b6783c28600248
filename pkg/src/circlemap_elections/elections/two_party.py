"""Two-party Phragmén as the circle map f±: parameters, seat prediction and pB regions.

With vote shares α (A only), β (B only) and γ (AB), α > β > 0, the election outputs
A^ℓ with ℓ = ⌊α/β⌋ and then B A^{1+b0+ε} for every symbol ε of the f± orbit of w0 = {α/β},
where a = αβ/((1-α)(1-β)), b̃ = (α-β)/β + α(1-α-β)/((1-α)(1-β)), b0 = ⌊b̃⌋ and b = {b̃}.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import StrEnum
from fractions import Fraction
from typing import Literal

from circlemap_elections.core.config import DEFAULT_CONFIG
from circlemap_elections.core.errors import (
    CircleMapError,
    IndeterminateOutcomeError,
    ValidationError,
)
from circlemap_elections.dynamics.circle_map import (
    AlwaysLower,
    BranchPolicy,
    MapParams,
    branch_chooser,
    iterate_orbit,
)
from circlemap_elections.dynamics.rotation import (
    RationalRotation,
    RotationNumber,
    rotation_number,
)
from circlemap_elections.dynamics.series import Enclosure, b_lower, b_upper
from circlemap_elections.elections.engine import Method, SeatSequence
from circlemap_elections.elections.profile import BallotProfile

logger = logging.getLogger(__name__)

SHARE_TOLERANCE = 1e-12

type Party = Literal["A", "B"]


@dataclass(frozen=True, slots=True)
class TwoPartyVotes:
    """Vote shares for A, B and AB; they sum to 1."""

    alpha: float
    beta: float
    gamma_ab: float

    def __post_init__(self) -> None:
        shares = (self.alpha, self.beta, self.gamma_ab)
        if any(not math.isfinite(share) or share < 0.0 for share in shares):
            raise ValidationError(f"vote shares must be finite and >= 0 (got {shares})")
        total = math.fsum(shares)
        if abs(total - 1.0) > SHARE_TOLERANCE:
            raise ValidationError(f"vote shares must sum to 1 (got {total!r})")

    @classmethod
    def from_shares(cls, alpha: float, beta: float) -> TwoPartyVotes:
        """γ = 1 - α - β; rounding noise around 0 is set to 0."""

        gamma = 1.0 - alpha - beta
        if abs(gamma) <= SHARE_TOLERANCE:
            gamma = 0.0
        return cls(alpha, beta, gamma)

    @classmethod
    def from_profile(cls, profile: BallotProfile) -> TwoPartyVotes:
        if profile.num_parties != 2:
            raise ValidationError(
                f"two-party analysis needs exactly 2 parties (got {profile.num_parties})"
            )
        total = profile.total_weight
        return cls(
            alpha=_weight_of_mask(profile, 0b01) / total,
            beta=_weight_of_mask(profile, 0b10) / total,
            gamma_ab=_weight_of_mask(profile, 0b11) / total,
        )

    def swapped(self) -> TwoPartyVotes:
        return TwoPartyVotes(self.beta, self.alpha, self.gamma_ab)

    def to_profile(self, parties: tuple[str, str] = ("A", "B")) -> BallotProfile:
        first, second = parties
        return BallotProfile.from_weights(
            parties,
            {
                (first,): self.alpha,
                (second,): self.beta,
                (first, second): self.gamma_ab,
            },
        )


def _weight_of_mask(profile: BallotProfile, mask: int) -> float:
    return next((ballot.weight for ballot in profile.ballots if ballot.mask == mask), 0.0)


@dataclass(frozen=True, slots=True)
class ReducedMap:
    """Circle-map parameters of a two-party election with α > β > 0."""

    a: float
    b_raw: float
    b: float
    b0: int
    w0: float
    ell: int
    start_choice: bool = False

    @property
    def params(self) -> MapParams:
        return MapParams(a=self.a, b=self.b, allow_unit_slope=True)


class RhoKind(StrEnum):
    RATIONAL = "rational"
    ENCLOSURE = "enclosure"
    TRIVIAL = "trivial"
    INDETERMINATE = "indeterminate"
    UNRESOLVED = "unresolved"


@dataclass(frozen=True, slots=True)
class Prediction:
    """Limit share pB = lim n_B/n; `rho` and `b0` are None in the trivial cases."""

    p_b: float | Enclosure
    rho: RotationNumber | None = None
    b0: int | None = None
    reduced: ReducedMap | None = None
    swapped: bool = False

    @property
    def bounds(self) -> tuple[float, float]:
        if isinstance(self.p_b, Enclosure):
            return self.p_b.lo, self.p_b.hi
        return self.p_b, self.p_b

    @property
    def rho_kind(self) -> RhoKind:
        if self.rho is None:
            return RhoKind.TRIVIAL
        if isinstance(self.rho, RationalRotation):
            return RhoKind.RATIONAL
        return RhoKind.ENCLOSURE


@dataclass(frozen=True, slots=True)
class StaircaseRow:
    alpha: float
    beta: float
    p_b_lo: float
    p_b_hi: float
    rho_kind: RhoKind
    q: int | None


def derive_map(
    votes: TwoPartyVotes, *, tau_eps: float = DEFAULT_CONFIG.tau_eps
) -> ReducedMap:
    """Exact derivation from the float shares, rounded once at the end.

    `start_choice` marks an integer α/β: the ℓ-th A seat is then tied with B.
    """

    if not votes.alpha > votes.beta > 0.0:
        raise ValidationError(
            f"derive_map needs alpha > beta > 0 (got alpha={votes.alpha}, beta={votes.beta}); "
            "swap the parties or use predicted_pB for the special cases"
        )
    alpha, beta, gamma = (Fraction(share) for share in (votes.alpha, votes.beta, votes.gamma_ab))
    # 1 - α = β + γ and 1 - β = α + γ; γ = 0 then gives a = 1 exactly
    slope = alpha * beta / ((beta + gamma) * (alpha + gamma))
    b_raw = (alpha - beta) / beta + alpha * gamma / ((beta + gamma) * (alpha + gamma))
    b0 = math.floor(b_raw)
    ratio = alpha / beta
    ell = math.floor(ratio)
    w0 = ratio - ell
    nearest = round(ratio)
    start_choice = abs(float(ratio) - nearest) <= tau_eps * float(ratio)
    if start_choice:
        ell, w0 = nearest, Fraction(0)
    reduced = ReducedMap(
        a=float(slope),
        b_raw=float(b_raw),
        b=min(float(b_raw - b0), math.nextafter(1.0, 0.0)),
        b0=b0,
        w0=float(w0),
        ell=ell,
        start_choice=start_choice,
    )
    identity = float(alpha / (beta * (alpha + gamma)) - 1)
    if abs(reduced.a + reduced.b_raw - identity) > 1e-12 * max(1.0, abs(identity)):
        raise ValidationError(
            f"a + b_raw = {reduced.a + reduced.b_raw!r} disagrees with "
            f"alpha/(beta(1-beta)) - 1 = {identity!r}"
        )
    logger.debug("two-party map for %s: %s", votes, reduced)
    return reduced


def predicted_pB(
    votes: TwoPartyVotes,
    *,
    q_max: int = DEFAULT_CONFIG.q_max,
    tol: float = DEFAULT_CONFIG.tol,
) -> Prediction:
    """pB = 1/(2 + b0 + ρ), or 1 - pA of the swapped election when β > α."""

    alpha, beta = votes.alpha, votes.beta
    if alpha == 0.0 and beta == 0.0:
        raise IndeterminateOutcomeError(
            "every vote is for AB: every seat is a tie and the outcome depends on tie-breaking"
        )
    if beta > alpha:
        mirrored = predicted_pB(votes.swapped(), q_max=q_max, tol=tol)
        low, high = mirrored.bounds
        p_b: float | Enclosure = (
            Enclosure(1.0 - high, 1.0 - low) if isinstance(mirrored.p_b, Enclosure) else 1.0 - low
        )
        return Prediction(p_b, mirrored.rho, mirrored.b0, mirrored.reduced, swapped=True)
    if beta == 0.0:
        return Prediction(0.0)
    if alpha == beta:
        return Prediction(0.5)

    reduced = derive_map(votes)
    rho = rotation_number(reduced.params, q_max=q_max, tol=tol)
    if votes.gamma_ab == 0.0:
        return Prediction(beta, rho, reduced.b0, reduced)
    if isinstance(rho, RationalRotation):
        value = float(1 / (2 + reduced.b0 + rho.value))
        return Prediction(value, rho, reduced.b0, reduced)
    p_b = Enclosure(
        math.nextafter(1.0 / (2 + reduced.b0 + rho.hi), -math.inf),
        math.nextafter(1.0 / (2 + reduced.b0 + rho.lo), math.inf),
    )
    return Prediction(p_b, rho, reduced.b0, reduced)


def predicted_seats(
    votes: TwoPartyVotes,
    n_seats: int,
    policy: BranchPolicy | None = None,
    *,
    parties: tuple[str, str] = ("A", "B"),
    tau_eps: float = DEFAULT_CONFIG.tau_eps,
) -> SeatSequence:
    """Seat sequence generated from the f± orbit by 0 → B A^{b0+1}, 1 → B A^{b0+2}.

    With β > α the roles of the parties are exchanged. At every tie the policy decides:
    `lower` gives the seat to the larger party, `upper` to the smaller one.
    """

    if n_seats < 1:
        raise ValidationError(f"seats must be >= 1 (got {n_seats})")
    large, small = (1, 0) if votes.beta > votes.alpha else (0, 1)
    ordered = votes.swapped() if large == 1 else votes
    reduced = derive_map(ordered, tau_eps=tau_eps)
    policy = policy or AlwaysLower()
    choose = branch_chooser(policy)

    winners: list[int] = []
    ties: set[int] = set()
    ell, w0 = reduced.ell, reduced.w0
    if reduced.start_choice:
        ties.add(ell - 1)
        if choose(0) == "upper":
            ell, w0 = ell - 1, 1.0
    winners.extend([large] * ell)

    steps = iterate_orbit(reduced.params, w0, policy, tau_eps=tau_eps, choose=choose)
    while len(winners) < n_seats:
        step = next(steps)
        start = len(winners)
        extra = 1 + reduced.b0 + step.symbol
        winners.append(small)
        winners.extend([large] * extra)
        if step.choice is not None:
            ties.add(start + extra + (step.choice == "upper"))

    winners = winners[:n_seats]
    return SeatSequence(
        method=Method.PHRAGMEN,
        parties=parties,
        winners=tuple(winners),
        per_step_scores=(),
        tie_flags=tuple(index in ties for index in range(n_seats)),
    )


def first_seat(votes: TwoPartyVotes) -> Party | None:
    """Party winning the first seat; None when α = β leaves it to tie-breaking."""

    if votes.alpha > votes.beta:
        return "A"
    if votes.beta > votes.alpha:
        return "B"
    return None


def alpha_bounds_half(gamma: float) -> tuple[float, float]:
    """α-interval with pB = 1/2 for a given AB share γ ∈ [0, 1)."""

    if not 0.0 <= gamma < 1.0:
        raise ValidationError(f"gamma must satisfy 0 <= gamma < 1 (got {gamma})")
    root = math.sqrt(1.0 + 8.0 * gamma)
    return (3.0 - root) / 4.0, (1.0 - 4.0 * gamma + root) / 4.0


def region_pB(
    votes: TwoPartyVotes,
    target: Fraction,
    *,
    q_max: int = DEFAULT_CONFIG.q_max,
    tol: float = DEFAULT_CONFIG.tol,
) -> bool:
    """Whether lim n_B/n equals `target` ∈ (0, 1/2].

    1/2 and 1/3 use polynomial inequalities in α and β; other targets test b0 = ⌊1/p⌋ - 2
    and b against the plateau of ρ = {1/p}.
    """

    if not 0 < target <= Fraction(1, 2):
        raise ValidationError(f"target must lie in (0, 1/2] (got {target})")
    alpha, beta = votes.alpha, votes.beta
    if alpha == 0.0 and beta == 0.0:
        raise IndeterminateOutcomeError("pB is not determined when every vote is for AB")
    if target == Fraction(1, 2):
        return alpha <= 2.0 * beta * (1.0 - beta) and beta <= 2.0 * alpha * (1.0 - alpha)
    if beta == 0.0 or alpha <= beta:
        return False
    if target == Fraction(1, 3):
        cubic = alpha - 2 * beta - alpha**2 + 2 * alpha * beta + 2 * beta**2 - 3 * alpha * beta**2
        return cubic >= 0.0 and alpha <= 3.0 * beta * (1.0 - beta)

    inverse = 1 / target
    b0 = math.floor(inverse) - 2
    rho = inverse - math.floor(inverse)
    if votes.gamma_ab == 0.0:
        return abs(beta - float(target)) <= tol
    reduced = derive_map(votes)
    if reduced.b0 != b0:
        return False
    lower = b_lower(reduced.a, rho, tol)
    upper = b_upper(reduced.a, rho, tol)
    return lower.lo <= reduced.b <= upper.hi


def staircase_grid(alphas: Sequence[float], betas: Sequence[float]) -> list[tuple[float, float]]:
    """Grid points (α, β) with α + β <= 1."""

    return [
        (alpha, beta)
        for alpha in alphas
        for beta in betas
        if alpha >= 0.0 and beta >= 0.0 and alpha + beta <= 1.0 + SHARE_TOLERANCE
    ]


def staircase_cell(
    alpha: float,
    beta: float,
    *,
    q_max: int = DEFAULT_CONFIG.q_max,
    tol: float = DEFAULT_CONFIG.tol,
) -> StaircaseRow:
    """One grid cell; cells whose prediction fails keep a row with NaN bounds."""

    votes = TwoPartyVotes.from_shares(alpha, beta)
    try:
        prediction = predicted_pB(votes, q_max=q_max, tol=tol)
    except IndeterminateOutcomeError:
        return StaircaseRow(alpha, beta, math.nan, math.nan, RhoKind.INDETERMINATE, None)
    except CircleMapError as exc:
        logger.warning("staircase cell alpha=%r beta=%r unresolved: %s", alpha, beta, exc)
        return StaircaseRow(alpha, beta, math.nan, math.nan, RhoKind.UNRESOLVED, None)
    low, high = prediction.bounds
    rho = prediction.rho
    q = rho.q if isinstance(rho, RationalRotation) else None
    return StaircaseRow(alpha, beta, low, high, prediction.rho_kind, q)


def staircase(
    points: Iterable[tuple[float, float]],
    *,
    q_max: int = DEFAULT_CONFIG.q_max,
    tol: float = DEFAULT_CONFIG.tol,
) -> list[StaircaseRow]:
    """pB over (α, β) points, sorted by (α, β)."""

    rows = [staircase_cell(alpha, beta, q_max=q_max, tol=tol) for alpha, beta in points]
    return sorted(rows, key=lambda row: (row.alpha, row.beta))

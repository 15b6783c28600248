"""The map f±(x) = {ax+b}: branches, lifts, orbits and symbolic coding."""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Iterator
from dataclasses import dataclass
from functools import singledispatch
from itertools import islice
from typing import Literal, NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from circlemap_elections.core.config import DEFAULT_CONFIG
from circlemap_elections.core.errors import (
    BranchScriptExhaustedError,
    CircleMapError,
    ValidationError,
)

logger = logging.getLogger(__name__)

type Branch = Literal["lower", "upper"]
type BranchChooser = Callable[[int], Branch]


class MapParams(BaseModel):
    """Slope `a` and offset `b` of f±; a = 1 only with `allow_unit_slope`."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    a: float
    b: float
    allow_unit_slope: bool = Field(default=False, repr=False)

    @model_validator(mode="after")
    def _validate(self) -> MapParams:
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError("a and b must be finite")
        unit_slope = self.allow_unit_slope and self.a == 1.0
        if not unit_slope and not 0.0 < self.a < 1.0:
            raise ValueError(f"a must satisfy 0 < a < 1 (got {self.a})")
        if not 0.0 <= self.b < 1.0:
            raise ValueError(f"b must satisfy 0 <= b < 1 (got {self.b})")
        return self

    @property
    def unit_slope(self) -> bool:
        return self.a == 1.0


@dataclass(frozen=True, slots=True)
class Tau:
    """Point of discontinuity of f±, when there is one in [0,1]."""

    exists: bool
    value: float | None = None


@dataclass(frozen=True, slots=True)
class AlwaysLower:
    """Take f₋ (value 0) at every visit to τ."""


@dataclass(frozen=True, slots=True)
class AlwaysUpper:
    """Take f₊ (value 1) at every visit to τ."""


@dataclass(frozen=True, slots=True)
class Scripted:
    """Consume one listed branch per visit to τ."""

    choices: tuple[Branch, ...]


@dataclass(frozen=True, slots=True)
class SeededRandom:
    """Fair coin per visit to τ, reproducible from the seed."""

    seed: int


type BranchPolicy = AlwaysLower | AlwaysUpper | Scripted | SeededRandom


class OrbitStep(NamedTuple):
    index: int
    x: float
    x_next: float
    symbol: int
    choice: Branch | None


@dataclass(frozen=True, slots=True)
class Orbit:
    """Finite trajectory x_0..x_n with symbols ε_0..ε_{n-1}."""

    points: tuple[float, ...]
    symbols: tuple[int, ...]
    choices_at_tau: tuple[tuple[int, Branch], ...]

    def __len__(self) -> int:
        return len(self.points)


def discontinuity(params: MapParams) -> Tau:
    """Return τ: (1-b)/a when a+b >= 1, 0 when b = 0, absent otherwise."""

    a, b = params.a, params.b
    if a + b >= 1.0:
        return Tau(exists=True, value=min((1.0 - b) / a, 1.0))
    if b == 0.0:
        return Tau(exists=True, value=0.0)
    return Tau(exists=False)


def step_lower(params: MapParams, x: float, *, tau_eps: float = DEFAULT_CONFIG.tau_eps) -> float:
    """f₋(x) = {ax+b}, right-continuous, values in [0,1)."""

    y = params.a * x + params.b
    nearest = round(y)
    if abs(y - nearest) <= tau_eps:
        return 0.0
    return y - math.floor(y)


def step_upper(params: MapParams, x: float, *, tau_eps: float = DEFAULT_CONFIG.tau_eps) -> float:
    """f₊(x) = {ax+b}₊, left-continuous, values in (0,1]."""

    y = params.a * x + params.b
    nearest = round(y)
    if abs(y - nearest) <= tau_eps:
        return 1.0
    return y - math.floor(y)


def lift_lower(params: MapParams, x: float) -> float:
    """F₋(x) = a{x} + b + ⌊x⌋."""

    whole = math.floor(x)
    return params.a * (x - whole) + params.b + whole


def lift_upper(params: MapParams, x: float) -> float:
    """F₊(x) = F₋(x-), using {x}₊ = x - ⌈x⌉ + 1."""

    ceiling = math.ceil(x)
    return params.a * (x - ceiling + 1) + params.b + ceiling - 1


def inverse(params: MapParams, y: float) -> float | None:
    """Single-valued inverse of f± on [0, a+b-1] ∪ [b, 1]."""

    a, b = params.a, params.b
    if a + b <= 1.0:
        raise ValidationError(f"inverse requires a+b > 1 (got a+b={a + b})")
    if b <= y <= 1.0:
        return (y - b) / a
    if 0.0 <= y <= a + b - 1.0:
        return (y + 1.0 - b) / a
    return None


def reflect(params: MapParams) -> MapParams:
    """Conjugate by σ(x) = 1-x: returns (a, {-(a+b)})."""

    reflected = (-(params.a + params.b)) % 1.0
    if reflected >= 1.0:
        reflected = 0.0
    return MapParams(a=params.a, b=reflected, allow_unit_slope=params.allow_unit_slope)


def admissible_symbols(params: MapParams) -> frozenset[int]:
    if params.a + params.b >= 1.0:
        return frozenset({0, 1})
    return frozenset({-1, 0})


@singledispatch
def branch_chooser(policy: object) -> BranchChooser:
    """Build a stateful chooser for one orbit run."""

    raise TypeError(f"unsupported branch policy: {type(policy).__name__}")


@branch_chooser.register
def _choose_lower(policy: AlwaysLower) -> BranchChooser:
    del policy
    return lambda index: "lower"


@branch_chooser.register
def _choose_upper(policy: AlwaysUpper) -> BranchChooser:
    del policy
    return lambda index: "upper"


@branch_chooser.register
def _choose_scripted(policy: Scripted) -> BranchChooser:
    remaining = iter(policy.choices)

    def choose(index: int) -> Branch:
        try:
            return next(remaining)
        except StopIteration:
            raise BranchScriptExhaustedError(
                f"branch script exhausted at step {index} "
                f"({len(policy.choices)} choice(s) given)"
            ) from None

    return choose


@branch_chooser.register
def _choose_random(policy: SeededRandom) -> BranchChooser:
    rng = np.random.default_rng(policy.seed)

    def choose(index: int) -> Branch:
        del index
        return "upper" if rng.random() < 0.5 else "lower"

    return choose


def iterate_orbit(
    params: MapParams,
    x0: float,
    policy: BranchPolicy,
    *,
    tau_eps: float = DEFAULT_CONFIG.tau_eps,
    symbol_tol: float = DEFAULT_CONFIG.symbol_tol,
    choose: BranchChooser | None = None,
) -> Iterator[OrbitStep]:
    """Yield orbit steps forever; the policy decides at each visit to τ.

    Pass `choose` to continue a chooser already used elsewhere in the same run.
    """

    if not 0.0 <= x0 <= 1.0:
        raise ValidationError(f"x0 must lie in [0, 1] (got {x0})")
    tau = discontinuity(params)
    tau_value = tau.value if tau.value is not None else math.nan
    choose = choose or branch_chooser(policy)
    a, b = params.a, params.b
    x = x0
    index = 0
    while True:
        y = a * x + b
        choice: Branch | None = None
        if tau.exists and abs(x - tau_value) <= tau_eps:
            choice = choose(index)
            if x != tau_value:
                logger.warning("orbit point %r treated as tau=%r at step %d", x, tau_value, index)
            x_next = 0.0 if choice == "lower" else 1.0
        else:
            x_next = y - math.floor(y)
        defect = y - x_next
        symbol = round(defect)
        if abs(defect - symbol) >= symbol_tol:
            raise CircleMapError(
                f"symbol rounding error {abs(defect - symbol):.3g} at step {index} "
                f"(x={x!r}, a={a!r}, b={b!r})"
            )
        yield OrbitStep(index, x, x_next, symbol, choice)
        x = x_next
        index += 1


def orbit(
    params: MapParams,
    x0: float,
    n: int,
    policy: BranchPolicy | None = None,
    *,
    tau_eps: float = DEFAULT_CONFIG.tau_eps,
) -> Orbit:
    """Materialize n steps of an orbit starting at x0."""

    if n < 0:
        raise ValidationError(f"n must be >= 0 (got {n})")
    points = [x0]
    symbols: list[int] = []
    choices: list[tuple[int, Branch]] = []
    steps = iterate_orbit(params, x0, policy or AlwaysLower(), tau_eps=tau_eps)
    for step in islice(steps, n):
        points.append(step.x_next)
        symbols.append(step.symbol)
        if step.choice is not None:
            choices.append((step.index, step.choice))
    if choices:
        logger.debug("orbit visited tau %d time(s) in %d steps", len(choices), n)
    return Orbit(points=tuple(points), symbols=tuple(symbols), choices_at_tau=tuple(choices))


def lift_orbit(
    params: MapParams,
    x: float,
    n: int,
    *,
    tau_eps: float = DEFAULT_CONFIG.tau_eps,
) -> float:
    """F₋ⁿ(x) as f₋ⁿ({x}) plus ⌊x⌋ plus the accumulated symbols."""

    whole = math.floor(x)
    position = x - whole
    total = whole
    for step in islice(iterate_orbit(params, position, AlwaysLower(), tau_eps=tau_eps), n):
        total += step.symbol
        position = step.x_next
    return position + total

"""Pydantic models for CLI argument validation."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from circlemap_elections.core.normalize import (
    field_label,
    normalize_required_str,
    parse_float_list,
    split_tokens,
)
from circlemap_elections.dynamics.circle_map import (
    AlwaysLower,
    AlwaysUpper,
    Branch,
    BranchPolicy,
    Scripted,
    SeededRandom,
)
from circlemap_elections.elections.engine import (
    LowestIndex,
    Method,
    ScriptedTies,
    SeededLot,
    TieBreak,
)
from circlemap_elections.elections.two_party import staircase_grid

_BRANCH_TOKENS: dict[str, Branch] = {"l": "lower", "lower": "lower", "u": "upper", "upper": "upper"}
MAX_GRID_POINTS = 100_000


def parse_branch_policy(spec: str, *, seed: int) -> BranchPolicy:
    """`lower | upper | random | script:l,u,...`."""

    cleaned = normalize_required_str(spec, field_name="branch").lower()
    if cleaned == "lower":
        return AlwaysLower()
    if cleaned == "upper":
        return AlwaysUpper()
    if cleaned == "random":
        return SeededRandom(seed)
    if cleaned.startswith("script:"):
        choices: list[Branch] = []
        for token in split_tokens(cleaned.removeprefix("script:"), field_name="branch"):
            if token not in _BRANCH_TOKENS:
                raise ValueError(f"branch script token must be l|u|lower|upper (got {token})")
            choices.append(_BRANCH_TOKENS[token])
        return Scripted(tuple(choices))
    raise ValueError(f"unknown branch policy: {spec} (expected lower|upper|random|script:...)")


def parse_tiebreak(spec: str, *, seed: int, parties: tuple[str, ...]) -> TieBreak:
    """`lowest | lot | script:<names or 0-based indices>`."""

    cleaned = normalize_required_str(spec, field_name="tiebreak")
    lowered = cleaned.lower()
    if lowered == "lowest":
        return LowestIndex()
    if lowered == "lot":
        return SeededLot(seed)
    if lowered.startswith("script:"):
        choices: list[int] = []
        for token in split_tokens(cleaned[len("script:") :], field_name="tiebreak"):
            if token in parties:
                choices.append(parties.index(token))
            elif token.isdigit() and int(token) < len(parties):
                choices.append(int(token))
            else:
                raise ValueError(f"tie script names unknown party: {token}")
        return ScriptedTies(tuple(choices))
    raise ValueError(f"unknown tie-break: {spec} (expected lowest|lot|script:...)")


def parse_grid(spec: str, *, field_name: str) -> list[float]:
    """`start:stop:count` (inclusive, evenly spaced) or a comma-separated list."""

    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"--{field_label(field_name)} grid must be start:stop:count")
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ValueError(f"--{field_label(field_name)} grid must be start:stop:count") from None
        if not 1 <= count <= MAX_GRID_POINTS:
            raise ValueError(f"--{field_label(field_name)} count must be in 1..{MAX_GRID_POINTS}")
        return [float(value) for value in np.linspace(start, stop, count)]
    return parse_float_list(spec, field_name=field_name)


class _Args(BaseModel):
    model_config = ConfigDict(extra="forbid")


class MapArgs(_Args):
    """Map parameters shared by the dynamics commands."""

    a: float
    b: float

    @model_validator(mode="after")
    def _validate(self) -> MapArgs:
        if not math.isfinite(self.a) or not 0.0 < self.a < 1.0:
            raise ValueError(f"--a must satisfy 0 < a < 1 (got {self.a})")
        if not math.isfinite(self.b) or not 0.0 <= self.b < 1.0:
            raise ValueError(f"--b must satisfy 0 <= b < 1 (got {self.b})")
        return self


class OrbitArgs(MapArgs):
    x0: float = Field(ge=0.0, le=1.0)
    steps: int = Field(ge=0, le=10_000_000)
    branch: str = "lower"
    seed: int = 0

    def policy(self) -> BranchPolicy:
        return parse_branch_policy(self.branch, seed=self.seed)

    @model_validator(mode="after")
    def _validate_policy(self) -> OrbitArgs:
        self.policy()
        return self


class RotnumArgs(MapArgs):
    q_max: int = Field(ge=1, le=100_000)
    tol: float = Field(gt=0.0, lt=1e-2)
    estimate_steps: int = Field(default=0, ge=0)


class PlateausArgs(_Args):
    a: float = Field(gt=0.0, lt=1.0)
    q_max: int = Field(ge=1, le=2_000)
    jobs: int = Field(ge=1, le=256)


class StaircaseArgs(_Args):
    alphas: str
    betas: str
    q_max: int = Field(ge=1, le=100_000)
    jobs: int = Field(ge=1, le=256)

    def points(self) -> list[tuple[float, float]]:
        """Grid cells with α + β <= 1."""

        alphas = parse_grid(self.alphas, field_name="alphas")
        betas = parse_grid(self.betas, field_name="betas")
        return staircase_grid(alphas, betas)

    @model_validator(mode="after")
    def _validate(self) -> StaircaseArgs:
        if not self.points():
            raise ValueError("--alphas/--betas grid has no cell with alpha + beta <= 1")
        return self


class InvariantSetArgs(MapArgs):
    depth: int = Field(ge=0, le=5_000)
    gaps: int = Field(default=0, ge=0, le=1_000)
    gauge: Literal["log", "log2", "power"] = "log"
    gauge_alpha: float = Field(default=0.5, gt=0.0)


class MeasureArgs(MapArgs):
    kind: Literal["empirical", "pushforward", "both"]
    n: int = Field(ge=1, le=10_000_000)
    m: int = Field(ge=1, le=10_000_000)
    x0: float = Field(ge=0.0, le=1.0)
    branch: str = "lower"
    seed: int = 0

    def policy(self) -> BranchPolicy:
        return parse_branch_policy(self.branch, seed=self.seed)

    @model_validator(mode="after")
    def _validate_policy(self) -> MeasureArgs:
        self.policy()
        return self


class ElectArgs(_Args):
    method: Method
    seats: int = Field(ge=1, le=10_000_000)
    tiebreak: str = "lowest"
    seed: int = 0
    max_period: int = Field(default=0, ge=0)


class TwoPartyArgs(_Args):
    alpha: float | None = Field(default=None, ge=0.0, le=1.0)
    beta: float | None = Field(default=None, ge=0.0, le=1.0)
    seats: int = Field(default=0, ge=0, le=10_000_000)
    target: str | None = None
    branch: str = "lower"
    seed: int = 0

    def target_fraction(self) -> Fraction | None:
        if self.target is None:
            return None
        try:
            return Fraction(self.target.strip())
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"--target must be a fraction like 1/3 (got {self.target})") from None

    def policy(self) -> BranchPolicy:
        return parse_branch_policy(self.branch, seed=self.seed)

    @model_validator(mode="after")
    def _validate(self) -> TwoPartyArgs:
        if (self.alpha is None) != (self.beta is None):
            raise ValueError("--alpha and --beta must be given together")
        if self.alpha is not None and self.beta is not None and self.alpha + self.beta > 1.0:
            raise ValueError("--alpha plus --beta must be <= 1")
        target = self.target_fraction()
        if target is not None and not 0 < target <= Fraction(1, 2):
            raise ValueError(f"--target must lie in (0, 1/2] (got {self.target})")
        self.policy()
        return self


class ThieleLimitArgs(_Args):
    seats: int = Field(default=0, ge=0, le=10_000_000)
    blocks: bool = False
    tiebreak: str = "lowest"
    seed: int = 0

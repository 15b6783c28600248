"""Ballot profiles: weighted votes for nonempty sets of parties, their file format and notation."""

from __future__ import annotations

import json
import math
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, model_validator
from pydantic import ValidationError as PydanticValidationError

from circlemap_elections.core.errors import ValidationError
from circlemap_elections.core.normalize import format_pydantic_error, normalize_unique_list
from circlemap_elections.io.yaml_io import load_any_yaml, parse_yaml_text

MAX_PARTIES = 20

_COMPACT_VOTE = re.compile(
    r"^\s*(?P<weight>\d+(?:\.\d+)?(?:[eE][-+]?\d+)?)?\s*(?P<set>[A-Za-z]+)\s*$"
)


@dataclass(frozen=True, slots=True)
class Ballot:
    """Weight v_σ for the party set σ, encoded as a bitmask over party indices."""

    mask: int
    weight: float

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(index for index in range(self.mask.bit_length()) if self.mask >> index & 1)

    def __contains__(self, party: int) -> bool:
        return bool(self.mask >> party & 1)


@dataclass(frozen=True, slots=True)
class BallotProfile:
    """Parties plus canonical ballots: members sorted, sets unique, weights > 0.

    `supporters[i]` lists the indices of the ballots containing party i and
    `party_weights[i]` is their total weight W̄_i.
    """

    parties: tuple[str, ...]
    ballots: tuple[Ballot, ...]
    supporters: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    party_weights: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.parties:
            raise ValidationError("profile needs at least one party")
        if len(self.parties) > MAX_PARTIES:
            raise ValidationError(
                f"profile has {len(self.parties)} parties (at most {MAX_PARTIES} supported)"
            )
        if len(set(self.parties)) != len(self.parties):
            raise ValidationError("party names must be unique")
        full = (1 << len(self.parties)) - 1
        seen: set[int] = set()
        for ballot in self.ballots:
            if ballot.mask <= 0 or ballot.mask & ~full:
                raise ValidationError(
                    f"ballot mask {ballot.mask} is empty or names unknown parties"
                )
            if not math.isfinite(ballot.weight) or ballot.weight <= 0.0:
                raise ValidationError(
                    f"ballot weights must be finite and > 0 (got {ballot.weight})"
                )
            if ballot.mask in seen:
                raise ValidationError(f"duplicate ballot {self.names(ballot.mask)}")
            seen.add(ballot.mask)
        supporters = tuple(
            tuple(position for position, ballot in enumerate(self.ballots) if party in ballot)
            for party in range(len(self.parties))
        )
        for party, ballots in enumerate(supporters):
            if not ballots:
                raise ValidationError(f"party {self.parties[party]} receives no votes")
        object.__setattr__(self, "supporters", supporters)
        object.__setattr__(
            self,
            "party_weights",
            tuple(
                math.fsum(self.ballots[position].weight for position in ballots)
                for ballots in supporters
            ),
        )

    @classmethod
    def from_weights(
        cls,
        parties: Iterable[str],
        weights: Mapping[tuple[str, ...] | frozenset[str] | str, float],
    ) -> BallotProfile:
        """Build a canonical profile; equal sets are merged and zero weights dropped."""

        names = tuple(parties)
        index = {name: position for position, name in enumerate(names)}
        merged: dict[int, float] = {}
        for members, weight in weights.items():
            group = tuple(members)
            mask = 0
            for name in group:
                if name not in index:
                    raise ValidationError(f"unknown party in ballot: {name}")
                bit = 1 << index[name]
                if mask & bit:
                    raise ValidationError(f"party {name} repeated within one ballot")
                mask |= bit
            if mask == 0:
                raise ValidationError("blank ballots are not allowed")
            if not math.isfinite(weight) or weight < 0.0:
                raise ValidationError(f"ballot weights must be finite and >= 0 (got {weight})")
            merged[mask] = merged.get(mask, 0.0) + float(weight)
        return cls._canonical(names, merged)

    @classmethod
    def _canonical(cls, parties: tuple[str, ...], merged: Mapping[int, float]) -> BallotProfile:
        ballots = [Ballot(mask, weight) for mask, weight in merged.items() if weight > 0.0]
        ballots.sort(key=lambda ballot: ballot.members)
        return cls(parties=parties, ballots=tuple(ballots))

    @property
    def num_parties(self) -> int:
        return len(self.parties)

    @property
    def total_weight(self) -> float:
        return math.fsum(ballot.weight for ballot in self.ballots)

    def names(self, mask: int) -> str:
        members = [self.parties[index] for index in range(len(self.parties)) if mask >> index & 1]
        separator = "" if all(len(name) == 1 for name in self.parties) else ","
        return separator.join(members)

    def index_of(self, party: str) -> int:
        try:
            return self.parties.index(party)
        except ValueError:
            raise ValidationError(
                f"unknown party: {party} (expected one of {', '.join(self.parties)})"
            ) from None

    def weight_of(self, members: Iterable[str]) -> float:
        mask = 0
        for name in members:
            mask |= 1 << self.index_of(name)
        return next((ballot.weight for ballot in self.ballots if ballot.mask == mask), 0.0)

    def restrict(self, parties: Iterable[str | int]) -> BallotProfile:
        """Keep the given parties; ballots are intersected with them and empty ones dropped."""

        kept = sorted({self.index_of(p) if isinstance(p, str) else p for p in parties})
        if not kept or any(not 0 <= index < len(self.parties) for index in kept):
            raise ValidationError(f"invalid party selection: {kept}")
        remap = {old: new for new, old in enumerate(kept)}
        merged: dict[int, float] = {}
        for ballot in self.ballots:
            mask = 0
            for member in ballot.members:
                if member in remap:
                    mask |= 1 << remap[member]
            if mask:
                merged[mask] = merged.get(mask, 0.0) + ballot.weight
        return BallotProfile._canonical(tuple(self.parties[index] for index in kept), merged)

    def scaled(self, factor: float) -> BallotProfile:
        if not math.isfinite(factor) or factor <= 0.0:
            raise ValidationError(f"scale factor must be > 0 (got {factor})")
        return BallotProfile(
            parties=self.parties,
            ballots=tuple(Ballot(ballot.mask, ballot.weight * factor) for ballot in self.ballots),
        )

    def with_ballot(self, members: Iterable[str], weight: float) -> BallotProfile:
        """Add `weight` votes for the set `members`, merging with an existing equal set."""

        weights: dict[tuple[str, ...] | frozenset[str] | str, float] = {
            tuple(self.parties[index] for index in ballot.members): ballot.weight
            for ballot in self.ballots
        }
        key = tuple(sorted(members, key=self.index_of))
        weights[key] = weights.get(key, 0.0) + weight
        return BallotProfile.from_weights(self.parties, weights)

    def to_file(self) -> ProfileFile:
        return ProfileFile(
            parties=list(self.parties),
            votes=[
                VoteEntry.model_validate(
                    {
                        "set": [self.parties[index] for index in ballot.members],
                        "weight": ballot.weight,
                    }
                )
                for ballot in self.ballots
            ],
        )


class VoteEntry(BaseModel):
    """One `{set: [...], weight: ...}` item of a profile document."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    members: list[str] = Field(alias="set")
    weight: float = Field(ge=0.0, allow_inf_nan=False)

    @model_validator(mode="after")
    def _validate(self) -> VoteEntry:
        self.members = normalize_unique_list(self.members, field_name="set")
        return self


class ProfileFile(BaseModel):
    """Profile document: `parties` plus a list of weighted `votes`."""

    model_config = ConfigDict(extra="forbid")

    parties: list[str]
    votes: list[VoteEntry]

    @model_validator(mode="after")
    def _validate(self) -> ProfileFile:
        self.parties = normalize_unique_list(self.parties, field_name="parties")
        if len(self.parties) > MAX_PARTIES:
            raise ValueError(f"at most {MAX_PARTIES} parties supported (got {len(self.parties)})")
        known = set(self.parties)
        for position, vote in enumerate(self.votes):
            unknown = [name for name in vote.members if name not in known]
            if unknown:
                raise ValueError(f"votes[{position}] names unknown parties: {', '.join(unknown)}")
        return self

    def to_profile(self) -> BallotProfile:
        weights: dict[int, float] = {}
        index = {name: position for position, name in enumerate(self.parties)}
        for vote in self.votes:
            mask = 0
            for name in vote.members:
                mask |= 1 << index[name]
            weights[mask] = weights.get(mask, 0.0) + vote.weight
        return BallotProfile._canonical(tuple(self.parties), weights)


def canonicalize(document: ProfileFile) -> ProfileFile:
    """Sort members by party order, merge equal sets, drop zero weights, sort votes."""

    return document.to_profile().to_file()


def dump_profile(profile: BallotProfile) -> str:
    """Canonical JSON text of a profile, newline-terminated."""

    payload = profile.to_file().model_dump(by_alias=True)
    return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"


def parse_profile_document(payload: object, *, source: str) -> ProfileFile:
    if not isinstance(payload, dict):
        raise ValidationError(f"profile root must be a mapping/object (file: {source})")
    try:
        return ProfileFile.model_validate(payload)
    except PydanticValidationError as exc:
        raise ValidationError(
            format_pydantic_error(exc, header=f"invalid profile {source}:")
        ) from exc


def load_profile_file(path: Path) -> ProfileFile:
    return parse_profile_document(load_any_yaml(path), source=str(path))


def load_profile(path: Path) -> BallotProfile:
    """Read a JSON or YAML profile document."""

    return load_profile_file(path).to_profile()


def parse_profile_text(raw: str, *, source: str = "<string>") -> BallotProfile:
    return parse_profile_document(parse_yaml_text(raw, source=source), source=source).to_profile()


def parse_compact_votes(text: str) -> BallotProfile:
    """Parse `"37 ABC, 13 KLM"` notation: optional weight, then one letter per party.

    Parties are the letters used, in alphabetical order.
    """

    weights: dict[tuple[str, ...] | frozenset[str] | str, float] = {}
    letters: set[str] = set()
    items = [item for item in text.split(",") if item.strip()]
    if not items:
        raise ValidationError("votes must not be empty")
    for item in items:
        match = _COMPACT_VOTE.match(item)
        if match is None:
            raise ValidationError(f"cannot parse vote {item.strip()!r} (expected e.g. '37 ABC')")
        members = match.group("set").upper()
        if len(set(members)) != len(members):
            raise ValidationError(f"party repeated within vote {item.strip()!r}")
        weight = float(match.group("weight") or 1.0)
        key = "".join(sorted(members))
        weights[key] = weights.get(key, 0.0) + weight
        letters.update(members)
    return BallotProfile.from_weights(sorted(letters), weights)

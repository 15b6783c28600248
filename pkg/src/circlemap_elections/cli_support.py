"""Shared CLI utilities."""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from contextlib import AbstractContextManager
from dataclasses import dataclass, field
from pathlib import Path
from types import TracebackType
from typing import Literal, NoReturn

import typer
from pydantic import BaseModel
from pydantic import ValidationError as PydanticValidationError
from rich.console import Console
from rich.table import Table

from circlemap_elections.core.arg_models import parse_tiebreak
from circlemap_elections.core.config import DEFAULT_CONFIG, NumericsConfig
from circlemap_elections.core.errors import ValidationError
from circlemap_elections.core.normalize import format_pydantic_error
from circlemap_elections.elections.engine import TieBreak
from circlemap_elections.elections.profile import (
    BallotProfile,
    load_profile,
    parse_compact_votes,
)
from circlemap_elections.io.csv_io import RunHeader, format_cell, render_csv
from circlemap_elections.io.payloads import render_json
from circlemap_elections.io.yaml_io import write_text_atomic

TABLE_PREVIEW_ROWS = 40
VALIDATION_EXIT_CODE = 2
FAILURE_EXIT_CODE = 1


def validate_payload[TModel: BaseModel](
    model_type: type[TModel], payload: Mapping[str, object]
) -> TModel:
    """Validate command payload against pydantic model."""

    try:
        return model_type.model_validate(payload)
    except PydanticValidationError as exc:
        raise ValidationError(
            format_pydantic_error(exc, header="invalid command arguments:", as_options=True)
        ) from exc


def handle_error(console: Console, exc: Exception) -> NoReturn:
    """Render user-visible CLI error and exit non-zero."""

    console.print(f"[red]error:[/red] {exc}")
    console.print("[dim]hint:[/dim] run with `--help` for command usage.")
    code = VALIDATION_EXIT_CODE if isinstance(exc, ValidationError) else FAILURE_EXIT_CODE
    raise typer.Exit(code=code)


class CliGuard(AbstractContextManager[None]):
    """Context manager for consistent command error handling."""

    def __init__(self, *, console: Console) -> None:
        self.console = console

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        traceback: TracebackType | None,
    ) -> Literal[False]:
        del exc_type
        del traceback
        if exc is None:
            return False
        if isinstance(exc, (typer.Exit, KeyboardInterrupt)):
            return False
        if not isinstance(exc, Exception):
            return False
        handle_error(self.console, exc)


@dataclass(slots=True)
class CliSettings:
    """Global options set by the root callback, read by every command."""

    numerics: NumericsConfig = field(default=DEFAULT_CONFIG)


def resolve_profile(profile_path: Path | None, votes: str | None) -> BallotProfile:
    """Exactly one of `--profile FILE` and `--votes "1A,1B,1AB"`."""

    if profile_path is not None and votes is None:
        return load_profile(profile_path)
    if votes is not None and profile_path is None:
        return parse_compact_votes(votes)
    raise ValidationError("pass exactly one of --profile or --votes")


def resolve_tiebreak(spec: str, *, seed: int, parties: tuple[str, ...]) -> TieBreak:
    """Parse `--tiebreak` once the profile, and so the party names, is known."""

    try:
        return parse_tiebreak(spec, seed=seed, parties=parties)
    except ValueError as exc:
        raise ValidationError(f"--tiebreak: {exc}") from exc


def resolve_output_path(output: Path, out_dir: Path | None) -> Path:
    if out_dir is None or output.is_absolute():
        return output
    return out_dir / output


@dataclass(slots=True)
class ResultWriter:
    """Route a command result to a file, JSON on stdout, or a rich table."""

    console: Console
    preview_rows: int = TABLE_PREVIEW_ROWS

    def emit(
        self,
        *,
        header: RunHeader,
        result: object,
        columns: Sequence[str],
        rows: Iterable[Sequence[object]],
        json_output: bool,
        output: Path | None,
        out_dir: Path | None,
        title: str,
        summary: Sequence[str] = (),
    ) -> None:
        materialized = [list(row) for row in rows]
        if output is not None:
            path = resolve_output_path(output, out_dir)
            if path.suffix.lower() == ".json":
                write_text_atomic(path, render_json(header, result) + "\n")
            else:
                write_text_atomic(path, render_csv(header, columns, materialized))
            if not json_output:
                self.console.print(f"wrote: {path}")
        if json_output:
            typer.echo(render_json(header, result))
            return
        for line in summary:
            self.console.print(line)
        if output is None and materialized:
            self.console.print(self._table(title, columns, materialized))

    def _table(self, title: str, columns: Sequence[str], rows: list[list[object]]) -> Table:
        table = Table(title=f"{title} ({len(rows)})")
        for column in columns:
            table.add_column(column, overflow="fold")
        for row in rows[: self.preview_rows]:
            table.add_row(*[format_cell(value) for value in row])
        if len(rows) > self.preview_rows:
            table.caption = f"showing first {self.preview_rows} rows (use --output for all)"
        return table

"""CSV tables with a `#`-prefixed reproducibility header."""

from __future__ import annotations

import csv
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from io import StringIO
from pathlib import Path

from circlemap_elections import __version__
from circlemap_elections.core.errors import ValidationError
from circlemap_elections.io.yaml_io import read_text, write_text_atomic

FLOAT_FORMAT = ".17g"


@dataclass(frozen=True, slots=True)
class RunHeader:
    """Command name, seed and parameters of the run that produced a table."""

    command: str
    seed: int | None = None
    params: Mapping[str, object] = field(default_factory=dict)

    def lines(self) -> list[str]:
        rendered = " ".join(f"{key}={format_cell(value)}" for key, value in self.params.items())
        return [
            f"# circlemap {__version__}",
            f"# command: {self.command}",
            f"# seed: {'' if self.seed is None else self.seed}",
            f"# params: {rendered}",
        ]

    def as_meta(self) -> dict[str, object]:
        return {
            "version": __version__,
            "command": self.command,
            "seed": self.seed,
            "params": dict(self.params),
        }


@dataclass(frozen=True, slots=True)
class CsvTable:
    meta: dict[str, str]
    columns: list[str]
    rows: list[list[str]]


def format_cell(value: object) -> str:
    """17 significant digits for floats; enums by value; None as an empty cell."""

    match value:
        case None:
            return ""
        case bool():
            return "true" if value else "false"
        case float():
            return format(value, FLOAT_FORMAT) if math.isfinite(value) else str(value)
        case Enum():
            return str(value.value)
        case _:
            return str(value)


def render_csv(
    header: RunHeader, columns: Sequence[str], rows: Iterable[Sequence[object]]
) -> str:
    buffer = StringIO()
    for line in header.lines():
        buffer.write(line + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        if len(row) != len(columns):
            raise ValidationError(f"row has {len(row)} cells, expected {len(columns)}")
        writer.writerow([format_cell(value) for value in row])
    return buffer.getvalue()


def write_csv(
    path: Path,
    header: RunHeader,
    columns: Sequence[str],
    rows: Iterable[Sequence[object]],
) -> None:
    write_text_atomic(path, render_csv(header, columns, rows))


def parse_csv_text(text: str) -> CsvTable:
    """Split header comments (`# key: value`) from the column row and data rows."""

    meta: dict[str, str] = {}
    body: list[str] = []
    for line in text.splitlines():
        if line.startswith("# ") and not body:
            key, separator, value = line[2:].partition(":")
            if not separator:
                key, _, value = line[2:].partition(" ")
            meta[key.strip()] = value.strip()
        else:
            body.append(line)
    records = list(csv.reader(body))
    if not records:
        raise ValidationError("csv has no column row")
    return CsvTable(meta=meta, columns=records[0], rows=records[1:])


def read_csv(path: Path) -> CsvTable:
    return parse_csv_text(read_text(path))

"""YAML/JSON document loading and atomic text writes."""

from __future__ import annotations

import os
from contextlib import suppress
from pathlib import Path
from tempfile import NamedTemporaryFile

from ruamel.yaml import YAML
from ruamel.yaml.comments import CommentedMap, CommentedSeq
from ruamel.yaml.error import YAMLError

from circlemap_elections.core.errors import ValidationError

type PlainScalar = str | int | float | bool | None
type PlainNode = PlainScalar | list[PlainNode] | dict[str, PlainNode]


def build_yaml() -> YAML:
    """Safe YAML parser; JSON documents parse unchanged."""

    yaml = YAML(typ="rt")
    yaml.width = 4096
    return yaml


def read_text(path: Path) -> str:
    """Read UTF-8 text file."""

    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise ValidationError(f"file not found: {path}") from exc


def load_any_yaml(path: Path) -> PlainNode:
    """Load a YAML or JSON file into plain Python containers."""

    return parse_yaml_text(read_text(path), source=str(path))


def parse_yaml_text(raw: str, *, source: str = "<string>") -> PlainNode:
    """Parse YAML/JSON text into plain Python containers."""

    yaml = build_yaml()
    try:
        loaded = yaml.load(raw)
    except YAMLError as exc:
        raise ValidationError(f"yaml parse error in {source}: {exc}") from exc
    return to_plain(loaded)


def to_plain(node: object) -> PlainNode:
    """Convert ruamel round-trip nodes to builtin containers and scalars."""

    if isinstance(node, CommentedMap | dict):
        return {str(key): to_plain(value) for key, value in node.items()}
    if isinstance(node, CommentedSeq | list | tuple):
        return [to_plain(item) for item in node]
    if node is None or isinstance(node, bool):
        return node
    if isinstance(node, int):
        return int(node)
    if isinstance(node, float):
        return float(node)
    if isinstance(node, str):
        return str(node)
    raise ValidationError(
        f"yaml value type not supported: {type(node).__name__} "
        "(expected mapping, sequence, or scalar)"
    )


def write_text(path: Path, text: str) -> None:
    """Write UTF-8 text file."""

    path.write_text(text, encoding="utf-8")


def write_text_atomic(path: Path, text: str) -> None:
    """Atomically create or replace a text file."""

    path.parent.mkdir(parents=True, exist_ok=True)
    temp_path: Path | None = None
    try:
        with NamedTemporaryFile(
            mode="w",
            encoding="utf-8",
            dir=path.parent,
            prefix=f".{path.name}.tmp.",
            delete=False,
        ) as temp_file:
            temp_file.write(text)
            temp_file.flush()
            os.fsync(temp_file.fileno())
            temp_path = Path(temp_file.name)

        if path.exists():
            with suppress(OSError):
                os.chmod(temp_path, path.stat().st_mode & 0o777)
        os.replace(temp_path, path)
    finally:
        if temp_path is not None:
            with suppress(FileNotFoundError):
                temp_path.unlink()

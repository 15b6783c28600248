"""Shared normalization helpers for args, files and error messages."""

from __future__ import annotations

from collections.abc import Sequence

from pydantic import ValidationError as PydanticValidationError

PREVIEW_LIMIT = 8


def normalize_required_str(value: str, *, field_name: str) -> str:
    """Strip and require non-empty string."""

    cleaned = value.strip()
    if not cleaned:
        raise ValueError(f"{field_label(field_name)} must not be empty")
    return cleaned


def normalize_unique_list(values: Sequence[str], *, field_name: str) -> list[str]:
    """Normalize string list, reject empties and duplicates."""

    cleaned: list[str] = []
    seen: set[str] = set()
    for item in values:
        normalized = normalize_required_str(item, field_name=field_name)
        if normalized in seen:
            raise ValueError(f"{field_label(field_name)} has duplicates ({normalized})")
        seen.add(normalized)
        cleaned.append(normalized)
    if not cleaned:
        raise ValueError(f"{field_label(field_name)} must not be empty")
    return cleaned


def split_tokens(value: str, *, field_name: str) -> list[str]:
    """Split a comma-separated option value into stripped, non-empty tokens."""

    tokens = [token.strip() for token in value.split(",")]
    if not tokens or any(not token for token in tokens):
        raise ValueError(f"{field_label(field_name)} must be a comma-separated list")
    return tokens


def parse_float_list(value: str, *, field_name: str) -> list[float]:
    numbers: list[float] = []
    for token in split_tokens(value, field_name=field_name):
        try:
            numbers.append(float(token))
        except ValueError:
            raise ValueError(f"{field_label(field_name)}: not a number: {token}") from None
    return numbers


def field_label(field_name: str) -> str:
    return field_name.replace("_", "-")


def format_pydantic_error(
    exc: PydanticValidationError,
    *,
    header: str,
    as_options: bool = False,
) -> str:
    """One line per issue, located by field path (or by `--option` name for CLI args)."""

    issues = exc.errors()
    if not issues:
        return header

    lines: list[str] = []
    for issue in issues[:PREVIEW_LIMIT]:
        path = _format_error_location(issue.get("loc", ()))
        if path and as_options:
            path = f"--{field_label(path)}"
        message = _normalize_issue_message(str(issue.get("msg", "invalid value")))
        lines.append(f"{path}: {message}" if path else message)

    if len(lines) == 1:
        return lines[0]

    output = [header, *[f"- {line}" for line in lines]]
    if len(issues) > PREVIEW_LIMIT:
        output.append(f"- ... and {len(issues) - PREVIEW_LIMIT} more")
    return "\n".join(output)


def _format_error_location(loc: object) -> str:
    if not isinstance(loc, tuple):
        return ""

    path = ""
    for part in loc:
        if isinstance(part, int):
            path += f"[{part}]"
            continue
        if not isinstance(part, str) or part in {"__root__", "__all__"}:
            continue
        path = f"{path}.{part}" if path else part
    return path


def _normalize_issue_message(message: str) -> str:
    normalized = message.strip()
    for prefix in ("Value error, ", "Assertion failed, "):
        if normalized.startswith(prefix):
            return normalized[len(prefix) :]
    return normalized

"""`fmt` command registration."""

from __future__ import annotations

from pathlib import Path

import typer
from rich.console import Console

from circlemap_elections.cli_support import CliGuard
from circlemap_elections.elections.profile import dump_profile, load_profile
from circlemap_elections.io.yaml_io import read_text, write_text_atomic


def register(app: typer.Typer, *, console: Console, guard: CliGuard) -> None:
    """Register `fmt` command."""

    @app.command("fmt")
    def fmt_cmd(
        profile_path: Path = typer.Option(
            ...,
            "--profile",
            "-p",
            help="Ballot profile (JSON or YAML) to rewrite in canonical JSON form.",
            exists=True,
            readable=True,
            dir_okay=False,
        ),
        check: bool = typer.Option(
            False,
            "--check",
            help="Do not write; exit 1 when the file is not in canonical form.",
        ),
    ) -> None:
        """Canonicalize a profile: sorted members and votes, merged duplicates, no zero weights."""

        with guard:
            before = read_text(profile_path)
            after = dump_profile(load_profile(profile_path))
            if before == after:
                console.print(f"already canonical: {profile_path}")
                return
            if check:
                console.print(f"not canonical: {profile_path}")
                raise typer.Exit(code=1)
            write_text_atomic(profile_path, after)
            console.print(f"updated: {profile_path}")

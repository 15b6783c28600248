"""CLI app wiring and registration."""

from __future__ import annotations

from pathlib import Path

import typer
from rich.console import Console

from circlemap_elections import __version__
from circlemap_elections.cli_support import CliGuard, CliSettings, handle_error
from circlemap_elections.commands import dynamics as dynamics_commands
from circlemap_elections.commands import elections as elections_commands
from circlemap_elections.commands import fmt as fmt_commands
from circlemap_elections.commands import invariant as invariant_commands
from circlemap_elections.commands import two_party as two_party_commands
from circlemap_elections.core.config import load_config
from circlemap_elections.core.errors import CircleMapError
from circlemap_elections.core.logging import configure_logging


def build_app(*, console: Console | None = None) -> typer.Typer:
    """Build Typer app with subcommands."""

    resolved_console = console or Console()
    guard = CliGuard(console=resolved_console)
    settings = CliSettings()

    app = typer.Typer(
        help="Circle-map dynamics and sequential party elections (Phragmén, Thiele).",
        no_args_is_help=True,
    )

    dynamics_commands.register(app, console=resolved_console, guard=guard, settings=settings)
    invariant_commands.register(app, console=resolved_console, guard=guard, settings=settings)
    two_party_commands.register(app, console=resolved_console, guard=guard, settings=settings)
    elections_commands.register(app, console=resolved_console, guard=guard, settings=settings)
    fmt_commands.register(app, console=resolved_console, guard=guard)

    def _version(value: bool) -> None:
        if value:
            typer.echo(f"circlemap {__version__}")
            raise typer.Exit()

    @app.callback()
    def main_callback(
        verbose: int = typer.Option(
            0,
            "--verbose",
            "-v",
            count=True,
            help="Log more (-v info, -vv debug).",
        ),
        config: Path | None = typer.Option(
            None,
            "--config",
            help="YAML file overriding numerical tolerances and caps.",
            exists=True,
            readable=True,
            dir_okay=False,
        ),
        version: bool = typer.Option(
            False,
            "--version",
            callback=_version,
            is_eager=True,
            help="Print the version and exit.",
        ),
    ) -> None:
        """Global options."""

        del version
        configure_logging(verbose)
        with guard:
            settings.numerics = load_config(config)

    return app


_default_console = Console()
app = build_app(console=_default_console)


def main() -> None:
    """Console entrypoint."""

    try:
        app()
    except CircleMapError as exc:
        handle_error(_default_console, exc)

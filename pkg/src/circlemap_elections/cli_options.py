"""Shared Typer option definitions."""

from __future__ import annotations

import typer

from circlemap_elections.core.config import OUTPUT_DIR_ENVVAR

a_option = typer.Option(..., "--a", help="Slope a of the map, 0 < a < 1.")

b_option = typer.Option(..., "--b", help="Offset b of the map, 0 <= b < 1.")

q_max_option = typer.Option(
    None,
    "--q-max",
    help="Largest denominator tried when certifying rationals (default: from config).",
)

seed_option = typer.Option(
    0,
    "--seed",
    help="Seed for every stochastic choice (random branches, tie lots).",
)

jobs_option = typer.Option(
    1,
    "--jobs",
    "-j",
    help="Worker processes for the sweep; rows are sorted regardless.",
)

branch_option = typer.Option(
    "lower",
    "--branch",
    help="Branch at the discontinuity: lower | upper | random | script:l,u,...",
)

tiebreak_option = typer.Option(
    "lowest",
    "--tiebreak",
    help="Tie-break rule: lowest | lot | script:<party names or indices>.",
)

profile_option = typer.Option(
    None,
    "--profile",
    "-p",
    help="Path to a JSON/YAML ballot profile.",
    exists=True,
    readable=True,
    dir_okay=False,
)

votes_option = typer.Option(
    None,
    "--votes",
    help='Compact profile instead of --profile, e.g. "1A,1B,1C,1AB,1AC".',
)

json_option = typer.Option(
    False,
    "--json",
    help="Emit machine-readable JSON (result plus a meta object).",
)

output_option = typer.Option(
    None,
    "--output",
    "-o",
    help="Write the full result to a file: CSV, or JSON when the name ends in .json.",
    dir_okay=False,
)

out_dir_option = typer.Option(
    None,
    "--out-dir",
    envvar=OUTPUT_DIR_ENVVAR,
    help="Directory for relative --output paths.",
    file_okay=False,
)

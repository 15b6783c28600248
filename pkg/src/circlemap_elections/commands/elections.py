"""`elect` and `thiele-limit` command registration."""

from __future__ import annotations

from pathlib import Path

import typer
from rich.console import Console

from circlemap_elections.cli_options import (
    json_option,
    out_dir_option,
    output_option,
    profile_option,
    seed_option,
    tiebreak_option,
    votes_option,
)
from circlemap_elections.cli_support import (
    CliGuard,
    CliSettings,
    ResultWriter,
    resolve_profile,
    resolve_tiebreak,
    validate_payload,
)
from circlemap_elections.core.arg_models import ElectArgs, ThieleLimitArgs
from circlemap_elections.elections.engine import (
    eventual_period,
    party_counts,
    run,
    seat_shares,
)
from circlemap_elections.elections.thiele_limit import (
    FlatDirections,
    block_decompose,
    compare_with_simulation,
    solve_limit,
)
from circlemap_elections.io.csv_io import RunHeader

WINNER_PREVIEW = 200


def register(
    app: typer.Typer, *, console: Console, guard: CliGuard, settings: CliSettings
) -> None:
    """Register `elect` and `thiele-limit` commands."""

    writer = ResultWriter(console=console)

    @app.command("elect")
    def elect_cmd(
        method: str = typer.Option(
            ..., "--method", "-m", help="phragmen | phragmen-reduced | thiele."
        ),
        profile_path: Path | None = profile_option,
        votes: str | None = votes_option,
        seats: int = typer.Option(..., "--seats", "-n", help="Number of seats to fill."),
        tiebreak: str = tiebreak_option,
        seed: int = seed_option,
        max_period: int = typer.Option(
            0, "--max-period", help="Also look for an eventual period up to this length."
        ),
        json_output: bool = json_option,
        output: Path | None = output_option,
        out_dir: Path | None = out_dir_option,
    ) -> None:
        """Run a sequential party election and report the winner sequence."""

        with guard:
            args = validate_payload(
                ElectArgs,
                {
                    "method": method.strip().lower(),
                    "seats": seats,
                    "tiebreak": tiebreak,
                    "seed": seed,
                    "max_period": max_period,
                },
            )
            profile = resolve_profile(profile_path, votes)
            rule = resolve_tiebreak(args.tiebreak, seed=args.seed, parties=profile.parties)
            numerics = settings.numerics
            sequence = run(
                args.method,
                profile,
                args.seats,
                rule,
                tie_tol=numerics.tie_tol,
                state_tol=numerics.state_tol,
                record_scores=output is not None,
            )
            counts = party_counts(sequence)
            shares = seat_shares(sequence)
            names = sequence.names()
            preview = names if len(names) <= WINNER_PREVIEW else names[:WINNER_PREVIEW] + "..."
            summary = [
                f"winners: {preview}",
                "seats: "
                + ", ".join(f"{p}={c}" for p, c in zip(profile.parties, counts, strict=True)),
                f"ties: {sum(sequence.tie_flags)}",
            ]
            result: dict[str, object] = {
                "sequence": sequence,
                "counts": dict(zip(profile.parties, counts, strict=True)),
                "shares": shares,
            }
            if args.max_period:
                found = eventual_period(sequence.winners, args.max_period)
                result["eventual_period"] = (
                    None if found is None else {"preperiod": found[0], "period": found[1]}
                )
                if found is not None:
                    summary.append(f"eventually periodic: preperiod {found[0]}, period {found[1]}")
            rows = [
                (
                    index + 1,
                    profile.parties[winner],
                    sequence.tie_flags[index],
                    *(sequence.per_step_scores[index] if sequence.per_step_scores else ()),
                )
                for index, winner in enumerate(sequence.winners)
            ]
            score_columns = [f"score_{index}" for index in range(1, profile.num_parties + 1)]
            writer.emit(
                header=RunHeader(
                    "elect",
                    args.seed,
                    {
                        "method": args.method,
                        "seats": args.seats,
                        "tiebreak": args.tiebreak,
                        "profile": None if profile_path is None else str(profile_path),
                        "votes": votes,
                    },
                ),
                result=result,
                columns=[
                    "step",
                    "winner",
                    "tie_flag",
                    *(score_columns if sequence.per_step_scores else []),
                ],
                rows=rows,
                json_output=json_output,
                output=output,
                out_dir=out_dir,
                title="Seats",
                summary=summary,
            )

    @app.command("thiele-limit")
    def thiele_limit_cmd(
        profile_path: Path | None = profile_option,
        votes: str | None = votes_option,
        seats: int = typer.Option(
            0, "--seats", "-n", help="Also simulate this many Thiele seats and compare."
        ),
        blocks: bool = typer.Option(
            False, "--blocks", help="Solve each connected block of parties separately."
        ),
        tiebreak: str = tiebreak_option,
        seed: int = seed_option,
        json_output: bool = json_option,
        output: Path | None = output_option,
        out_dir: Path | None = out_dir_option,
    ) -> None:
        """Limit seat shares of Thiele's method: the maximizer of sum v log(sum x)."""

        with guard:
            args = validate_payload(
                ThieleLimitArgs,
                {"seats": seats, "blocks": blocks, "tiebreak": tiebreak, "seed": seed},
            )
            profile = resolve_profile(profile_path, votes)
            numerics = settings.numerics
            limit = solve_limit(
                profile,
                enumeration_max=numerics.face_enumeration_max,
                max_iter=numerics.newton_max_iter,
                margin=numerics.uniqueness_margin,
            )
            result: dict[str, object] = {
                "parties": list(profile.parties),
                "limit": limit,
            }
            summary = [
                "support: " + ", ".join(profile.parties[i] for i in limit.support),
                f"objective: {limit.objective:.12g}",
                f"uniqueness: {type(limit.uniqueness).__name__}",
            ]
            if isinstance(limit.uniqueness, FlatDirections):
                summary.append(f"flat directions: {len(limit.uniqueness.basis)}")
            if args.blocks:
                found = block_decompose(
                    profile,
                    enumeration_max=numerics.face_enumeration_max,
                    max_iter=numerics.newton_max_iter,
                    margin=numerics.uniqueness_margin,
                )
                result["blocks"] = found
                for block in found:
                    members = "".join(profile.parties[i] for i in block.parties)
                    summary.append(f"block {members}: weight {block.weight:.12g}")
            if args.seats:
                rule = resolve_tiebreak(args.tiebreak, seed=args.seed, parties=profile.parties)
                comparison = compare_with_simulation(profile, args.seats, rule, limit=limit)
                result["simulation"] = comparison
                summary.append(
                    f"simulated shares after {args.seats} seats: distance "
                    f"{comparison.distance:.6g} across non-flat directions"
                )
            writer.emit(
                header=RunHeader("thiele-limit", args.seed, args.model_dump()),
                result=result,
                columns=["party", "share"],
                rows=list(zip(profile.parties, limit.point.x, strict=True)),
                json_output=json_output,
                output=output,
                out_dir=out_dir,
                title="Limit seat shares",
                summary=summary,
            )

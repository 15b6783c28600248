"""`two-party` and `staircase` command registration."""

from __future__ import annotations

from collections import Counter
from pathlib import Path

import typer
from rich.console import Console

from circlemap_elections.cli_options import (
    branch_option,
    jobs_option,
    json_option,
    out_dir_option,
    output_option,
    profile_option,
    q_max_option,
    seed_option,
    votes_option,
)
from circlemap_elections.cli_support import (
    CliGuard,
    CliSettings,
    ResultWriter,
    resolve_profile,
    validate_payload,
)
from circlemap_elections.core.arg_models import StaircaseArgs, TwoPartyArgs
from circlemap_elections.core.errors import ValidationError
from circlemap_elections.elections.engine import Method, run
from circlemap_elections.elections.two_party import (
    TwoPartyVotes,
    first_seat,
    predicted_pB,
    predicted_seats,
    region_pB,
)
from circlemap_elections.io.csv_io import RunHeader
from circlemap_elections.ops.sweeps import sweep_staircase


def _votes(
    args: TwoPartyArgs, profile_path: Path | None, votes: str | None
) -> tuple[TwoPartyVotes, tuple[str, str]]:
    if args.alpha is not None and args.beta is not None:
        if profile_path is not None or votes is not None:
            raise ValidationError("pass either --alpha/--beta or a profile, not both")
        return TwoPartyVotes.from_shares(args.alpha, args.beta), ("A", "B")
    profile = resolve_profile(profile_path, votes)
    shares = TwoPartyVotes.from_profile(profile)
    first, second = profile.parties
    return shares, (first, second)


def register(
    app: typer.Typer, *, console: Console, guard: CliGuard, settings: CliSettings
) -> None:
    """Register `two-party` and `staircase` commands."""

    writer = ResultWriter(console=console)

    @app.command("two-party")
    def two_party_cmd(
        alpha: float | None = typer.Option(None, "--alpha", help="Share of votes for A alone."),
        beta: float | None = typer.Option(None, "--beta", help="Share of votes for B alone."),
        profile_path: Path | None = profile_option,
        votes: str | None = votes_option,
        seats: int = typer.Option(
            0,
            "--seats",
            "-n",
            help="Also generate this many seats from the orbit and check them against Phragmén.",
        ),
        target: str | None = typer.Option(
            None, "--target", help="Test whether pB equals a fraction in (0, 1/2], e.g. 2/5."
        ),
        branch: str = branch_option,
        seed: int = seed_option,
        json_output: bool = json_option,
        output: Path | None = output_option,
        out_dir: Path | None = out_dir_option,
    ) -> None:
        """Phragmén with two parties through its circle map: limit share pB and seat pattern."""

        with guard:
            args = validate_payload(
                TwoPartyArgs,
                {
                    "alpha": alpha,
                    "beta": beta,
                    "seats": seats,
                    "target": target,
                    "branch": branch,
                    "seed": seed,
                },
            )
            shares, parties = _votes(args, profile_path, votes)
            numerics = settings.numerics
            prediction = predicted_pB(shares, q_max=numerics.q_max, tol=numerics.tol)
            low, high = prediction.bounds
            result: dict[str, object] = {
                "parties": list(parties),
                "votes": shares,
                "prediction": prediction,
            }
            share_text = f"{low:.12g}" if low == high else f"[{low:.12g}, {high:.12g}]"
            summary = [f"pB = {share_text} ({prediction.rho_kind.value})"]
            if prediction.reduced is not None:
                reduced = prediction.reduced
                summary.append(
                    f"map: a = {reduced.a:.12g}, b = {reduced.b:.12g}, b0 = {reduced.b0}"
                )
            leader = first_seat(shares)
            if leader is not None:
                summary.append(f"first seat: {parties[0] if leader == 'A' else parties[1]}")
            target_fraction = args.target_fraction()
            if target_fraction is not None:
                inside = region_pB(shares, target_fraction, q_max=numerics.q_max, tol=numerics.tol)
                result["target"] = {"pB": str(target_fraction), "inside": inside}
                summary.append(f"pB = {target_fraction}: {'yes' if inside else 'no'}")
            rows: list[tuple[object, ...]] = []
            if args.seats:
                predicted = predicted_seats(
                    shares,
                    args.seats,
                    args.policy(),
                    parties=parties,
                    tau_eps=numerics.tau_eps,
                )
                simulated = run(
                    Method.PHRAGMEN,
                    shares.to_profile(parties),
                    args.seats,
                    tie_tol=numerics.tie_tol,
                    state_tol=numerics.state_tol,
                    record_scores=False,
                )
                agree = predicted.winners == simulated.winners
                result["predicted"] = predicted
                result["simulated"] = simulated
                result["match"] = agree
                summary.append(f"predicted seats: {predicted.names()[:200]}")
                summary.append(
                    f"matches Phragmén: {'yes' if agree else 'no'} "
                    f"({sum(simulated.tie_flags)} tie(s) in the simulation)"
                )
                rows = [
                    (index + 1, parties[mine], parties[theirs], predicted.tie_flags[index])
                    for index, (mine, theirs) in enumerate(
                        zip(predicted.winners, simulated.winners, strict=True)
                    )
                ]
            writer.emit(
                header=RunHeader("two-party", args.seed, args.model_dump()),
                result=result,
                columns=["seat", "predicted", "phragmen", "tie"],
                rows=rows,
                json_output=json_output,
                output=output,
                out_dir=out_dir,
                title="Seats",
                summary=summary,
            )

    @app.command("staircase")
    def staircase_cmd(
        alphas: str = typer.Option(
            "0:1:21", "--alphas", help="Alpha grid: start:stop:count or a comma list."
        ),
        betas: str = typer.Option(
            "0:1:21", "--betas", help="Beta grid: start:stop:count or a comma list."
        ),
        q_max: int | None = q_max_option,
        jobs: int = jobs_option,
        json_output: bool = json_option,
        output: Path | None = output_option,
        out_dir: Path | None = out_dir_option,
    ) -> None:
        """pB over a grid of (alpha, beta) vote shares; cells with alpha + beta > 1 are skipped."""

        with guard:
            numerics = settings.numerics
            args = validate_payload(
                StaircaseArgs,
                {
                    "alphas": alphas,
                    "betas": betas,
                    "q_max": numerics.q_max if q_max is None else q_max,
                    "jobs": jobs,
                },
            )
            table = sweep_staircase(
                args.points(), jobs=args.jobs, q_max=args.q_max, tol=numerics.tol
            )
            rows = [
                (row.alpha, row.beta, row.p_b_lo, row.p_b_hi, row.rho_kind, row.q)
                for row in table
            ]
            kinds = Counter(row.rho_kind.value for row in table)
            summary = [
                f"cells: {len(table)}",
                ", ".join(f"{kind}: {count}" for kind, count in sorted(kinds.items())),
            ]
            writer.emit(
                header=RunHeader(
                    "staircase",
                    None,
                    {"alphas": args.alphas, "betas": args.betas, "q_max": args.q_max},
                ),
                result=table,
                columns=["alpha", "beta", "pB_lo", "pB_hi", "rho_kind", "q"],
                rows=rows,
                json_output=json_output,
                output=output,
                out_dir=out_dir,
                title="Staircase",
                summary=summary,
            )

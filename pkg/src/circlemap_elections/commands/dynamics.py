"""`orbit`, `rotnum` and `plateaus` command registration."""

from __future__ import annotations

from pathlib import Path

import typer
from rich.console import Console

from circlemap_elections.cli_options import (
    a_option,
    b_option,
    branch_option,
    jobs_option,
    json_option,
    out_dir_option,
    output_option,
    q_max_option,
    seed_option,
)
from circlemap_elections.cli_support import CliGuard, CliSettings, ResultWriter, validate_payload
from circlemap_elections.core.arg_models import OrbitArgs, PlateausArgs, RotnumArgs
from circlemap_elections.dynamics.circle_map import MapParams, orbit
from circlemap_elections.dynamics.rotation import (
    RationalRotation,
    RotationNumber,
    periodic_orbit,
    rho_bounds,
    rotation_number,
    rotation_number_orbit_estimate,
)
from circlemap_elections.io.csv_io import RunHeader
from circlemap_elections.ops.sweeps import sweep_plateaus


def describe_rotation(rotation: RotationNumber) -> str:
    if isinstance(rotation, RationalRotation):
        text = f"rho = {rotation.p}/{rotation.q} (rational, q={rotation.q}"
        if rotation.boundary_uncertain:
            text += ", boundary uncertain"
        return f"{text}; {rotation.boundary_case.value})"
    flag = ", boundary ambiguous" if rotation.boundary_ambiguous else ""
    return f"rho in [{rotation.lo:.17g}, {rotation.hi:.17g}] (enclosure{flag})"


def register(
    app: typer.Typer, *, console: Console, guard: CliGuard, settings: CliSettings
) -> None:
    """Register `orbit`, `rotnum` and `plateaus` commands."""

    writer = ResultWriter(console=console)

    @app.command("orbit")
    def orbit_cmd(
        a: float = a_option,
        b: float = b_option,
        x0: float = typer.Option(0.0, "--x0", help="Starting point in [0, 1]."),
        steps: int = typer.Option(20, "--steps", "-n", help="Number of iterations."),
        branch: str = branch_option,
        seed: int = seed_option,
        json_output: bool = json_option,
        output: Path | None = output_option,
        out_dir: Path | None = out_dir_option,
    ) -> None:
        """Iterate the map and list points, symbols and branch choices."""

        with guard:
            args = validate_payload(
                OrbitArgs,
                {"a": a, "b": b, "x0": x0, "steps": steps, "branch": branch, "seed": seed},
            )
            result = orbit(
                MapParams(a=args.a, b=args.b),
                args.x0,
                args.steps,
                args.policy(),
                tau_eps=settings.numerics.tau_eps,
            )
            choices = dict(result.choices_at_tau)
            rows = [
                (
                    index,
                    point,
                    result.symbols[index] if index < len(result.symbols) else None,
                    choices.get(index),
                )
                for index, point in enumerate(result.points)
            ]
            writer.emit(
                header=RunHeader("orbit", seed, args.model_dump()),
                result=result,
                columns=["i", "x", "symbol", "branch_at_tau"],
                rows=rows,
                json_output=json_output,
                output=output,
                out_dir=out_dir,
                title="Orbit",
                summary=[f"visits to tau: {len(result.choices_at_tau)}"],
            )

    @app.command("rotnum")
    def rotnum_cmd(
        a: float = a_option,
        b: float = b_option,
        q_max: int | None = q_max_option,
        estimate_steps: int = typer.Option(
            0,
            "--estimate-steps",
            help="Also estimate rho from the lift orbit over this many steps.",
        ),
        json_output: bool = json_option,
        output: Path | None = output_option,
        out_dir: Path | None = out_dir_option,
    ) -> None:
        """Certify the rotation number (exact rational or a rigorous enclosure)."""

        with guard:
            numerics = settings.numerics
            args = validate_payload(
                RotnumArgs,
                {
                    "a": a,
                    "b": b,
                    "q_max": numerics.q_max if q_max is None else q_max,
                    "tol": numerics.tol,
                    "estimate_steps": estimate_steps,
                },
            )
            params = MapParams(a=args.a, b=args.b)
            rotation = rotation_number(params, q_max=args.q_max, tol=args.tol)
            lo, hi = rho_bounds(params)
            result: dict[str, object] = {"rotation": rotation, "bracket": [lo, hi]}
            summary = [describe_rotation(rotation)]
            if isinstance(rotation, RationalRotation):
                cycle = periodic_orbit(params, q_max=args.q_max, tol=args.tol)
                result["periodic_orbit"] = cycle
                if cycle is not None:
                    rendered = ", ".join(f"{point:.12g}" for point in cycle.points)
                    summary.append(f"periodic orbit: {{{rendered}}}")
            if args.estimate_steps:
                estimate = rotation_number_orbit_estimate(params, args.estimate_steps)
                result["orbit_estimate"] = estimate
                summary.append(f"orbit estimate: [{estimate.lo:.12g}, {estimate.hi:.12g}]")
            writer.emit(
                header=RunHeader("rotnum", None, args.model_dump()),
                result=result,
                columns=["quantity", "value"],
                rows=[("rho", float(rotation)), ("bracket_lo", lo), ("bracket_hi", hi)],
                json_output=json_output,
                output=output,
                out_dir=out_dir,
                title="Rotation number",
                summary=summary,
            )

    @app.command("plateaus")
    def plateaus_cmd(
        a: float = a_option,
        q_max: int = typer.Option(60, "--q-max", help="Largest plateau denominator."),
        jobs: int = jobs_option,
        json_output: bool = json_option,
        output: Path | None = output_option,
        out_dir: Path | None = out_dir_option,
    ) -> None:
        """List rational plateaus [b-(a,p/q), b+(a,p/q)] for q <= q-max."""

        with guard:
            args = validate_payload(PlateausArgs, {"a": a, "q_max": q_max, "jobs": jobs})
            sweep = sweep_plateaus(args.a, args.q_max, jobs=args.jobs)
            rows = [
                (str(item.rho), item.rho.denominator, item.lower, item.upper, item.length)
                for item in sweep.plateaus
            ]
            writer.emit(
                header=RunHeader("plateaus", None, {"a": args.a, "q_max": args.q_max}),
                result=sweep,
                columns=["rho", "q", "b_lower", "b_upper", "length"],
                rows=rows,
                json_output=json_output,
                output=output,
                out_dir=out_dir,
                title="Plateaus",
                summary=[
                    f"total length: {sweep.total_length:.17g}",
                    f"missing length bound: {sweep.missing_bound:.3g}",
                ],
            )

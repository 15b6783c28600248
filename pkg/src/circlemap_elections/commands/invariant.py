"""`invariant-set` and `measure` command registration."""

from __future__ import annotations

from pathlib import Path

import typer
from rich.console import Console

from circlemap_elections.cli_options import (
    a_option,
    b_option,
    branch_option,
    json_option,
    out_dir_option,
    output_option,
    seed_option,
)
from circlemap_elections.cli_support import CliGuard, CliSettings, ResultWriter, validate_payload
from circlemap_elections.commands.dynamics import describe_rotation
from circlemap_elections.core.arg_models import InvariantSetArgs, MeasureArgs
from circlemap_elections.dynamics.circle_map import MapParams
from circlemap_elections.dynamics.invariant import (
    Gauge,
    LogInverseGauge,
    LogInverseSquaredGauge,
    MeasureSample,
    PowerGauge,
    classify,
    empirical_measure,
    gaps,
    gauge_cover_value,
    invariant_intervals,
    ks_distance,
    pushforward_measure,
    sample_mean,
)
from circlemap_elections.dynamics.rotation import chi, rotation_number
from circlemap_elections.io.csv_io import RunHeader


def _gauge(name: str, alpha: float) -> Gauge:
    match name:
        case "power":
            return PowerGauge(alpha)
        case "log2":
            return LogInverseSquaredGauge()
        case _:
            return LogInverseGauge()


def register(
    app: typer.Typer, *, console: Console, guard: CliGuard, settings: CliSettings
) -> None:
    """Register `invariant-set` and `measure` commands."""

    writer = ResultWriter(console=console)

    @app.command("invariant-set")
    def invariant_set_cmd(
        a: float = a_option,
        b: float = b_option,
        depth: int = typer.Option(10, "--depth", "-n", help="Image depth n of f^n([0,1])."),
        gap_count: int = typer.Option(
            0, "--gaps", help="Also list the first m gaps (irrational regime only)."
        ),
        gauge: str = typer.Option(
            "log", "--gauge", help="Gauge for the cover value: log | log2 | power."
        ),
        gauge_alpha: float = typer.Option(
            0.5, "--gauge-alpha", help="Exponent of the power gauge t^alpha."
        ),
        json_output: bool = json_option,
        output: Path | None = output_option,
        out_dir: Path | None = out_dir_option,
    ) -> None:
        """Nested images of [0,1], the dynamics class and the gap structure."""

        with guard:
            args = validate_payload(
                InvariantSetArgs,
                {
                    "a": a,
                    "b": b,
                    "depth": depth,
                    "gaps": gap_count,
                    "gauge": gauge,
                    "gauge_alpha": gauge_alpha,
                },
            )
            numerics = settings.numerics
            params = MapParams(a=args.a, b=args.b)
            classification = classify(params, q_max=numerics.q_max, tol=numerics.tol)
            intervals = invariant_intervals(params, args.depth)
            result: dict[str, object] = {
                "classification": classification,
                "depth": args.depth,
                "intervals": intervals,
            }
            summary = [
                f"class: {classification.case.value}"
                + (" (ambiguous)" if classification.ambiguous else ""),
                describe_rotation(classification.rotation),
                f"{len(intervals)} interval(s), total length {intervals.total_length:.17g}",
            ]
            if args.depth >= 1:
                cover = gauge_cover_value(params, args.depth, _gauge(args.gauge, args.gauge_alpha))
                result["gauge_cover_value"] = cover
                summary.append(f"gauge cover value ({args.gauge}): {cover:.12g}")
            if args.gaps:
                found = gaps(
                    params,
                    classification.rotation,
                    args.gaps,
                    q_max=numerics.q_max,
                    tol=numerics.tol,
                )
                result["gaps"] = found
                summary.extend(
                    f"gap {item.index}: ({item.left:.12g}, {item.right:.12g})" for item in found
                )
            writer.emit(
                header=RunHeader("invariant-set", None, args.model_dump()),
                result=result,
                columns=["left", "right"],
                rows=intervals.intervals,
                json_output=json_output,
                output=output,
                out_dir=out_dir,
                title="Intervals",
                summary=summary,
            )

    @app.command("measure")
    def measure_cmd(
        a: float = a_option,
        b: float = b_option,
        kind: str = typer.Option(
            "empirical", "--kind", help="Sample: empirical | pushforward | both."
        ),
        n: int = typer.Option(10_000, "--n", help="Orbit points for the empirical sample."),
        m: int = typer.Option(10_000, "--m", help="Grid points for the pushforward sample."),
        x0: float = typer.Option(0.0, "--x0", help="Orbit start for the empirical sample."),
        branch: str = branch_option,
        seed: int = seed_option,
        json_output: bool = json_option,
        output: Path | None = output_option,
        out_dir: Path | None = out_dir_option,
    ) -> None:
        """Sample the invariant measure from an orbit and/or by pushforward."""

        with guard:
            args = validate_payload(
                MeasureArgs,
                {
                    "a": a,
                    "b": b,
                    "kind": kind.strip().lower(),
                    "n": n,
                    "m": m,
                    "x0": x0,
                    "branch": branch,
                    "seed": seed,
                },
            )
            numerics = settings.numerics
            params = MapParams(a=args.a, b=args.b)
            rotation = rotation_number(params, q_max=numerics.q_max, tol=numerics.tol)
            samples: list[MeasureSample] = []
            if args.kind in ("empirical", "both"):
                samples.append(empirical_measure(params, args.x0, args.n, args.policy()))
            if args.kind in ("pushforward", "both"):
                samples.append(
                    pushforward_measure(params, rotation, args.m, q_max=numerics.q_max)
                )
            center = chi(params, float(rotation))
            result: dict[str, object] = {"chi": center, "samples": samples}
            summary = [describe_rotation(rotation), f"chi = {center:.12g}"]
            for sample in samples:
                mean = sample_mean(sample)
                summary.append(f"{sample.kind.value} mean: {mean:.12g}")
            if len(samples) == 2:
                distance = ks_distance(samples[0], samples[1])
                result["ks_distance"] = distance
                summary.append(f"KS distance: {distance:.6g}")
            if len(samples) == 1:
                columns = [samples[0].kind.value.lower()]
                rows: list[tuple[object, ...]] = [(float(x),) for x in samples[0].points]
            else:
                columns = ["kind", "x"]
                rows = [
                    (sample.kind.value, float(x)) for sample in samples for x in sample.points
                ]
            writer.emit(
                header=RunHeader("measure", args.seed, args.model_dump()),
                result=result,
                columns=columns,
                rows=rows,
                json_output=json_output,
                output=output,
                out_dir=out_dir,
                title="Measure sample",
                summary=summary,
            )

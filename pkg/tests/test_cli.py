from __future__ import annotations

import json
import math
import shutil
from pathlib import Path

import pytest
from rich.console import Console
from typer.testing import CliRunner

from circlemap_elections import __version__
from circlemap_elections.cli_app import build_app
from circlemap_elections.core.config import OUTPUT_DIR_ENVVAR
from circlemap_elections.dynamics.rotation import b_lower
from circlemap_elections.io.csv_io import read_csv

runner = CliRunner()
app = build_app(console=Console(width=200))

PROFILES = Path("tests/golden/profiles")
FMT = Path("tests/golden/fmt")


def _irrational_b() -> str:
    return repr(b_lower(0.8, 1 / math.sqrt(2)).mid)


def test_version() -> None:
    result = runner.invoke(app, ["--version"])

    assert result.exit_code == 0, result.output
    assert f"circlemap {__version__}" in result.output


def test_rotnum_reports_half_plateau() -> None:
    result = runner.invoke(app, ["rotnum", "--a", "0.5", "--b", "0.7"])

    assert result.exit_code == 0, result.output
    assert "rho = 1/2 (rational, q=2; Interior)" in result.output
    assert "periodic orbit: {" in result.output


def test_rotnum_json_carries_meta() -> None:
    result = runner.invoke(
        app, ["rotnum", "--a", "0.5", "--b", "0.7", "--estimate-steps", "200", "--json"]
    )

    assert result.exit_code == 0, result.output
    payload = json.loads(result.stdout)
    assert payload["meta"]["command"] == "rotnum"
    assert payload["meta"]["version"] == __version__
    assert (payload["rotation"]["p"], payload["rotation"]["q"]) == (1, 2)
    low, high = payload["orbit_estimate"]["lo"], payload["orbit_estimate"]["hi"]
    assert low <= 0.5 <= high


def test_rotnum_irrational_enclosure() -> None:
    result = runner.invoke(app, ["rotnum", "--a", "0.8", "--b", _irrational_b()])

    assert result.exit_code == 0, result.output
    assert "rho in [" in result.output
    assert "(enclosure" in result.output


@pytest.mark.parametrize(
    ("args", "message"),
    [
        (["rotnum", "--a", "1.5", "--b", "0.2"], "--a must satisfy 0 < a < 1"),
        (["rotnum", "--a", "0.5", "--b", "1.0"], "--b must satisfy 0 <= b < 1"),
        (["orbit", "--a", "0.5", "--b", "0.2", "--branch", "sideways"], "unknown branch policy"),
        (["two-party", "--alpha", "0.6"], "--alpha and --beta must be given together"),
        (["two-party", "--alpha", "0.7", "--beta", "0.6"], "must be <= 1"),
        (["two-party", "--alpha", "0.4", "--beta", "0.3", "--target", "2/3"], "(0, 1/2]"),
        (["staircase", "--alphas", "0:1"], "grid must be start:stop:count"),
    ],
)
def test_argument_errors_exit_with_validation_code(args: list[str], message: str) -> None:
    result = runner.invoke(app, args)

    assert result.exit_code == 2, result.output
    assert "error:" in result.output
    assert message in result.output


def test_orbit_summary_counts_visits_to_the_discontinuity() -> None:
    result = runner.invoke(
        app, ["orbit", "--a", "0.5", "--b", repr(2 / 3), "--x0", "0", "--steps", "4"]
    )

    assert result.exit_code == 0, result.output
    assert "visits to tau: 2" in result.output


def test_orbit_writes_csv_with_header(tmp_path: Path) -> None:
    target = tmp_path / "orbit.csv"

    result = runner.invoke(
        app,
        ["orbit", "--a", "0.5", "--b", "0.7", "--steps", "5", "--output", str(target)],
    )

    assert result.exit_code == 0, result.output
    assert "wrote:" in result.output
    assert target.read_text(encoding="utf-8").startswith(f"# circlemap {__version__}")
    table = read_csv(target)
    assert table.meta["command"] == "orbit"
    assert table.columns == ["i", "x", "symbol", "branch_at_tau"]
    assert len(table.rows) == 6


def test_output_dir_from_environment(tmp_path: Path) -> None:
    result = runner.invoke(
        app,
        ["orbit", "--a", "0.5", "--b", "0.7", "--steps", "3", "--output", "orbit.json"],
        env={OUTPUT_DIR_ENVVAR: str(tmp_path)},
    )

    assert result.exit_code == 0, result.output
    payload = json.loads((tmp_path / "orbit.json").read_text(encoding="utf-8"))
    assert payload["meta"]["command"] == "orbit"
    assert len(payload["points"]) == 4


def test_plateaus_json() -> None:
    result = runner.invoke(app, ["plateaus", "--a", "0.5", "--q-max", "10", "--json"])

    assert result.exit_code == 0, result.output
    payload = json.loads(result.stdout)
    assert len(payload["plateaus"]) == 32
    assert 0.0 < payload["total_length"] <= 1.0


def test_plateaus_summary() -> None:
    result = runner.invoke(app, ["plateaus", "--a", "0.6", "--q-max", "12", "--jobs", "2"])

    assert result.exit_code == 0, result.output
    assert "total length:" in result.output
    assert "missing length bound:" in result.output


def test_invariant_set_rational_case() -> None:
    result = runner.invoke(app, ["invariant-set", "--a", "0.5", "--b", "0.7", "--depth", "6"])

    assert result.exit_code == 0, result.output
    assert "class: " in result.output
    assert "gauge cover value (log):" in result.output


def test_invariant_set_lists_gaps_in_irrational_case() -> None:
    result = runner.invoke(
        app,
        [
            "invariant-set",
            "--a",
            "0.8",
            "--b",
            _irrational_b(),
            "--depth",
            "8",
            "--gaps",
            "3",
            "--gauge",
            "power",
        ],
    )

    assert result.exit_code == 0, result.output
    assert "gap 1:" in result.output
    assert "gauge cover value (power):" in result.output


def test_measure_compares_both_samples() -> None:
    result = runner.invoke(
        app,
        [
            "measure",
            "--a",
            "0.8",
            "--b",
            _irrational_b(),
            "--kind",
            "both",
            "--n",
            "2000",
            "--m",
            "2000",
            "--json",
        ],
    )

    assert result.exit_code == 0, result.output
    payload = json.loads(result.stdout)
    assert [sample["kind"] for sample in payload["samples"]] == ["Empirical", "Pushforward"]
    assert 0.0 <= payload["ks_distance"] <= 1.0


def test_elect_phragmen_alternates() -> None:
    result = runner.invoke(
        app,
        [
            "elect",
            "--method",
            "phragmen",
            "--profile",
            str(PROFILES / "ebad.yaml"),
            "--seats",
            "10",
            "--max-period",
            "4",
        ],
    )

    assert result.exit_code == 0, result.output
    assert "winners: ABABABABAB" in result.output
    assert "seats: A=5, B=5" in result.output
    assert "ties: 0" in result.output
    assert "eventually periodic: preperiod 0, period 2" in result.output


def test_elect_scripted_tie_break() -> None:
    result = runner.invoke(
        app,
        [
            "elect",
            "-m",
            "phragmen",
            "--votes",
            "0.6A, 0.2B, 0.2AB",
            "--seats",
            "3",
            "--tiebreak",
            "script:B",
        ],
    )

    assert result.exit_code == 0, result.output
    assert "winners: AAB" in result.output
    assert "ties: 1" in result.output


def test_elect_writes_scores(tmp_path: Path) -> None:
    target = tmp_path / "seats.csv"

    result = runner.invoke(
        app,
        [
            "elect",
            "--method",
            "thiele",
            "--profile",
            str(PROFILES / "five_votes.json"),
            "--seats",
            "4",
            "--output",
            str(target),
        ],
    )

    assert result.exit_code == 0, result.output
    table = read_csv(target)
    assert table.columns == ["step", "winner", "tie_flag", "score_1", "score_2", "score_3"]
    assert "method=thiele" in table.meta["params"]
    assert "five_votes.json" in table.meta["params"]
    assert table.rows[0][:2] == ["1", "A"]
    assert float(table.rows[0][3]) == 3.0


@pytest.mark.parametrize(
    ("args", "message"),
    [
        (["--method", "dhondt", "--votes", "1A, 1B", "--seats", "2"], "method"),
        (
            [
                "--method",
                "thiele",
                "--votes",
                "1A, 1B",
                "--profile",
                str(PROFILES / "ebad.yaml"),
                "--seats",
                "2",
            ],
            "pass exactly one of --profile or --votes",
        ),
        (
            ["--method", "thiele", "--votes", "1A, 1B", "--seats", "2", "--tiebreak", "coin"],
            "unknown tie-break",
        ),
        (["--method", "thiele", "--votes", "1A, 1B", "--seats", "0"], "seats"),
    ],
)
def test_elect_errors(args: list[str], message: str) -> None:
    result = runner.invoke(app, ["elect", *args])

    assert result.exit_code == 2, result.output
    assert message in result.output


def test_thiele_limit_on_five_votes() -> None:
    result = runner.invoke(
        app,
        ["thiele-limit", "--profile", str(PROFILES / "five_votes.json"), "--seats", "2000"],
    )

    assert result.exit_code == 0, result.output
    assert "0.447213595" in result.output
    assert "uniqueness: Unique" in result.output
    assert "simulated shares after 2000 seats: distance" in result.output


def test_thiele_limit_json_and_flat_directions() -> None:
    result = runner.invoke(app, ["thiele-limit", "--votes", "1A, 1BC", "--json"])

    assert result.exit_code == 0, result.output
    payload = json.loads(result.stdout)
    limit = payload["limit"]
    assert limit["point"][0] == pytest.approx(0.5, abs=1e-9)
    assert payload["meta"]["command"] == "thiele-limit"

    summary = runner.invoke(app, ["thiele-limit", "--votes", "1A, 1BC"])
    assert "uniqueness: FlatDirections" in summary.output
    assert "flat directions: 1" in summary.output


def test_two_party_prediction_matches_phragmen() -> None:
    result = runner.invoke(
        app,
        ["two-party", "--alpha", "0.4", "--beta", "0.3", "--seats", "20", "--target", "1/2"],
    )

    assert result.exit_code == 0, result.output
    assert "pB = 0.5 (rational)" in result.output
    assert "b0 = 0" in result.output
    assert "first seat: A" in result.output
    assert "pB = 1/2: yes" in result.output
    assert "matches Phragmén: yes" in result.output


def test_two_party_from_profile_uses_party_names(tmp_path: Path) -> None:
    profile = tmp_path / "named.yaml"
    profile.write_text(
        "parties: [Left, Right]\n"
        "votes:\n"
        "  - set: [Left]\n    weight: 0.2\n"
        "  - set: [Right]\n    weight: 0.55\n"
        "  - set: [Left, Right]\n    weight: 0.25\n",
        encoding="utf-8",
    )

    result = runner.invoke(app, ["two-party", "--profile", str(profile), "--seats", "30"])

    assert result.exit_code == 0, result.output
    assert "first seat: Right" in result.output
    assert "matches Phragmén: yes" in result.output


def test_two_party_rejects_three_parties() -> None:
    result = runner.invoke(app, ["two-party", "--profile", str(PROFILES / "five_votes.json")])

    assert result.exit_code == 2, result.output
    assert "error:" in result.output


def test_staircase_grid_json() -> None:
    result = runner.invoke(
        app, ["staircase", "--alphas", "0.2,0.4", "--betas", "0.1,0.3", "--json"]
    )

    assert result.exit_code == 0, result.output
    rows = json.loads(result.stdout)["result"]
    assert len(rows) == 4
    cell = next(row for row in rows if (row["alpha"], row["beta"]) == (0.4, 0.3))
    assert cell["pB_lo"] == pytest.approx(0.5)
    assert cell["rho_kind"] == "rational"


def test_staircase_reports_unresolved_cells() -> None:
    result = runner.invoke(
        app, ["staircase", "--alphas", "0.5,0.6", "--betas", "0.3,0.3999999", "--json"]
    )

    assert result.exit_code == 0, result.output
    rows = json.loads(result.stdout)["result"]
    assert len(rows) == 4
    steep = next(row for row in rows if (row["alpha"], row["beta"]) == (0.6, 0.3999999))
    assert steep["rho_kind"] == "unresolved"
    assert steep["pB_lo"] is None
    regular = next(row for row in rows if (row["alpha"], row["beta"]) == (0.5, 0.3))
    assert regular["rho_kind"] == "rational"


def test_measure_csv_header_echoes_parameters(tmp_path: Path) -> None:
    target = tmp_path / "measure.csv"

    result = runner.invoke(
        app,
        [
            "measure",
            "--a",
            "0.5",
            "--b",
            "0.7",
            "--n",
            "50",
            "--x0",
            "0.25",
            "--seed",
            "3",
            "--output",
            str(target),
        ],
    )

    assert result.exit_code == 0, result.output
    table = read_csv(target)
    assert table.meta["command"] == "measure"
    assert table.meta["seed"] == "3"
    for fragment in ("a=0.5", "b=0.69999999999999996", "kind=empirical", "n=50", "x0=0.25"):
        assert fragment in table.meta["params"]
    assert table.columns == ["empirical"]


def test_config_file_overrides_numerics(tmp_path: Path) -> None:
    config = tmp_path / "numerics.yaml"
    config.write_text("q_max: 8\n", encoding="utf-8")

    result = runner.invoke(
        app, ["--config", str(config), "rotnum", "--a", "0.5", "--b", "0.7"]
    )
    assert result.exit_code == 0, result.output
    assert "rho = 1/2" in result.output

    config.write_text("q_max: 0\n", encoding="utf-8")
    broken = runner.invoke(
        app, ["--config", str(config), "rotnum", "--a", "0.5", "--b", "0.7"]
    )
    assert broken.exit_code == 2, broken.output
    assert "q_max" in broken.output


def test_fmt_check_reports_messy_profile(tmp_path: Path) -> None:
    messy = tmp_path / "messy.yaml"
    shutil.copyfile(FMT / "messy.yaml", messy)

    check = runner.invoke(app, ["fmt", "--profile", str(messy), "--check"])
    assert check.exit_code == 1, check.output
    assert "not canonical:" in check.output

    rewrite = runner.invoke(app, ["fmt", "--profile", str(messy)])
    assert rewrite.exit_code == 0, rewrite.output
    assert "updated:" in rewrite.output
    expected = (FMT / "messy.expected.json").read_text(encoding="utf-8")
    assert messy.read_text(encoding="utf-8") == expected


def test_fmt_leaves_canonical_profile_alone(tmp_path: Path) -> None:
    canonical = tmp_path / "five_votes.json"
    shutil.copyfile(PROFILES / "five_votes.json", canonical)
    before = canonical.read_text(encoding="utf-8")

    result = runner.invoke(app, ["fmt", "--profile", str(canonical), "--check"])

    assert result.exit_code == 0, result.output
    assert "already canonical:" in result.output
    assert canonical.read_text(encoding="utf-8") == before

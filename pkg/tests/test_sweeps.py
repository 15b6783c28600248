from __future__ import annotations

import pytest

from circlemap_elections.core.errors import ValidationError
from circlemap_elections.dynamics.rotation import plateau_sweep
from circlemap_elections.elections.two_party import staircase, staircase_grid
from circlemap_elections.ops.sweeps import sweep_plateaus, sweep_staircase


def test_plateau_sweep_is_independent_of_worker_count() -> None:
    serial = sweep_plateaus(0.6, 25, jobs=1)
    parallel = sweep_plateaus(0.6, 25, jobs=2)

    assert serial == plateau_sweep(0.6, 25)
    assert parallel == serial


def test_staircase_sweep_is_sorted_and_matches_serial_rows() -> None:
    points = staircase_grid([0.5, 0.1, 0.3], [0.2, 0.0, 0.4])

    rows = sweep_staircase(reversed(points), jobs=2, q_max=32)

    assert rows == staircase(points, q_max=32)
    assert [(row.alpha, row.beta) for row in rows] == sorted(points)


def test_sweeps_reject_bad_arguments() -> None:
    with pytest.raises(ValidationError, match="jobs"):
        sweep_plateaus(0.5, 10, jobs=0)
    with pytest.raises(ValidationError, match="q-max"):
        sweep_plateaus(0.5, 0)
    with pytest.raises(ValidationError):
        sweep_plateaus(1.5, 10)

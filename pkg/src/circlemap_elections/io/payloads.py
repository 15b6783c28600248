"""JSON payloads for result objects."""

from __future__ import annotations

import json
import math
from fractions import Fraction
from functools import singledispatch

from circlemap_elections.dynamics.circle_map import Orbit
from circlemap_elections.dynamics.invariant import (
    Classification,
    Gap,
    IntervalUnion,
    MeasureSample,
)
from circlemap_elections.dynamics.rotation import (
    EnclosedRotation,
    PeriodicOrbitInfo,
    Plateau,
    PlateauSweep,
    RationalRotation,
)
from circlemap_elections.dynamics.series import Enclosure
from circlemap_elections.elections.engine import SeatSequence
from circlemap_elections.elections.simplex import SimplexPoint
from circlemap_elections.elections.thiele_limit import (
    Block,
    FlatDirections,
    LimitResult,
    SimulationComparison,
    Unique,
    Unknown,
)
from circlemap_elections.elections.two_party import (
    Prediction,
    ReducedMap,
    StaircaseRow,
    TwoPartyVotes,
)
from circlemap_elections.io.csv_io import RunHeader

type Payload = dict[str, object] | list[object] | str | int | float | bool | None


@singledispatch
def to_payload(value: object) -> Payload:
    raise TypeError(f"no payload for {type(value).__name__}")


@to_payload.register(list)
@to_payload.register(tuple)
def _sequence(value: list[object] | tuple[object, ...]) -> Payload:
    return [to_payload(item) for item in value]


@to_payload.register(dict)
def _mapping(value: dict[str, object]) -> Payload:
    return {key: to_payload(item) for key, item in value.items()}


@to_payload.register(int)
@to_payload.register(str)
@to_payload.register(type(None))
def _scalar(value: int | str | None) -> Payload:
    return value


@to_payload.register
def _fraction(value: Fraction) -> Payload:
    return str(value)


@to_payload.register
def _float(value: float) -> Payload:
    return value if math.isfinite(value) else None


@to_payload.register
def _rational(value: RationalRotation) -> Payload:
    return {
        "kind": "rational",
        "p": value.p,
        "q": value.q,
        "value": float(value),
        "boundary_case": value.boundary_case.value,
        "boundary_uncertain": value.boundary_uncertain,
    }


@to_payload.register
def _enclosed(value: EnclosedRotation) -> Payload:
    return {
        "kind": "enclosure",
        "lo": value.lo,
        "hi": value.hi,
        "boundary_ambiguous": value.boundary_ambiguous,
    }


@to_payload.register
def _enclosure(value: Enclosure) -> Payload:
    return {"lo": value.lo, "hi": value.hi}


@to_payload.register
def _orbit(value: Orbit) -> Payload:
    return {
        "points": list(value.points),
        "symbols": list(value.symbols),
        "choices_at_tau": [
            {"step": step, "branch": branch} for step, branch in value.choices_at_tau
        ],
    }


@to_payload.register
def _plateau(value: Plateau) -> Payload:
    return {
        "rho": str(value.rho),
        "q": value.rho.denominator,
        "lower": value.lower,
        "upper": value.upper,
        "length": value.length,
    }


@to_payload.register
def _sweep(value: PlateauSweep) -> Payload:
    return {
        "a": value.a,
        "q_max": value.q_max,
        "count": len(value.plateaus),
        "total_length": value.total_length,
        "missing_bound": value.missing_bound,
        "plateaus": [to_payload(item) for item in value.plateaus],
    }


@to_payload.register
def _periodic(value: PeriodicOrbitInfo) -> Payload:
    return {
        "p": value.p,
        "q": value.q,
        "points": list(value.points),
        "boundary_case": value.boundary_case.value,
        "boundary_uncertain": value.boundary_uncertain,
        "return_defect": value.return_defect,
    }


@to_payload.register
def _classification(value: Classification) -> Payload:
    return {
        "case": value.case.value,
        "ambiguous": value.ambiguous,
        "rotation": to_payload(value.rotation),
    }


@to_payload.register
def _intervals(value: IntervalUnion) -> Payload:
    return {
        "count": len(value),
        "total_length": value.total_length,
        "intervals": [[left, right] for left, right in value.intervals],
    }


@to_payload.register
def _gap(value: Gap) -> Payload:
    return {"index": value.index, "left": value.left, "right": value.right, "length": value.length}


@to_payload.register
def _measure(value: MeasureSample) -> Payload:
    return {"kind": value.kind.value, "size": len(value), "points": value.points.tolist()}


@to_payload.register
def _seats(value: SeatSequence) -> Payload:
    return {
        "method": value.method.value,
        "parties": list(value.parties),
        "winners": [value.parties[winner] for winner in value.winners],
        "seats": len(value),
        "ties": [index for index, flag in enumerate(value.tie_flags) if flag],
    }


@to_payload.register
def _simplex(value: SimplexPoint) -> Payload:
    return list(value.x)


@to_payload.register
def _votes(value: TwoPartyVotes) -> Payload:
    return {"alpha": value.alpha, "beta": value.beta, "gamma_ab": value.gamma_ab}


@to_payload.register
def _reduced(value: ReducedMap) -> Payload:
    return {
        "a": value.a,
        "b_raw": value.b_raw,
        "b": value.b,
        "b0": value.b0,
        "w0": value.w0,
        "ell": value.ell,
        "start_choice": value.start_choice,
    }


@to_payload.register
def _prediction(value: Prediction) -> Payload:
    low, high = value.bounds
    return {
        "pB": to_payload(value.p_b),
        "pB_lo": low,
        "pB_hi": high,
        "rho": None if value.rho is None else to_payload(value.rho),
        "rho_kind": value.rho_kind.value,
        "b0": value.b0,
        "map": None if value.reduced is None else to_payload(value.reduced),
        "swapped": value.swapped,
    }


@to_payload.register
def _staircase_row(value: StaircaseRow) -> Payload:
    return {
        "alpha": value.alpha,
        "beta": value.beta,
        "pB_lo": to_payload(value.p_b_lo),
        "pB_hi": to_payload(value.p_b_hi),
        "rho_kind": value.rho_kind.value,
        "q": value.q,
    }


@to_payload.register
def _unique(value: Unique) -> Payload:
    del value
    return {"kind": "Unique"}


@to_payload.register
def _flat(value: FlatDirections) -> Payload:
    return {"kind": "FlatDirections", "basis": [list(column) for column in value.basis]}


@to_payload.register
def _unknown(value: Unknown) -> Payload:
    del value
    return {"kind": "Unknown"}


@to_payload.register
def _limit(value: LimitResult) -> Payload:
    return {
        "point": to_payload(value.point),
        "support": list(value.support),
        "objective": to_payload(value.objective),
        "residual": value.residual,
        "uniqueness": to_payload(value.uniqueness),
    }


@to_payload.register
def _block(value: Block) -> Payload:
    return {
        "parties": list(value.parties),
        "weight": value.weight,
        "limit": to_payload(value.inner),
    }


@to_payload.register
def _comparison(value: SimulationComparison) -> Payload:
    return {
        "limit": to_payload(value.limit),
        "shares": to_payload(value.shares),
        "distance": value.distance,
    }


def render_json(header: RunHeader, result: object) -> str:
    """Result payload plus a `meta` object describing the run."""

    body = to_payload(result)
    payload: dict[str, object] = {"meta": header.as_meta()}
    if isinstance(body, dict):
        payload.update(body)
    else:
        payload["result"] = body
    return json.dumps(payload, ensure_ascii=False, indent=2)

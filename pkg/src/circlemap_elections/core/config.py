"""Numerical configuration and calibrated thresholds."""

from __future__ import annotations

from importlib.resources import files
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, model_validator
from pydantic import ValidationError as PydanticValidationError

from circlemap_elections.core.errors import ValidationError
from circlemap_elections.core.normalize import format_pydantic_error
from circlemap_elections.io.yaml_io import load_any_yaml, parse_yaml_text

OUTPUT_DIR_ENVVAR = "CIRCLEMAP_OUTPUT_DIR"
CALIBRATION_RESOURCE = "calibration.yaml"


class NumericsConfig(BaseModel):
    """Tolerances and caps shared by every numerical routine."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    tau_eps: float = Field(default=1e-12, gt=0.0, lt=1e-3)
    tol: float = Field(default=1e-12, gt=0.0, lt=1e-2)
    q_max: int = Field(default=64, ge=1, le=100_000)
    tie_tol: float = Field(default=1e-9, ge=0.0, lt=1e-2)
    state_tol: float = Field(default=1e-9, ge=0.0, lt=1e-2)
    symbol_tol: float = Field(default=1e-9, gt=0.0, lt=0.5)
    uniqueness_margin: float = Field(default=1e-8, gt=0.0, lt=1.0)
    face_enumeration_max: int = Field(default=12, ge=1, le=20)
    newton_max_iter: int = Field(default=200, ge=1)

    @model_validator(mode="after")
    def _validate(self) -> NumericsConfig:
        if self.tau_eps >= self.symbol_tol:
            raise ValueError("tau-eps must be smaller than symbol-tol")
        return self


class Calibration(BaseModel):
    """Empirical thresholds; values and provenance live in data/calibration.yaml."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    ks_max_distance: float = Field(gt=0.0, lt=1.0)
    pushforward_mean_tol: float = Field(gt=0.0)
    thiele_simulation_distance: float = Field(gt=0.0)
    phragmen_prediction_constant: float = Field(gt=0.0)
    symbol_deviation_max: float = Field(gt=0.0)


DEFAULT_CONFIG = NumericsConfig()


def load_config(path: Path | None) -> NumericsConfig:
    """Load numerics config from a YAML file; defaults when path is None."""

    if path is None:
        return DEFAULT_CONFIG
    payload = load_any_yaml(path)
    if payload is None:
        return DEFAULT_CONFIG
    if not isinstance(payload, dict):
        raise ValidationError(f"config root must be a mapping/object (file: {path})")
    try:
        return NumericsConfig.model_validate(payload)
    except PydanticValidationError as exc:
        raise ValidationError(
            format_pydantic_error(exc, header=f"invalid config file {path}:")
        ) from exc


def load_calibration() -> Calibration:
    """Load the packaged calibration thresholds."""

    raw = files("circlemap_elections.data").joinpath(CALIBRATION_RESOURCE).read_text("utf-8")
    payload = parse_yaml_text(raw, source=CALIBRATION_RESOURCE)
    if not isinstance(payload, dict):
        raise ValidationError("calibration root must be a mapping/object")
    return Calibration.model_validate(payload)

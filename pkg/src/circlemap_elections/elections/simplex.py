"""Points of the probability simplex over the parties."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from circlemap_elections.core.errors import ValidationError

SUM_TOLERANCE = 1e-12


@dataclass(frozen=True, slots=True)
class SimplexPoint:
    """Seat-share vector: x_i >= 0 and Σ x_i = 1."""

    x: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.x:
            raise ValidationError("simplex point needs at least one coordinate")
        if any(not math.isfinite(value) or value < 0.0 for value in self.x):
            raise ValidationError(f"simplex coordinates must be finite and >= 0 (got {self.x})")
        total = math.fsum(self.x)
        if abs(total - 1.0) > SUM_TOLERANCE * max(1, len(self.x)):
            raise ValidationError(f"simplex coordinates must sum to 1 (got {total!r})")

    @classmethod
    def from_array(cls, values: np.ndarray | Sequence[float]) -> SimplexPoint:
        """Clip tiny negatives and renormalize before validating."""

        clipped = np.clip(np.asarray(values, dtype=np.float64), 0.0, None)
        total = math.fsum(clipped.tolist())
        if total <= 0.0:
            raise ValidationError("cannot normalize a zero vector onto the simplex")
        return cls(tuple(float(value) for value in clipped / total))

    @classmethod
    def barycenter(cls, n: int) -> SimplexPoint:
        return cls(tuple(1.0 / n for _ in range(n)))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.x, dtype=np.float64)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(index for index, value in enumerate(self.x) if value > 0.0)

    def distance(self, other: SimplexPoint) -> float:
        if len(self.x) != len(other.x):
            raise ValidationError("simplex points have different dimensions")
        return float(np.linalg.norm(self.as_array() - other.as_array()))

    def __len__(self) -> int:
        return len(self.x)


def project_to_simplex(values: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {x >= 0, Σx = 1} by the sorted-threshold rule."""

    ordered = np.sort(values)[::-1]
    running = np.cumsum(ordered)
    ranks = np.arange(1, values.size + 1, dtype=np.float64)
    admissible = ordered + (1.0 - running) / ranks > 0.0
    last = int(np.nonzero(admissible)[0][-1])
    shift = (1.0 - running[last]) / (last + 1.0)
    return np.maximum(values + shift, 0.0)


def dirichlet_samples(n: int, count: int, seed: int) -> np.ndarray:
    """`count` uniform points of the n-simplex, one per row."""

    rng = np.random.default_rng(seed)
    return rng.dirichlet(np.ones(n), size=count)

"""Limit seat shares of Thiele's method: the maximizers of ψ(x) = Σ v_σ log x_σ on the simplex.

x_σ = Σ_{i∈σ} x_i. ψ is concave, so a point of a face S (x_i > 0 exactly for i ∈ S) maximizes
ψ iff ∂_iψ = V on S and ∂_jψ <= V off S, where V = Σ v_σ.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy import linalg

from circlemap_elections.core.config import DEFAULT_CONFIG
from circlemap_elections.core.errors import SolverError, ValidationError
from circlemap_elections.elections.engine import Method, TieBreak, run, seat_shares
from circlemap_elections.elections.profile import BallotProfile
from circlemap_elections.elections.simplex import (
    SimplexPoint,
    dirichlet_samples,
    project_to_simplex,
)

logger = logging.getLogger(__name__)

NEG_INF = -math.inf
STATIONARITY_TOL = 1e-8
MIN_FACE_COORDINATE = 1e-9
ASCENT_ITERATIONS = 2000
ASCENT_SUPPORT_CUTOFF = 1e-6


@dataclass(frozen=True, slots=True)
class Unique:
    """The maximizer is a single point."""


@dataclass(frozen=True, slots=True)
class FlatDirections:
    """ψ is constant along these orthonormal directions (full coordinates, Σ d_i = 0)."""

    basis: tuple[tuple[float, ...], ...]


@dataclass(frozen=True, slots=True)
class Unknown:
    """Curvature too close to the margin to decide."""


type Uniqueness = Unique | FlatDirections | Unknown


@dataclass(frozen=True, slots=True)
class LimitResult:
    point: SimplexPoint
    support: tuple[int, ...]
    objective: float
    residual: float
    uniqueness: Uniqueness


@dataclass(frozen=True, slots=True)
class Block:
    """Connected component of the ballot hypergraph with its vote share and inner limit."""

    parties: tuple[int, ...]
    weight: float
    inner: LimitResult


@dataclass(frozen=True, slots=True)
class SimulationComparison:
    limit: LimitResult
    shares: SimplexPoint
    distance: float


def _incidence(profile: BallotProfile) -> tuple[np.ndarray, np.ndarray]:
    """Ballot-by-party 0/1 matrix and the ballot weights."""

    matrix = np.zeros((len(profile.ballots), profile.num_parties), dtype=np.float64)
    for row, ballot in enumerate(profile.ballots):
        matrix[row, list(ballot.members)] = 1.0
    weights = np.asarray([ballot.weight for ballot in profile.ballots], dtype=np.float64)
    return matrix, weights


def _check_dimension(profile: BallotProfile, x: SimplexPoint) -> None:
    if len(x) != profile.num_parties:
        raise ValidationError(
            f"point has {len(x)} coordinates but the profile has {profile.num_parties} parties"
        )


def _psi(matrix: np.ndarray, weights: np.ndarray, x: np.ndarray) -> float:
    sums = matrix @ x
    if np.any(sums <= 0.0):
        return NEG_INF
    return math.fsum((weights * np.log(sums)).tolist())


def objective(profile: BallotProfile, x: SimplexPoint) -> float:
    """ψ(x); NEG_INF when some voted-for set has x_σ = 0."""

    _check_dimension(profile, x)
    matrix, weights = _incidence(profile)
    return _psi(matrix, weights, x.as_array())


def gradient(profile: BallotProfile, x: SimplexPoint) -> np.ndarray:
    """∂_iψ = Σ_{σ∋i} v_σ/x_σ; components touching a set with x_σ = 0 are +inf."""

    _check_dimension(profile, x)
    matrix, weights = _incidence(profile)
    sums = matrix @ x.as_array()
    empty = sums <= 0.0
    ratios = np.divide(weights, sums, out=np.zeros_like(weights), where=~empty)
    result = matrix.T @ ratios
    blocked = matrix[empty].sum(axis=0) > 0.0
    result[blocked] = math.inf
    return result


def directional_derivatives(profile: BallotProfile, x: SimplexPoint) -> np.ndarray:
    """∂*_iψ = ∂_iψ - Σ_j x_j ∂_jψ, the derivative towards vertex i."""

    grad = gradient(profile, x)
    point = x.as_array()
    positive = point > 0.0
    mean = math.fsum((point[positive] * grad[positive]).tolist())
    return grad - mean


def _stationarity(
    matrix: np.ndarray, weights: np.ndarray, x: np.ndarray, support: tuple[int, ...]
) -> float:
    """Relative defect of ∂_iψ = V on the support plus excess of ∂_jψ over V off it."""

    total = math.fsum(weights.tolist())
    sums = matrix @ x
    if np.any(sums <= 0.0):
        return math.inf
    grad = matrix.T @ (weights / sums)
    inside = np.zeros(x.size, dtype=bool)
    inside[list(support)] = True
    defect = float(np.max(np.abs(grad[inside] - total))) / total
    if np.any(~inside):
        defect = max(defect, float(np.max(grad[~inside] - total)) / total)
    return max(defect, 0.0)


def _face_newton(
    sub: np.ndarray, weights: np.ndarray, *, max_iter: int
) -> np.ndarray | None:
    """Damped Newton for max ψ on the relative interior of a face, from its barycenter."""

    size = sub.shape[1]
    total = math.fsum(weights.tolist())
    y = np.full(size, 1.0 / size)
    value = _psi(sub, weights, y)
    border = np.concatenate([np.ones(size), [0.0]])
    for _ in range(max_iter):
        sums = sub @ y
        grad = sub.T @ (weights / sums)
        if float(np.max(np.abs(grad - total))) <= 1e-14 * total:
            break
        hessian = -(sub.T * (weights / sums**2)) @ sub
        kkt = np.zeros((size + 1, size + 1))
        kkt[:size, :size] = hessian
        kkt[:size, size] = -1.0
        kkt[size, :] = border
        rhs = np.concatenate([-grad, [0.0]])
        step = np.linalg.lstsq(kkt, rhs, rcond=None)[0][:size]
        shrinking = step < 0.0
        limit = float(np.min(-y[shrinking] / step[shrinking])) if np.any(shrinking) else math.inf
        t = min(1.0, 0.99 * limit)
        trial, trial_value = y, value
        while t > 1e-12:
            trial = y + t * step
            trial_value = _psi(sub, weights, trial)
            if trial_value >= value - 1e-15 * abs(value):
                break
            t *= 0.5
        else:
            break
        y, value = trial, trial_value
        if float(np.max(np.abs(t * step))) <= 1e-16:
            break
    if float(np.min(y)) < MIN_FACE_COORDINATE:
        return None
    return y / math.fsum(y.tolist())


def _classify(
    matrix: np.ndarray,
    weights: np.ndarray,
    x: np.ndarray,
    support: tuple[int, ...],
    margin: float,
) -> Uniqueness:
    """Curvature of ψ on the face tangent space {d : d_j = 0 off S, Σ d = 0}."""

    size = len(support)
    if size == 1:
        return Unique()
    sub = matrix[:, list(support)]
    sums = sub @ x[list(support)]
    hessian = -(sub.T * (weights / sums**2)) @ sub
    tangent = linalg.null_space(np.ones((1, size)))
    reduced = tangent.T @ hessian @ tangent
    eigenvalues = linalg.eigvalsh(reduced)
    scale = max(1.0, float(np.max(np.abs(eigenvalues))))
    flat = linalg.null_space(np.vstack([sub, np.ones((1, size))]), rcond=margin)
    top = float(np.max(eigenvalues))
    if top < -margin * scale and flat.shape[1] == 0:
        return Unique()
    if abs(top) <= margin * scale and flat.shape[1] > 0:
        basis = np.zeros((x.size, flat.shape[1]))
        basis[list(support), :] = flat
        return FlatDirections(tuple(tuple(float(v) for v in column) for column in basis.T))
    logger.warning("uniqueness undecided: top reduced-Hessian eigenvalue %.3e", top)
    return Unknown()


def _covers(matrix: np.ndarray, support: tuple[int, ...]) -> bool:
    return bool(np.all(matrix[:, list(support)].sum(axis=1) > 0.0))


def _ascent_support(matrix: np.ndarray, weights: np.ndarray) -> tuple[int, ...]:
    """Support of a projected-gradient ascent iterate, for profiles too wide to enumerate."""

    size = matrix.shape[1]
    total = math.fsum(weights.tolist())
    x = np.full(size, 1.0 / size)
    value = _psi(matrix, weights, x)
    rate = 1.0 / total
    for _ in range(ASCENT_ITERATIONS):
        grad = matrix.T @ (weights / (matrix @ x))
        while rate > 1e-16:
            trial = project_to_simplex(x + rate * grad)
            trial_value = _psi(matrix, weights, trial)
            if trial_value >= value:
                break
            rate *= 0.5
        else:
            break
        x, value = trial, trial_value
        rate *= 2.0
    return tuple(int(i) for i in np.nonzero(x > ASCENT_SUPPORT_CUTOFF)[0])


def _candidate_faces(
    matrix: np.ndarray, weights: np.ndarray, enumeration_max: int
) -> list[tuple[int, ...]]:
    size = matrix.shape[1]
    if size <= enumeration_max:
        faces = [face for k in range(size, 0, -1) for face in combinations(range(size), k)]
    else:
        guess = _ascent_support(matrix, weights)
        logger.debug("projected ascent suggests support %s", guess)
        faces = [guess, tuple(range(size))]
    return [face for face in faces if face and _covers(matrix, face)]


def solve_limit(
    profile: BallotProfile,
    *,
    enumeration_max: int = DEFAULT_CONFIG.face_enumeration_max,
    max_iter: int = DEFAULT_CONFIG.newton_max_iter,
    margin: float = DEFAULT_CONFIG.uniqueness_margin,
) -> LimitResult:
    """Maximize ψ face by face, largest faces first, lexicographic within a size.

    The first face holding a stationary point that also passes the off-face test is optimal
    and carries the largest support of any maximizer.
    """

    matrix, weights = _incidence(profile)
    size = profile.num_parties
    for face in _candidate_faces(matrix, weights, enumeration_max):
        y = _face_newton(matrix[:, list(face)], weights, max_iter=max_iter)
        if y is None:
            continue
        x = np.zeros(size)
        x[list(face)] = y
        residual = _stationarity(matrix, weights, x, face)
        if residual > STATIONARITY_TOL:
            logger.debug("face %s rejected (residual %.3e)", face, residual)
            continue
        point = SimplexPoint.from_array(x)
        uniqueness = _classify(matrix, weights, point.as_array(), face, margin)
        logger.debug("face %s optimal, residual %.3e, %s", face, residual, uniqueness)
        return LimitResult(
            point=point,
            support=face,
            objective=_psi(matrix, weights, point.as_array()),
            residual=residual,
            uniqueness=uniqueness,
        )
    raise SolverError(f"no stationary point found on any face for parties {profile.parties}")


def block_decompose(
    profile: BallotProfile,
    *,
    enumeration_max: int = DEFAULT_CONFIG.face_enumeration_max,
    max_iter: int = DEFAULT_CONFIG.newton_max_iter,
    margin: float = DEFAULT_CONFIG.uniqueness_margin,
) -> list[Block]:
    """Connected components of the sets voted for, each solved on its own."""

    parent = list(range(profile.num_parties))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for ballot in profile.ballots:
        first, *rest = ballot.members
        for member in rest:
            parent[find(member)] = find(first)

    groups: dict[int, list[int]] = {}
    for party in range(profile.num_parties):
        groups.setdefault(find(party), []).append(party)
    total = profile.total_weight
    blocks: list[Block] = []
    for members in sorted(groups.values()):
        mask = sum(1 << party for party in members)
        share = math.fsum(b.weight for b in profile.ballots if b.mask & mask) / total
        inner = solve_limit(
            profile.restrict(members),
            enumeration_max=enumeration_max,
            max_iter=max_iter,
            margin=margin,
        )
        blocks.append(Block(parties=tuple(members), weight=share, inner=inner))
    return blocks


def compose_blocks(blocks: list[Block], n: int) -> SimplexPoint:
    """x_i = q_j x'_i for party i of block j."""

    x = np.zeros(n)
    for block in blocks:
        x[list(block.parties)] = block.weight * block.inner.point.as_array()
    return SimplexPoint.from_array(x)


def compare_with_simulation(
    profile: BallotProfile,
    n_seats: int,
    tiebreak: TieBreak | None = None,
    *,
    limit: LimitResult | None = None,
) -> SimulationComparison:
    """Distance from the simulated shares to the limit, measured across flat directions."""

    result = limit or solve_limit(profile)
    sequence = run(Method.THIELE, profile, n_seats, tiebreak, record_scores=False)
    shares = seat_shares(sequence)
    offset = shares.as_array() - result.point.as_array()
    if isinstance(result.uniqueness, FlatDirections):
        basis = np.asarray(result.uniqueness.basis, dtype=np.float64).T
        offset = offset - basis @ (basis.T @ offset)
    return SimulationComparison(result, shares, float(np.linalg.norm(offset)))


def pairs_only_limit(profile: BallotProfile) -> SimplexPoint:
    """Closed form for three parties voted for only in pairs AB, AC and BC."""

    if profile.num_parties != 3 or any(len(b.members) != 2 for b in profile.ballots):
        raise ValidationError("pairs-only limit needs 3 parties and only two-party ballots")
    ab = next((b.weight for b in profile.ballots if b.mask == 0b011), 0.0)
    ac = next((b.weight for b in profile.ballots if b.mask == 0b101), 0.0)
    bc = next((b.weight for b in profile.ballots if b.mask == 0b110), 0.0)
    if ab > ac + bc:
        return SimplexPoint.from_array([ac, bc, 0.0])
    if ac > ab + bc:
        return SimplexPoint.from_array([ab, 0.0, bc])
    if bc > ab + ac:
        return SimplexPoint.from_array([0.0, ab, ac])
    return SimplexPoint.from_array([ab + ac - bc, ab + bc - ac, ac + bc - ab])


def objective_dominance(
    profile: BallotProfile, x: SimplexPoint, *, samples: int = 1000, seed: int = 0
) -> float:
    """Largest ψ(y) - ψ(x) over uniform random y; <= 0 up to rounding when x is optimal."""

    matrix, weights = _incidence(profile)
    base = _psi(matrix, weights, x.as_array())
    points = dirichlet_samples(profile.num_parties, samples, seed)
    sums = points @ matrix.T
    with np.errstate(divide="ignore"):
        values = np.log(sums) @ weights
    return float(np.max(values)) - base

"""Hardy inequalities on balls and cubes as discrete generalized eigenvalue problems.

For a domain D of size ell and a point y the quotient

    (c0 int_D |grad f|^2 + c1/ell^2 int_D f^2) / (1/4 int_D f^2 / |x - y|^2)

is minimised over cell-centred finite-volume functions. The inequality with
constants (c0, c1) holds on the grid when the minimum is at least one.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy import integrate, linalg, optimize, sparse
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, cg, eigsh

from config import (
    DENSE_EIGEN_LIMIT,
    HARDY_BALL_C0,
    HARDY_BALL_C1,
    HARDY_C0,
    HARDY_C1,
    QUAD_RTOL,
    RAYLEIGH_TOL,
)

from .errors import EigensolverError, IndefiniteAssemblyError, InvalidArgumentError, QuadratureError
from .grid import GridField
from .spectral2 import relative_residuals, solve_lowest

logger = logging.getLogger(__name__)

Domain = Literal["ball", "cube"]
Outer = Literal["natural", "dirichlet"]

# Cells whose centre lies within this many spacings of y get exact integrals.
NEAR_CELLS = 2.0
_CG_RTOL = 1e-12


@dataclass(frozen=True)
class RayleighProblem:
    """Cube [0, ell]^3 or ball |x| <= ell, ``cells`` cells per ell, singularity at y."""

    domain: Domain
    ell: float
    y: tuple[float, float, float]
    cells: int
    c0: float
    c1: float
    outer: Outer = "natural"

    def __post_init__(self) -> None:
        if self.domain not in ("ball", "cube"):
            raise InvalidArgumentError(f"unknown domain: {self.domain}")
        if not self.ell > 0:
            raise InvalidArgumentError(f"ell must be positive, got {self.ell}")
        if self.cells < 2:
            raise InvalidArgumentError(f"need at least two cells per ell, got {self.cells}")
        if self.c0 < 0 or self.c1 < 0:
            raise InvalidArgumentError(f"coefficients must be non-negative, got ({self.c0}, {self.c1})")
        if self.outer not in ("natural", "dirichlet"):
            raise InvalidArgumentError(f"unknown outer boundary: {self.outer}")
        y = tuple(float(c) for c in self.y)
        if len(y) != 3:
            raise InvalidArgumentError(f"y must be a point in R^3, got {self.y!r}")
        object.__setattr__(self, "y", y)

    @property
    def h(self) -> float:
        return self.ell / self.cells


@dataclass(frozen=True)
class RayleighResult:
    value: float
    residual: float
    unknowns: int
    y_used: tuple[float, float, float]
    h: float


@dataclass(frozen=True)
class FeasibilityRow:
    c0: float
    c1: float
    y: tuple[float, float, float]
    cells: tuple[int, ...]
    values: tuple[float, ...]
    extrapolated: float

    @property
    def feasible(self) -> bool:
        return self.extrapolated >= 1.0


@dataclass(frozen=True)
class BestConstants:
    rows: tuple[FeasibilityRow, ...]
    frontier: dict[float, float]

    def feasible(self, c0: float, c1: float) -> bool:
        return all(r.feasible for r in self.rows if r.c0 == c0 and r.c1 == c1)


def lemma1_problem(ell: float = 1.0, cells: int = 40) -> RayleighProblem:
    return RayleighProblem("ball", ell, (0.0, 0.0, 0.0), cells, HARDY_BALL_C0, HARDY_BALL_C1)


def lemma2_problem(y: Sequence[float], ell: float = 1.0, cells: int = 40) -> RayleighProblem:
    return RayleighProblem("cube", ell, tuple(y), cells, HARDY_C0, HARDY_C1)


def classic_problem(ell: float = 1.0, cells: int = 8) -> RayleighProblem:
    """Plain Hardy quotient on a ball with the function killed at the outer sphere."""

    return RayleighProblem("ball", ell, (0.0, 0.0, 0.0), cells, 1.0, 0.0, outer="dirichlet")


def proof_constants(eps: float, delta: float) -> tuple[float, float]:
    """Constants obtained from the ball argument for a given (eps, delta); (1/6, 2/3) gives (2, 9/2)."""

    if not 0 < eps < 1 or not delta > 0:
        raise InvalidArgumentError(f"need 0 < eps < 1 and delta > 0, got ({eps}, {delta})")
    c0 = (1 + delta) / (1 - eps)
    c1 = (1 + delta) / (delta * (1 - eps)) + 1 / (4 * eps)
    return c0, c1


def closest_point_in_cube(y: Sequence[float], ell: float) -> tuple[float, float, float]:
    return tuple(float(c) for c in np.clip(np.asarray(y, dtype=float), 0.0, ell))


def projected_problem(p: RayleighProblem) -> RayleighProblem:
    """The cube problem with y moved to its nearest point of the cube.

    No cell is closer to y than to the projection, so the weights only grow
    and lambda_min of the projected problem is a lower bound for p.
    """

    if p.domain != "cube":
        raise InvalidArgumentError(f"projection needs the cube domain, got {p.domain}")
    return dataclasses.replace(p, y=closest_point_in_cube(p.y, p.ell))


def is_exterior(y: Sequence[float], ell: float) -> bool:
    return closest_point_in_cube(y, ell) != tuple(float(c) for c in y)


def lemma2_sample_points(ell: float, count: int, rng: np.random.Generator) -> list[tuple[float, float, float]]:
    """All eight corners, four exterior points, then uniform interior points up to ``count``."""

    if count < 12:
        raise InvalidArgumentError(f"need room for 8 corners and 4 exterior points, got count={count}")
    corners = [tuple(float(c) * ell for c in corner) for corner in np.ndindex(2, 2, 2)]
    exterior = [
        (-0.5 * ell, 0.5 * ell, 0.5 * ell),
        (1.5 * ell, 1.25 * ell, 0.5 * ell),
        (0.5 * ell, -0.75 * ell, 1.5 * ell),
        (2.0 * ell, 2.0 * ell, 2.0 * ell),
    ]
    interior = [tuple(float(c) for c in row) for row in rng.random((count - 12, 3)) * ell]
    return corners + exterior + interior


def _face_integral(d: float, u0: float, u1: float, v0: float, v1: float) -> float:
    """int over [u0,u1] x [v0,v1] of 1 / (d^2 + u^2 + v^2), d > 0."""

    def inner(u: float) -> float:
        A = math.sqrt(d * d + u * u)
        return (math.atan(v1 / A) - math.atan(v0 / A)) / A

    points = [0.0] if u0 < 0.0 < u1 else None
    value, error = integrate.quad(inner, u0, u1, points=points, epsabs=0.0, epsrel=QUAD_RTOL, limit=200)
    if error > 1e3 * QUAD_RTOL * abs(value) + 1e-300:
        raise QuadratureError(f"face integral did not converge: err={error:.3g}")
    return value


def box_inverse_square_integral(lower: Sequence[float], upper: Sequence[float], y: Sequence[float]) -> float:
    """int over the box of 1/|x - y|^2, through div(z/|z|^2) = 1/|z|^2 as a sum of face fluxes."""

    lo = np.asarray(lower, dtype=float) - np.asarray(y, dtype=float)
    hi = np.asarray(upper, dtype=float) - np.asarray(y, dtype=float)
    total = 0.0
    for axis in range(3):
        u, v = (k for k in range(3) if k != axis)
        for flux in (hi[axis], -lo[axis]):
            if flux == 0.0:
                continue
            total += flux * _face_integral(abs(flux), lo[u], hi[u], lo[v], hi[v])
    return total


def _snap(p: RayleighProblem, centres: np.ndarray) -> np.ndarray:
    y = np.asarray(p.y)
    if np.min(np.max(np.abs(centres - y), axis=1)) < 1e-9 * p.h:
        logger.info("y=%s sits on a cell centre; moving it by h/3", p.y)
        y = y + p.h / 3.0
    return y


def _layout(p: RayleighProblem) -> tuple[np.ndarray, np.ndarray]:
    """Active cell centres and the (m, m, m) grid of active indices (-1 outside the domain)."""

    n = p.cells
    h = p.h
    if p.domain == "cube":
        m, origin = n, 0.0
    else:
        m, origin = 2 * n, -p.ell
    axis = origin + (np.arange(m) + 0.5) * h
    X, Y, Z = np.meshgrid(axis, axis, axis, indexing="ij")
    centres = np.stack([X, Y, Z], axis=-1).reshape(-1, 3)
    active = np.ones(centres.shape[0], dtype=bool)
    if p.domain == "ball":
        active = np.sum(centres * centres, axis=1) <= p.ell**2
    index = np.full(centres.shape[0], -1, dtype=np.int64)
    index[active] = np.arange(int(active.sum()))
    return centres[active], index.reshape(m, m, m)


def _stiffness(p: RayleighProblem, index: np.ndarray) -> sparse.csr_matrix:
    size = int(index.max()) + 1
    h = p.h
    rows, cols, data = [], [], []
    for axis in range(3):
        a = np.moveaxis(index, axis, 0)[:-1].ravel()
        b = np.moveaxis(index, axis, 0)[1:].ravel()
        keep = (a >= 0) & (b >= 0)
        a, b = a[keep], b[keep]
        face = np.full(a.size, h)
        rows += [a, b, a, b]
        cols += [a, b, b, a]
        data += [face, face, -face, -face]
    if p.outer == "dirichlet":
        padded = np.pad(index, 1, constant_values=-1)
        inner = padded[1:-1, 1:-1, 1:-1]
        missing = np.zeros(index.shape, dtype=np.int64)
        for axis in range(3):
            for shift in (-1, 1):
                missing += np.roll(padded, shift, axis=axis)[1:-1, 1:-1, 1:-1] < 0
        cells = inner >= 0
        rows.append(inner[cells])
        cols.append(inner[cells])
        data.append(2.0 * h * missing[cells])
    K = sparse.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(size, size)
    )
    return K.tocsr()


def _weights(p: RayleighProblem, centres: np.ndarray, y: np.ndarray) -> np.ndarray:
    h = p.h
    dist = np.linalg.norm(centres - y, axis=1)
    weights = 0.25 * h**3 / dist**2
    near = np.flatnonzero(dist <= NEAR_CELLS * h)
    for i in near:
        weights[i] = 0.25 * box_inverse_square_integral(centres[i] - h / 2, centres[i] + h / 2, y)
    if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
        raise IndefiniteAssemblyError("singular weight has a non-positive or infinite cell entry")
    logger.debug("hardy weights: %d exact cells around y=%s", near.size, tuple(y))
    return weights


def assemble_rayleigh(p: RayleighProblem) -> tuple[sparse.csr_matrix, sparse.csr_matrix, sparse.csr_matrix, np.ndarray]:
    """Stiffness K, numerator A = c0 K + c1/ell^2 h^3 I, weight W and the y actually used."""

    centres, index = _layout(p)
    y = _snap(p, centres)
    K = _stiffness(p, index)
    W = sparse.diags(_weights(p, centres, y)).tocsr()
    mass = (p.c1 / p.ell**2) * p.h**3
    A = (p.c0 * K + mass * sparse.identity(K.shape[0])).tocsr()
    return K, A, W, y


def _positive_definite(p: RayleighProblem) -> bool:
    return p.c1 > 0 or (p.outer == "dirichlet" and p.c0 > 0)


def _inverse_iteration(A: sparse.csr_matrix, W: sparse.csr_matrix) -> tuple[float, np.ndarray]:
    jacobi = sparse.diags(1.0 / A.diagonal())

    def apply(v: np.ndarray) -> np.ndarray:
        x, info = cg(A, v, rtol=_CG_RTOL, maxiter=20 * A.shape[0], M=jacobi)
        if info != 0:
            raise EigensolverError(f"inner conjugate-gradient solve stopped with info={info}")
        return x

    inverse = LinearOperator(A.shape, matvec=apply, dtype=float)
    try:
        values, vectors = eigsh(A, k=1, M=W, sigma=0.0, which="LM", OPinv=inverse, tol=RAYLEIGH_TOL)
    except ArpackNoConvergence as exc:
        raise EigensolverError("shift-invert Lanczos did not converge") from exc
    return float(values[0]), vectors


def solve_rayleigh(p: RayleighProblem) -> RayleighResult:
    _, A, W, y = assemble_rayleigh(p)
    size = A.shape[0]
    if size <= DENSE_EIGEN_LIMIT or not _positive_definite(p):
        values, vectors, residuals = solve_lowest(A, W, 1, RAYLEIGH_TOL)
        value = float(values[0])
    else:
        value, vectors = _inverse_iteration(A, W)
        residuals = relative_residuals(A, W, np.array([value]), vectors)
    logger.info(
        "%s ell=%g y=%s cells=%d (c0, c1)=(%g, %g): lambda_min=%.8f",
        p.domain, p.ell, p.y, p.cells, p.c0, p.c1, value,
    )
    return RayleighResult(value, float(residuals[0]), size, tuple(float(c) for c in y), p.h)


def min_rayleigh(p: RayleighProblem) -> float:
    return solve_rayleigh(p).value


def critical_mass_coefficient(p: RayleighProblem, c0: float | None = None) -> float:
    """Smallest c1 for which (c0, c1) is feasible on this grid.

    Feasibility means c0 K + c1/ell^2 h^3 I - W is positive semi-definite, so
    c1* = ell^2 lambda_max(W - c0 K) / h^3. Grids too large for a dense
    solve bisect on c1 instead.
    """

    c0 = p.c0 if c0 is None else c0
    K, _, W, _ = assemble_rayleigh(dataclasses.replace(p, c0=c0))
    if K.shape[0] <= DENSE_EIGEN_LIMIT:
        top = linalg.eigvalsh((W - c0 * K).toarray(), subset_by_index=[K.shape[0] - 1, K.shape[0] - 1])
        return float(p.ell**2 * top[0] / p.h**3)

    def gap(c1: float) -> float:
        if c1 == 0.0 and p.outer == "natural":
            # constants have zero numerator
            return -1.0
        return min_rayleigh(dataclasses.replace(p, c0=c0, c1=c1)) - 1.0

    if p.outer == "dirichlet" and c0 > 0 and gap(0.0) >= 0:
        return 0.0
    hi = 1.0
    while gap(hi) < 0:
        hi *= 2.0
    return optimize.brentq(gap, 0.0, hi, xtol=1e-8 * hi)


def richardson(values: Sequence[float], ratio: float, order: float = 1.0) -> float:
    """Extrapolate the last two ladder values, refined by ``ratio``, with error O(h^order)."""

    if len(values) < 2:
        raise InvalidArgumentError("Richardson extrapolation needs at least two values")
    if not ratio > 1:
        raise InvalidArgumentError(f"refinement ratio must exceed 1, got {ratio}")
    factor = ratio**order
    return (factor * values[-1] - values[-2]) / (factor - 1.0)


def best_constants(
    domain: Domain,
    ys: Sequence[Sequence[float]],
    ladder: Sequence[int],
    c0_grid: Sequence[float],
    c1_grid: Sequence[float],
    *,
    ell: float = 1.0,
    outer: Outer = "natural",
) -> BestConstants:
    """Feasibility of every (c0, c1) for every y along a grid ladder, plus the c1*(c0) frontier."""

    cells = tuple(int(n) for n in ladder)
    if len(cells) < 2 or any(b <= a for a, b in zip(cells, cells[1:])):
        raise InvalidArgumentError(f"ladder must be strictly increasing with >= 2 steps, got {ladder}")
    ratio = cells[-1] / cells[-2]
    rows = []
    for y in ys:
        for c0 in c0_grid:
            for c1 in c1_grid:
                values = tuple(
                    min_rayleigh(RayleighProblem(domain, ell, tuple(y), n, c0, c1, outer)) for n in cells
                )
                rows.append(FeasibilityRow(c0, c1, tuple(y), cells, values, richardson(values, ratio)))
    frontier = {}
    for c0 in c0_grid:
        worst = -math.inf
        for y in ys:
            per_grid = [
                critical_mass_coefficient(RayleighProblem(domain, ell, tuple(y), n, c0, 0.0, outer)) for n in cells
            ]
            worst = max(worst, richardson(per_grid, ratio))
        frontier[float(c0)] = worst
    return BestConstants(tuple(rows), frontier)


def reflect_extend(f: GridField) -> GridField:
    """Even reflection of a field on [0, ell]^d across every face, giving [-ell, 2 ell]^d."""

    if f.centering == "cell":
        values = np.pad(f.values, [(n, n) for n in f.shape], mode="symmetric")
    else:
        values = np.pad(f.values, [(n - 1, n - 1) for n in f.shape], mode="reflect")
    origin = tuple(o - e for o, e in zip(f.origin, f.extent))
    return GridField(values, f.spacing, origin, f.centering)


__all__ = [
    "BestConstants",
    "Domain",
    "FeasibilityRow",
    "NEAR_CELLS",
    "RayleighProblem",
    "RayleighResult",
    "assemble_rayleigh",
    "best_constants",
    "box_inverse_square_integral",
    "classic_problem",
    "closest_point_in_cube",
    "critical_mass_coefficient",
    "is_exterior",
    "lemma1_problem",
    "lemma2_problem",
    "lemma2_sample_points",
    "min_rayleigh",
    "projected_problem",
    "proof_constants",
    "reflect_extend",
    "richardson",
    "solve_rayleigh",
]

"""Interacting spectra: the s-wave two-body radial form and the boxed N=2 model.

The boxed model discretises both particles on the same cell-centred grid of
n^3 cells. Unknowns are cell pairs restricted to one permutation sector, the
weight g^2 = 1/|x1 - x2|^2 enters through face midpoints (stiffness) and
exact cell-pair averages (mass), so no entry is ever evaluated on the
diagonal x1 = x2.
"""

from __future__ import annotations

import functools
import itertools
import logging
import math
import warnings
import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy import integrate, linalg, optimize, sparse
from scipy.sparse.linalg import lobpcg

from config import (
    DEFAULT_C_ENTROPY,
    DEFAULT_SEED,
    DENSE_EIGEN_LIMIT,
    EIGEN_TOL,
    LOBPCG_MAXITER,
    LOBPCG_RESTARTS,
    MAX_TWO_BODY_UNKNOWNS,
    QUAD_RTOL,
)

from .bounds import entropy_tail_log
from .errors import (
    BudgetExceededError,
    EigensolverError,
    IndefiniteAssemblyError,
    InvalidArgumentError,
    QuadratureError,
)
from .freefermi import Boundary, SpectrumSlice

logger = logging.getLogger(__name__)

Sector = Literal["symmetric", "antisymmetric"]
SECTORS: tuple[Sector, ...] = ("symmetric", "antisymmetric")

_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_GAUSS_ORDER = 16
# Entries produced per sparse block during two-body assembly.
_ASSEMBLY_CHUNK = 2_000_000
# Tail above the solved window may be at most this fraction of Z.
_TAIL_REFUSAL = 0.1
# Margin between the lobpcg stopping rule and the requested relative residual.
_LOBPCG_SAFETY = 0.1


# --------------------------------------------------------------------------
# eigensolver


def _as_dense(matrix) -> np.ndarray:
    return matrix.toarray() if sparse.issparse(matrix) else np.asarray(matrix, dtype=float)


def relative_residuals(A, B, values: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """||A u - lam B u|| / (||B u|| max(|lam|, 1)) per column."""

    Bu = B @ vectors
    R = A @ vectors - Bu * values[None, :]
    scale = np.linalg.norm(Bu, axis=0) * np.maximum(np.abs(values), 1.0)
    return np.linalg.norm(R, axis=0) / scale


def _lobpcg_tolerance(B, values: np.ndarray, vectors: np.ndarray, tol: float) -> float:
    """Absolute residual bound for lobpcg that implies ``tol`` in the relative_residuals measure.

    lobpcg B-normalises its block and stops on ||A u - lam B u||, so the bound
    scales with ||B u|| of the normalised columns.
    """

    Bu = B @ vectors
    norms = np.sqrt(np.abs(np.einsum("ij,ij->j", vectors, Bu)))
    scale = np.linalg.norm(Bu, axis=0) / norms * np.maximum(np.abs(values), 1.0)
    return _LOBPCG_SAFETY * tol * float(scale.min())


def solve_lowest(
    A,
    B,
    k: int,
    tol: float = EIGEN_TOL,
    *,
    seed: int = DEFAULT_SEED,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Lowest k eigenpairs of A u = lam B u; returns (values, vectors, residuals).

    Small problems go to LAPACK. Larger ones run LOBPCG with a block of 2k
    random columns and a Jacobi preconditioner. Each restart warm-starts from
    the previous block, tightens the lobpcg stopping rule to the observed
    eigenvalues and grows the block, until the residuals are within ``tol``.
    """

    n = A.shape[0]
    if A.shape != (n, n) or B.shape != (n, n):
        raise InvalidArgumentError("A and B must be square and of equal size")
    if not 1 <= k <= n:
        raise InvalidArgumentError(f"k must be in [1, {n}], got {k}")

    if n <= DENSE_EIGEN_LIMIT:
        try:
            values, vectors = linalg.eigh(_as_dense(A), _as_dense(B), subset_by_index=[0, k - 1])
        except linalg.LinAlgError as exc:
            raise IndefiniteAssemblyError("mass matrix is not positive definite") from exc
        residuals = relative_residuals(A, B, values, vectors)
        logger.debug("dense eigensolve n=%d k=%d max residual %.2e", n, k, residuals.max())
        return values, vectors, residuals

    A = sparse.csr_matrix(A)
    B = sparse.csr_matrix(B)
    diagonal = A.diagonal()
    safe = np.where(diagonal > 0, diagonal, 1.0)
    preconditioner = sparse.diags(1.0 / safe)
    rng = np.random.default_rng(seed)
    block = min(2 * k, n // 5)
    if block < k:
        raise InvalidArgumentError(f"k={k} is too large for an iterative solve of size {n}")
    X = rng.standard_normal((n, block))
    # eigenvalues unknown yet: max(|lam|, 1) >= 1 keeps the first bound conservative
    lob_tol = _lobpcg_tolerance(B, np.zeros(block), X, tol)
    residuals = np.full(k, np.inf)
    for attempt in range(LOBPCG_RESTARTS + 1):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            values, vectors = lobpcg(
                A, X, B=B, M=preconditioner, tol=lob_tol, maxiter=LOBPCG_MAXITER, largest=False
            )
        order = np.argsort(values)
        values, vectors = values[order], vectors[:, order]
        residuals = relative_residuals(A, B, values[:k], vectors[:, :k])
        logger.debug(
            "lobpcg n=%d block=%d attempt=%d lobpcg tol %.2e max residual %.2e",
            n, X.shape[1], attempt, lob_tol, residuals.max(),
        )
        if residuals.max() <= tol:
            return values[:k], vectors[:, :k], residuals
        lob_tol = min(lob_tol, _lobpcg_tolerance(B, values[:k], vectors[:, :k], tol)) * _LOBPCG_SAFETY
        grown = min(2 * X.shape[1], n // 5)
        X = vectors
        if grown > vectors.shape[1]:
            X = np.hstack([vectors, rng.standard_normal((n, grown - vectors.shape[1]))])
    raise EigensolverError(
        f"lobpcg did not reach residual {tol:g} for k={k} (worst {residuals.max():.3g})",
        residuals=residuals.tolist(),
    )


def lowest_modes(
    A,
    B,
    k: int,
    tol: float = EIGEN_TOL,
    *,
    seed: int = DEFAULT_SEED,
    kind: str = "modes",
    bc: str = "none",
    side: float = math.nan,
    meta: dict | None = None,
) -> SpectrumSlice:
    """The k lowest levels of A u = lam B u as a slice that is complete up to its top level."""

    values, _, residuals = solve_lowest(A, B, k, tol, seed=seed)
    values = np.maximum.accumulate(values)
    return SpectrumSlice(
        eigenvalues=values,
        multiplicities=np.ones(values.size, dtype=np.int64),
        bc=bc,
        side=side,
        cutoff=float(values[-1]),
        kind=kind,
        residuals=residuals,
        seed=seed,
        meta=dict(meta or {}),
    )


# --------------------------------------------------------------------------
# radial problem


@dataclass(frozen=True)
class RadialProblem:
    """s-wave form with weight w(r) = 1/r - a_inv on (0, R], P1 elements on ``cells`` intervals."""

    a_inv: float = 0.0
    R: float = 1.0
    cells: int = 400
    outer: Boundary = "dirichlet"

    def __post_init__(self) -> None:
        if self.a_inv > 0:
            raise InvalidArgumentError(f"a_inv must be <= 0, got {self.a_inv}")
        if not self.R > 0:
            raise InvalidArgumentError(f"R must be positive, got {self.R}")
        if self.cells < 2:
            raise InvalidArgumentError(f"need at least two cells, got {self.cells}")
        if self.outer not in ("dirichlet", "neumann"):
            raise InvalidArgumentError(f"unknown outer boundary: {self.outer}")

    @property
    def h(self) -> float:
        return self.R / self.cells

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.R, self.cells + 1)

    def weight(self, r):
        return 1.0 / r - self.a_inv


@dataclass(frozen=True)
class BoundaryTermReport:
    """Both ways of rewriting the weighted form on [eps, R] for one test profile."""

    eps: float
    form: float
    whole_space: float
    inner_sphere: float
    outer_sphere: float
    substituted: float
    radial_boundary: float

    @property
    def whole_space_residual(self) -> float:
        return self.form - (self.whole_space - self.inner_sphere + self.outer_sphere)

    @property
    def substituted_residual(self) -> float:
        return self.form - (self.substituted + self.radial_boundary)


def _radial_matrices(p: RadialProblem) -> tuple[np.ndarray, np.ndarray]:
    # (r w)^2 = (1 - a r)^2 is quadratic, so 3-point Gauss is exact for both forms.
    gx, gw = np.polynomial.legendre.leggauss(3)
    t = 0.5 * (gx + 1.0)
    wt = 0.5 * gw
    nodes = p.nodes
    h = p.h
    left = nodes[:-1, None] + h * t[None, :]
    rho = (1.0 - p.a_inv * left) ** 2
    phi0 = 1.0 - t
    phi1 = t
    stiff = (rho @ wt) / h
    m00 = h * (rho @ (wt * phi0 * phi0))
    m01 = h * (rho @ (wt * phi0 * phi1))
    m11 = h * (rho @ (wt * phi1 * phi1))

    size = p.cells + 1
    K = np.zeros((size, size))
    M = np.zeros((size, size))
    idx = np.arange(p.cells)
    np.add.at(K, (idx, idx), stiff)
    np.add.at(K, (idx + 1, idx + 1), stiff)
    np.add.at(K, (idx, idx + 1), -stiff)
    np.add.at(K, (idx + 1, idx), -stiff)
    np.add.at(M, (idx, idx), m00)
    np.add.at(M, (idx + 1, idx + 1), m11)
    np.add.at(M, (idx, idx + 1), m01)
    np.add.at(M, (idx + 1, idx), m01)
    return K, M


def radial_spectrum(p: RadialProblem, k: int) -> SpectrumSlice:
    """Lowest k values of int (1 - a r)^2 |f'|^2 dr / int (1 - a r)^2 |f|^2 dr."""

    if k < 1:
        raise InvalidArgumentError(f"k must be >= 1, got {k}")
    if p.cells < 4 * k:
        raise InvalidArgumentError(f"{p.cells} cells cannot resolve {k} radial modes; use at least {4 * k}")
    K, M = _radial_matrices(p)
    if p.outer == "dirichlet":
        K, M = K[:-1, :-1], M[:-1, :-1]
    values = linalg.eigh(K, M, subset_by_index=[0, k - 1], eigvals_only=True)
    values = np.maximum.accumulate(values)
    return SpectrumSlice(
        eigenvalues=values,
        multiplicities=np.ones(k, dtype=np.int64),
        bc=p.outer,
        side=p.R,
        cutoff=float(values[-1]),
        kind="radial",
        meta={"a_inv": p.a_inv, "cells": p.cells},
    )


def radial_exact_levels(a_inv: float, R: float, k: int) -> np.ndarray:
    """Lowest k continuum levels with a Dirichlet outer sphere.

    In u = (1 - a r) f the problem is -u'' = E u with u'(0) = -a u(0) and
    u(R) = 0, so E = s^2 for the roots of s cos(sR) = a sin(sR). For a < 0
    the j-th root lies in ((j - 1/2) pi/R, j pi/R).
    """

    if a_inv > 0 or not R > 0 or k < 1:
        raise InvalidArgumentError(f"need a_inv <= 0, R > 0, k >= 1; got ({a_inv}, {R}, {k})")
    j = np.arange(1, k + 1)
    if a_inv == 0:
        return ((j - 0.5) * math.pi / R) ** 2

    def secular(s: float) -> float:
        return s * math.cos(s * R) - a_inv * math.sin(s * R)

    roots = [optimize.brentq(secular, (i - 0.5) * math.pi / R, i * math.pi / R, xtol=1e-15) for i in j]
    return np.asarray(roots) ** 2


def radial_form_energy(p: RadialProblem, f: np.ndarray | Callable[[np.ndarray], np.ndarray]) -> float:
    """Discrete value of int (1 - a r)^2 |f'|^2 dr for nodal values (or a profile sampled at the nodes)."""

    values = f(p.nodes) if callable(f) else np.asarray(f, dtype=float)
    if values.shape != (p.cells + 1,):
        raise InvalidArgumentError(f"expected {p.cells + 1} nodal values, got shape {values.shape}")
    K, _ = _radial_matrices(p)
    return float(values @ K @ values)


def _quad(func: Callable[[float], float], lower: float, upper: float) -> float:
    value, error = integrate.quad(func, lower, upper, epsabs=0.0, epsrel=QUAD_RTOL, limit=200)
    if error > 1e3 * QUAD_RTOL * abs(value) + 1e-300:
        raise QuadratureError(f"integral on [{lower}, {upper}] did not converge: err={error:.3g}")
    return value


def boundary_term_check(
    p: RadialProblem,
    f: Callable[[float], float],
    df: Callable[[float], float],
    eps: float,
) -> BoundaryTermReport:
    """Evaluate the weighted form of f on [eps, R] and its two integrated-by-parts forms.

    With u = (1 - a r) f the form equals int u'^2 plus a(1-aR)f(R)^2 - a(1-a eps)f(eps)^2,
    and it equals int r^2 |(w f)'|^2 minus the sphere term w(eps) f(eps)^2 plus the
    same term at R. The inner sphere term vanishes as eps -> 0 exactly when f = o(r^(1/2)).
    """

    if not 0 < eps < p.R:
        raise InvalidArgumentError(f"eps must lie in (0, {p.R}), got {eps}")
    a = p.a_inv
    w = p.weight

    def form(r: float) -> float:
        return (r * w(r) * df(r)) ** 2

    def whole_space(r: float) -> float:
        dwf = -f(r) / r**2 + w(r) * df(r)
        return (r * dwf) ** 2

    def substituted(r: float) -> float:
        return (-a * f(r) + (1.0 - a * r) * df(r)) ** 2

    R = p.R
    return BoundaryTermReport(
        eps=eps,
        form=_quad(form, eps, R),
        whole_space=_quad(whole_space, eps, R),
        inner_sphere=w(eps) * f(eps) ** 2,
        outer_sphere=w(R) * f(R) ** 2,
        substituted=_quad(substituted, eps, R),
        radial_boundary=a * (1.0 - a * R) * f(R) ** 2 - a * (1.0 - a * eps) * f(eps) ** 2,
    )


# --------------------------------------------------------------------------
# boxed two-body model


@dataclass(frozen=True)
class TwoBodyBoxProblem:
    L: float
    q: int
    cells: int
    sector: Sector
    walls: Boundary = "neumann"
    weighted: bool = True

    def __post_init__(self) -> None:
        if not self.L > 0:
            raise InvalidArgumentError(f"L must be positive, got {self.L}")
        if self.q < 1:
            raise InvalidArgumentError(f"q must be >= 1, got {self.q}")
        if self.cells < 2:
            raise InvalidArgumentError(f"need at least two cells per axis, got {self.cells}")
        if self.sector not in SECTORS:
            raise InvalidArgumentError(f"unknown sector: {self.sector}")
        if self.walls not in ("dirichlet", "neumann"):
            raise InvalidArgumentError(f"unknown wall condition: {self.walls}")

    @property
    def h(self) -> float:
        return self.L / self.cells

    @property
    def cells_per_particle(self) -> int:
        return self.cells**3

    @property
    def unknowns(self) -> int:
        P = self.cells_per_particle
        return P * (P + 1) // 2 if self.sector == "symmetric" else P * (P - 1) // 2

    @property
    def degeneracy(self) -> int:
        """Spin states paired with this spatial sector."""

        q = self.q
        return q * (q - 1) // 2 if self.sector == "symmetric" else q * (q + 1) // 2


def sector_degeneracy(q: int, sector: Sector) -> int:
    return q * (q - 1) // 2 if sector == "symmetric" else q * (q + 1) // 2


@functools.lru_cache(maxsize=None)
def _unit_rule() -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(_GAUSS_ORDER)
    return 0.5 * (x + 1.0), 0.5 * w


def _tent(u: np.ndarray) -> np.ndarray:
    return np.prod(np.clip(1.0 - np.abs(u), 0.0, None), axis=-1)


def _regular_cube(corner: np.ndarray, offset: np.ndarray) -> float:
    t, w = _unit_rule()
    pts = np.stack(np.meshgrid(t, t, t, indexing="ij"), axis=-1).reshape(-1, 3) + corner
    weights = np.einsum("i,j,k->ijk", w, w, w).reshape(-1)
    values = _tent(pts - offset) / np.sum(pts * pts, axis=-1)
    return float(weights @ values)


def _vertex_cube(corner: np.ndarray, offset: np.ndarray) -> float:
    # Split into three pyramids with apex at the origin; r^2 from the Jacobian
    # cancels the 1/|t|^2 singularity.
    t, w = _unit_rule()
    sign = np.where(corner == 0, 1.0, -1.0)
    r, s1, s2 = (a.reshape(-1) for a in np.meshgrid(t, t, t, indexing="ij"))
    weights = np.einsum("i,j,k->ijk", w, w, w).reshape(-1)
    total = 0.0
    for lead in range(3):
        local = np.empty((r.size, 3))
        others = [k for k in range(3) if k != lead]
        local[:, lead] = r
        local[:, others[0]] = r * s1
        local[:, others[1]] = r * s2
        pts = sign * local
        total += float(weights @ (_tent(pts - offset) / (1.0 + s1 * s1 + s2 * s2)))
    return total


@functools.lru_cache(maxsize=None)
def cell_pair_average(offset: tuple[int, int, int]) -> float:
    """Mean of 1/|o + s - t|^2 over s, t in the unit cube, o an integer offset.

    Written as the integral of the tent-product density of s - t against 1/|x|^2;
    the eight unit cubes of the tent support are integrated separately.
    """

    o = np.asarray(offset, dtype=float)
    total = 0.0
    for lower in itertools.product(*[(oi - 1.0, oi) for oi in o]):
        corner = np.asarray(lower)
        if np.all((corner == 0.0) | (corner == -1.0)):
            total += _vertex_cube(corner, o)
        else:
            total += _regular_cube(corner, o)
    return total


def _offset_table(n: int) -> np.ndarray:
    span = np.arange(-(n - 1), n)
    ox, oy, oz = np.meshgrid(span, span, span, indexing="ij")
    sq = (ox * ox + oy * oy + oz * oz).astype(float)
    table = np.divide(1.0, sq, out=np.zeros_like(sq), where=sq > 0)
    for offset in itertools.product((-1, 0, 1), repeat=3):
        if max(abs(c) for c in offset) <= n - 1:
            table[tuple(c + n - 1 for c in offset)] = cell_pair_average(offset)
    return table


def _sector_index(a: np.ndarray, b: np.ndarray, P: int, sector: Sector) -> tuple[np.ndarray, np.ndarray]:
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    if sector == "symmetric":
        index = lo * P - lo * (lo - 1) // 2 + (hi - lo)
        coef = np.where(a == b, 1.0, _INV_SQRT2)
    else:
        index = np.where(a == b, 0, lo * P - lo * (lo + 1) // 2 + (hi - lo - 1))
        coef = np.where(a < b, _INV_SQRT2, np.where(a > b, -_INV_SQRT2, 0.0))
    return index, coef


def _budget(p: TwoBodyBoxProblem) -> None:
    nodes = p.cells_per_particle**2
    if nodes > MAX_TWO_BODY_UNKNOWNS:
        suggested = int(math.floor(MAX_TWO_BODY_UNKNOWNS ** (1.0 / 6.0)))
        raise BudgetExceededError(
            f"{p.cells} cells per axis means {nodes} grid points; use at most {suggested}",
            suggested_cells=suggested,
        )


def assemble_two_body(p: TwoBodyBoxProblem) -> tuple[sparse.csr_matrix, sparse.csr_matrix]:
    """Stiffness and mass of sum_i int g^2 |grad_i psi|^2 restricted to one sector.

    Both particles contribute equally on (anti)symmetric functions, so the
    stiffness is twice the particle-1 face sum. Dirichlet walls use a ghost
    value -psi one cell outside.
    """

    _budget(p)
    n = p.cells
    P = p.cells_per_particle
    h = p.h
    dim = p.unknowns
    coords = np.stack(np.unravel_index(np.arange(P), (n, n, n)), axis=1)
    strides = (n * n, n, 1)

    def face_coef(a: np.ndarray, b: np.ndarray, axis: int, direction: int) -> np.ndarray:
        if not p.weighted:
            return np.full(np.broadcast(a, b).shape, h**4)
        twice = 2 * (coords[a] - coords[b])
        twice[..., axis] += direction
        return 4.0 * h * h / np.sum(twice * twice, axis=-1)

    chunk = max(1, _ASSEMBLY_CHUNK // max(1, n * n * n))
    rows, cols, data = [], [], []
    stiffness = sparse.csr_matrix((dim, dim))

    def flush() -> None:
        nonlocal stiffness
        if rows:
            block = sparse.coo_matrix(
                (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
            )
            stiffness = stiffness + block.tocsr()
            rows.clear()
            cols.clear()
            data.clear()

    others = np.arange(P)
    for axis in range(3):
        A_lo = np.flatnonzero(coords[:, axis] < n - 1)
        A_hi = A_lo + strides[axis]
        walls = []
        if p.walls == "dirichlet":
            walls = [
                (np.flatnonzero(coords[:, axis] == 0), -1),
                (np.flatnonzero(coords[:, axis] == n - 1), 1),
            ]
        for start in range(0, P, chunk):
            b = others[start : start + chunk][None, :]
            a1 = A_lo[:, None]
            a2 = A_hi[:, None]
            c = face_coef(a1, b, axis, 1)
            I, alpha = _sector_index(a1, b, P, p.sector)
            J, beta = _sector_index(a2, b, P, p.sector)
            c = np.broadcast_to(c, I.shape)
            rows += [I.ravel(), J.ravel(), I.ravel(), J.ravel()]
            cols += [I.ravel(), J.ravel(), J.ravel(), I.ravel()]
            data += [
                (c * alpha * alpha).ravel(),
                (c * beta * beta).ravel(),
                (-c * alpha * beta).ravel(),
                (-c * alpha * beta).ravel(),
            ]
            for cells, direction in walls:
                a = cells[:, None]
                cw = 2.0 * np.broadcast_to(face_coef(a, b, axis, direction), (cells.size, b.shape[1]))
                I, alpha = _sector_index(a, b, P, p.sector)
                rows.append(I.ravel())
                cols.append(I.ravel())
                data.append((cw * alpha * alpha).ravel())
            flush()

    stiffness = (2.0 * stiffness).tocsr()
    stiffness.eliminate_zeros()

    a, b = np.triu_indices(P, k=0 if p.sector == "symmetric" else 1)
    if p.weighted:
        table = _offset_table(n)
        offset = coords[a] - coords[b] + (n - 1)
        mass_diag = h**4 * table[offset[:, 0], offset[:, 1], offset[:, 2]]
    else:
        mass_diag = np.full(a.size, h**6)
    if np.any(mass_diag <= 0) or not np.all(np.isfinite(mass_diag)):
        raise IndefiniteAssemblyError("two-body mass matrix has a non-positive entry")
    logger.info(
        "assembled %s sector: %d unknowns, %d stiffness entries (n=%d, walls=%s, weighted=%s)",
        p.sector, dim, stiffness.nnz, n, p.walls, p.weighted,
    )
    return stiffness, sparse.diags(mass_diag).tocsr()


def _axis_levels(n: int, h: float, walls: Boundary) -> np.ndarray:
    k = np.arange(n) if walls == "neumann" else np.arange(1, n + 1)
    return 4.0 / h**2 * np.sin(k * math.pi / (2 * n)) ** 2


def single_particle_levels(n: int, L: float, walls: Boundary) -> np.ndarray:
    """Closed-form spectrum of the one-particle cell-centred operator, sorted, one entry per state."""

    if walls not in ("dirichlet", "neumann"):
        raise InvalidArgumentError(f"unknown wall condition: {walls}")
    lam = _axis_levels(n, L / n, walls)
    return np.sort((lam[:, None, None] + lam[None, :, None] + lam[None, None, :]).ravel())


def single_particle_matrices(n: int, L: float, walls: Boundary) -> tuple[sparse.csr_matrix, sparse.csr_matrix]:
    """One-particle stiffness h * sum (du)^2 over faces and mass h^3 on n^3 cells."""

    if n < 2:
        raise InvalidArgumentError(f"need at least two cells per axis, got {n}")
    if walls not in ("dirichlet", "neumann"):
        raise InvalidArgumentError(f"unknown wall condition: {walls}")
    h = L / n
    main = np.full(n, 2.0)
    main[0] = main[-1] = 1.0 if walls == "neumann" else 3.0
    T = sparse.diags([-np.ones(n - 1), main, -np.ones(n - 1)], [-1, 0, 1])
    eye = sparse.identity(n)
    laplacian = (
        sparse.kron(sparse.kron(T, eye), eye) + sparse.kron(sparse.kron(eye, T), eye) + sparse.kron(sparse.kron(eye, eye), T)
    )
    return (h * laplacian).tocsr(), (h**3 * sparse.identity(n**3)).tocsr()


def sector_spectrum(
    p: TwoBodyBoxProblem,
    cutoff: float,
    *,
    max_modes: int = 48,
    tol: float = EIGEN_TOL,
    seed: int = DEFAULT_SEED,
) -> SpectrumSlice:
    """All sector eigenvalues below ``cutoff``, or below the highest one the mode cap reaches.

    The returned slice is complete below its own ``cutoff``.
    """

    if not cutoff > 0:
        raise InvalidArgumentError(f"cutoff must be positive, got {cutoff}")
    K, M = assemble_two_body(p)
    dim = p.unknowns
    solve = functools.partial(
        lowest_modes, K, M, tol=tol, seed=seed, kind=f"pair-{p.sector}", bc=p.walls, side=p.L
    )
    if dim <= DENSE_EIGEN_LIMIT:
        modes = solve(dim)
        effective = cutoff
    else:
        k = min(8, max_modes)
        while True:
            modes = solve(k)
            if modes.cutoff > cutoff or k >= max_modes:
                break
            k = min(2 * k, max_modes)
        effective = cutoff if modes.cutoff > cutoff else modes.cutoff * (1.0 - 1e-9)
        if effective < cutoff:
            logger.warning(
                "%s sector: %d modes only reach %.4g < cutoff %.4g", p.sector, len(modes), modes.cutoff, cutoff
            )
    values = modes.eigenvalues
    keep = values < effective if effective < cutoff else values <= cutoff
    return dataclasses.replace(
        modes,
        eigenvalues=values[keep],
        multiplicities=modes.multiplicities[keep],
        cutoff=float(effective),
        residuals=modes.residuals[keep],
        meta={"cells": p.cells, "weighted": p.weighted, "complete": bool(effective >= cutoff)},
    )


@dataclass(frozen=True)
class FreeEnergyEstimate:
    """F_g(beta, 2, L) from the solved sectors, or an interval when the tail is too large."""

    beta: float
    L: float
    q: int
    cells: int
    walls: str
    weighted: bool
    value: float | None
    lower: float
    upper: float
    tail_bound: float
    cutoff: float
    levels: dict[str, int] = field(default_factory=dict)


def interacting_free_energy(
    beta: float,
    L: float,
    q: int,
    cells: int,
    cutoff: float,
    *,
    walls: Boundary = "neumann",
    weighted: bool = True,
    c_entropy: float = DEFAULT_C_ENTROPY,
    max_modes: int = 48,
    tol: float = EIGEN_TOL,
    seed: int = DEFAULT_SEED,
    spectra: dict[Sector, SpectrumSlice] | None = None,
) -> FreeEnergyEstimate:
    """-T ln Z for two fermions with q spin states, Z summed over both sectors.

    States above the common solved window are bounded through the counting
    bound N_g(E) <= (c q E^(3/2) / rho)^2. Precomputed sector spectra may be
    passed in ``spectra``.
    """

    if not beta > 0:
        raise InvalidArgumentError(f"beta must be positive, got {beta}")
    solved: dict[Sector, SpectrumSlice] = {}
    for sector in SECTORS:
        if sector_degeneracy(q, sector) == 0:
            continue
        if spectra is not None and sector in spectra:
            solved[sector] = spectra[sector]
            continue
        problem = TwoBodyBoxProblem(L, q, cells, sector, walls, weighted)
        solved[sector] = sector_spectrum(problem, cutoff, max_modes=max_modes, tol=tol, seed=seed)

    window = min(spec.cutoff for spec in solved.values())
    energies, weights = [], []
    for sector, spec in solved.items():
        mask = spec.eigenvalues <= window
        energies.append(spec.eigenvalues[mask])
        weights.append(np.full(int(mask.sum()), float(sector_degeneracy(q, sector))))
    E = np.concatenate(energies)
    g = np.concatenate(weights)
    if E.size == 0:
        raise InvalidArgumentError(f"no two-body level below the window {window:.4g}; raise the cutoff")
    ground = float(E.min())
    partial = math.fsum(g * np.exp(-beta * (E - ground)))
    log_tail = entropy_tail_log(beta, window, 2, 2.0 / L**3, q, c_entropy)
    relative = math.exp(min(log_tail + beta * ground - math.log(partial), 700.0))
    upper = ground - math.log(partial) / beta
    lower = upper - math.log1p(relative) / beta
    value = upper if relative <= _TAIL_REFUSAL else None
    if value is None:
        logger.warning("tail bound is %.3g of Z above %.4g; reporting an interval", relative, window)
    return FreeEnergyEstimate(
        beta=beta,
        L=L,
        q=q,
        cells=cells,
        walls=walls,
        weighted=weighted,
        value=value,
        lower=lower,
        upper=upper,
        tail_bound=relative,
        cutoff=window,
        levels={sector: len(spec) for sector, spec in solved.items()},
    )


def discrete_pair_free_energy(beta: float, L: float, q: int, cells: int, walls: Boundary) -> float:
    """Exact -T ln Z_2 of the unweighted grid model from its closed-form one-particle levels."""

    lam = single_particle_levels(cells, L, walls)
    i, j = np.triu_indices(lam.size, k=1)
    pair = lam[i] + lam[j]
    ground = float(min(pair.min(), 2 * lam[0]))
    total = sector_degeneracy(q, "antisymmetric") * np.exp(-beta * (pair - ground)).sum()
    total += sector_degeneracy(q, "symmetric") * (
        np.exp(-beta * (pair - ground)).sum() + np.exp(-beta * (2 * lam - ground)).sum()
    )
    return ground - math.log(float(total)) / beta


__all__ = [
    "BoundaryTermReport",
    "FreeEnergyEstimate",
    "RadialProblem",
    "SECTORS",
    "Sector",
    "TwoBodyBoxProblem",
    "assemble_two_body",
    "boundary_term_check",
    "cell_pair_average",
    "discrete_pair_free_energy",
    "interacting_free_energy",
    "lowest_modes",
    "radial_exact_levels",
    "radial_form_energy",
    "radial_spectrum",
    "relative_residuals",
    "sector_degeneracy",
    "sector_spectrum",
    "single_particle_levels",
    "single_particle_matrices",
    "solve_lowest",
]

"""The interaction weight g(x) = sum over pairs of (1/|x_i - x_j| - a_inv)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist

from .errors import EmptySumError, InvalidArgumentError, SingularConfigurationError
from .geometry import SQRT3, BoxPartition, LocalizationStats, OccupationVector, localization_stats, neighborhoods


@dataclass(frozen=True, eq=False)
class Configuration:
    positions: np.ndarray

    def __post_init__(self) -> None:
        positions = np.array(self.positions, dtype=float)
        if positions.ndim != 2 or positions.shape[1] != 3:
            raise InvalidArgumentError(f"positions must have shape (N, 3), got {positions.shape}")
        if positions.shape[0] < 2:
            raise InvalidArgumentError("a configuration needs at least two particles")
        positions.setflags(write=False)
        object.__setattr__(self, "positions", positions)

    @property
    def N(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class ScatteringLength:
    a_eff: float
    inverse: float
    unitary: bool = False


def _check_a_inv(a_inv: float) -> None:
    if a_inv > 0:
        raise InvalidArgumentError(f"a_inv must be <= 0 (negative scattering length), got {a_inv}")


def _pair_distances(c: Configuration) -> np.ndarray:
    distances = pdist(c.positions)
    if np.any(distances == 0):
        raise SingularConfigurationError("coincident particle positions")
    return distances


def g_eval(c: Configuration, a_inv: float = 0.0) -> float:
    _check_a_inv(a_inv)
    distances = _pair_distances(c)
    return math.fsum(1.0 / distances) - a_inv * distances.size


def scale_configuration(c: Configuration, factor: float) -> Configuration:
    if not factor > 0:
        raise InvalidArgumentError(f"scale factor must be positive, got {factor}")
    return Configuration(c.positions * factor)


def g_lower_bound(stats: LocalizationStats, ell: float) -> float:
    """K- + V / (4 sqrt(3) ell): a lower bound for g on B(n)."""

    return stats.K_minus + stats.V / (4 * SQRT3 * ell)


def g_upper_bound(c: Configuration, p: BoxPartition, n: OccupationVector) -> float:
    """K+ plus half the inverse distances to same-or-neighbour-box particles.

    Rows of ``c.positions`` must follow the box-by-box ordering of ``n``.
    """

    if c.N != n.N:
        raise InvalidArgumentError(f"configuration has {c.N} particles, occupation has {n.N}")
    stats = localization_stats(p, n)
    near = 0.0
    for i, others in enumerate(neighborhoods(p, n)):
        for j in others:
            dist = float(np.linalg.norm(c.positions[i] - c.positions[j]))
            if dist == 0:
                raise SingularConfigurationError("coincident particle positions")
            near += 1.0 / dist
    return stats.K_plus + 0.5 * near


def effective_scattering_length(
    c: Configuration,
    i: int,
    j: int,
    a_inv: float = 0.0,
    *,
    allow_unitary: bool = False,
) -> ScatteringLength:
    """Scattering length seen by the pair (i, j) once the other pairs are frozen."""

    _check_a_inv(a_inv)
    if i == j or not (0 <= i < c.N and 0 <= j < c.N):
        raise InvalidArgumentError(f"need two distinct particle indices, got ({i}, {j})")
    n_pairs = c.N * (c.N - 1) // 2
    inverse = -a_inv * n_pairs
    for k in range(c.N):
        for l in range(k + 1, c.N):
            if {k, l} == {i, j}:
                continue
            dist = float(np.linalg.norm(c.positions[k] - c.positions[l]))
            if dist == 0:
                raise SingularConfigurationError("coincident particle positions")
            inverse += 1.0 / dist
    if inverse == 0:
        if not allow_unitary:
            raise EmptySumError("no other pairs: the pair sees the unitary limit")
        return ScatteringLength(a_eff=-math.inf, inverse=0.0, unitary=True)
    return ScatteringLength(a_eff=-1.0 / inverse, inverse=inverse)


__all__ = [
    "Configuration",
    "ScatteringLength",
    "effective_scattering_length",
    "g_eval",
    "g_lower_bound",
    "g_upper_bound",
    "scale_configuration",
]

"""Box partitions of [0, L]^3, occupation vectors and the localization sums K-, K+, V."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np
from scipy import ndimage

from .errors import InvalidArgumentError

logger = logging.getLogger(__name__)

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True, eq=False)
class BoxPartition:
    """The m^3 closed sub-cubes of side L/m, indexed lexicographically by integer corner."""

    L: float
    m: int

    @cached_property
    def corners(self) -> np.ndarray:
        corners = np.array(list(itertools.product(range(self.m), repeat=3)), dtype=np.int64)
        corners.setflags(write=False)
        return corners

    @property
    def ell(self) -> float:
        return self.L / self.m

    @property
    def M(self) -> int:
        return self.m**3

    def bounds(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        _check_index(self, j)
        lower = self.corners[j] * self.ell
        return lower, lower + self.ell


@dataclass(frozen=True)
class OccupationVector:
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        counts = tuple(int(c) for c in self.counts)
        if any(c < 0 for c in counts):
            raise InvalidArgumentError(f"occupation counts must be non-negative: {counts}")
        object.__setattr__(self, "counts", counts)

    @property
    def N(self) -> int:
        return sum(self.counts)

    @property
    def M(self) -> int:
        return len(self.counts)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=np.int64)

    def box_of_particle(self) -> np.ndarray:
        """Box index of every particle, particles numbered box by box."""

        return np.repeat(np.arange(self.M), self.counts)


@dataclass(frozen=True)
class LocalizationStats:
    K_minus: float
    K_plus: float
    V: int
    m_neigh: tuple[int, ...]


def make_partition(L: float, m: int) -> BoxPartition:
    if not (isinstance(L, (int, float)) and math.isfinite(L) and L > 0):
        raise InvalidArgumentError(f"L must be a positive length, got {L!r}")
    if isinstance(m, bool) or not isinstance(m, (int, np.integer)) or m < 2:
        raise InvalidArgumentError(f"m must be an integer >= 2, got {m!r}")
    return BoxPartition(float(L), int(m))


def _check_index(p: BoxPartition, j: int) -> None:
    if not 0 <= j < p.M:
        raise InvalidArgumentError(f"box index {j} out of range for M={p.M}")


def _check_match(p: BoxPartition, n: OccupationVector) -> None:
    if n.M != p.M:
        raise InvalidArgumentError(f"occupation has {n.M} entries, partition has M={p.M}")


def _gap_units(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.maximum(np.abs(a - b) - 1, 0)


def box_distance(p: BoxPartition, j: int, k: int) -> float:
    """Euclidean distance between the closed boxes B_j and B_k."""

    _check_index(p, j)
    _check_index(p, k)
    gap = _gap_units(p.corners[j], p.corners[k])
    return p.ell * math.sqrt(float(np.dot(gap, gap)))


def distance_matrix(p: BoxPartition, indices: Sequence[int] | None = None) -> np.ndarray:
    corners = p.corners if indices is None else p.corners[np.asarray(indices, dtype=np.int64)]
    gap = _gap_units(corners[:, None, :], corners[None, :, :])
    return p.ell * np.sqrt(np.sum(gap * gap, axis=-1))


def _adjacent(p: BoxPartition, j: int, k: int) -> bool:
    return j != k and int(np.max(np.abs(p.corners[j] - p.corners[k]))) == 1


def neighbor_counts(p: BoxPartition, n: OccupationVector) -> list[int]:
    """m_j: particles in the (up to 26) boxes touching B_j, B_j itself excluded."""

    _check_match(p, n)
    grid = n.as_array().reshape(p.m, p.m, p.m)
    kernel = np.ones((3, 3, 3), dtype=np.int64)
    kernel[1, 1, 1] = 0
    counts = ndimage.convolve(grid, kernel, mode="constant", cval=0)
    return [int(c) for c in counts.reshape(-1)]


def localization_stats(p: BoxPartition, n: OccupationVector) -> LocalizationStats:
    _check_match(p, n)
    counts = n.as_array()
    occupied = np.flatnonzero(counts)
    k_minus = 0.0
    k_plus = 0.0
    if occupied.size > 1:
        dist = distance_matrix(p, occupied)
        weights = np.outer(counts[occupied], counts[occupied]).astype(float)
        upper = np.triu(dist > 0, k=1)
        k_minus = math.fsum(weights[upper] / (dist[upper] + 2 * SQRT3 * p.ell))
        k_plus = math.fsum(weights[upper] / dist[upper])
    m_neigh = neighbor_counts(p, n)
    V = int(sum(int(nj) * (int(nj) + mj - 1) for nj, mj in zip(counts, m_neigh)))
    return LocalizationStats(k_minus, k_plus, V, tuple(m_neigh))


def neighbor_pair_sum(p: BoxPartition, n: OccupationVector) -> int:
    """Sum of n_j n_k over unordered pairs of touching boxes."""

    _check_match(p, n)
    occupied = [int(j) for j in np.flatnonzero(n.as_array())]
    return sum(
        n.counts[j] * n.counts[k]
        for a, j in enumerate(occupied)
        for k in occupied[a + 1 :]
        if _adjacent(p, j, k)
    )


def neighborhoods(p: BoxPartition, n: OccupationVector) -> list[frozenset[int]]:
    """N[i]: the other particles in the same box as i or in a box touching it."""

    _check_match(p, n)
    boxes = n.box_of_particle()
    corners = p.corners[boxes]
    cheb = np.max(np.abs(corners[:, None, :] - corners[None, :, :]), axis=-1)
    close = cheb <= 1
    np.fill_diagonal(close, False)
    return [frozenset(int(j) for j in np.flatnonzero(row)) for row in close]


def box_of(p: BoxPartition, x: Sequence[float]) -> int:
    point = np.asarray(x, dtype=float)
    if point.shape != (3,) or np.any(point < 0) or np.any(point > p.L):
        raise InvalidArgumentError(f"point {x!r} is not in [0, {p.L}]^3")
    idx = np.minimum((point // p.ell).astype(np.int64), p.m - 1)
    return int((idx[0] * p.m + idx[1]) * p.m + idx[2])


def sample_configuration(p: BoxPartition, n: OccupationVector, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw from B(n); rows are particles, ordered box by box."""

    _check_match(p, n)
    boxes = n.box_of_particle()
    return (p.corners[boxes] + rng.random((boxes.size, 3))) * p.ell


def _compositions(total: int, parts: int, cap: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        if total <= cap:
            yield (total,)
        return
    for first in range(min(total, cap), -1, -1):
        rest = total - first
        if rest > cap * (parts - 1):
            break
        for tail in _compositions(rest, parts - 1, cap):
            yield (first, *tail)


def enumerate_occupations(N: int, M: int, cap: int | None = None) -> Iterator[OccupationVector]:
    """Stream every composition of N into M non-negative parts, first part descending."""

    if N < 0 or M < 1:
        raise InvalidArgumentError(f"need N >= 0 and M >= 1, got N={N}, M={M}")
    if cap is not None and cap < 0:
        raise InvalidArgumentError(f"cap must be non-negative, got {cap}")
    limit = N if cap is None else cap
    for counts in _compositions(N, M, limit):
        yield OccupationVector(counts)


def count_occupations(N: int, M: int, cap: int | None = None) -> int:
    """Exact number of vectors streamed by enumerate_occupations."""

    if N < 0 or M < 1:
        raise InvalidArgumentError(f"need N >= 0 and M >= 1, got N={N}, M={M}")
    if cap is None or cap >= N:
        return math.comb(N + M - 1, M - 1)
    total = 0
    for k in range(M + 1):
        rest = N - k * (cap + 1)
        if rest < 0:
            break
        total += (-1) ** k * math.comb(M, k) * math.comb(rest + M - 1, M - 1)
    return total


__all__ = [
    "BoxPartition",
    "LocalizationStats",
    "OccupationVector",
    "box_distance",
    "box_of",
    "count_occupations",
    "distance_matrix",
    "enumerate_occupations",
    "localization_stats",
    "make_partition",
    "neighbor_counts",
    "neighbor_pair_sum",
    "neighborhoods",
    "sample_configuration",
]

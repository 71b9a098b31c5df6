"""Scalar fields sampled on uniform tensor grids."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal, Sequence

import numpy as np

from .errors import InvalidArgumentError

Centering = Literal["cell", "node"]


def _trapezoid_weights(n: int) -> np.ndarray:
    weights = np.ones(n)
    if n > 1:
        weights[0] = weights[-1] = 0.5
    return weights


@dataclass(frozen=True, eq=False)
class GridField:
    """Values on a uniform grid with spacing ``spacing`` starting at ``origin``.

    Cell-centred fields store one value per cell (the point sits at the cell
    centre); node-centred fields store values on the cell corners and use
    trapezoid weights for every integral.
    """

    values: np.ndarray
    spacing: float
    origin: tuple[float, ...]
    centering: Centering = "cell"

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 0:
            raise InvalidArgumentError("GridField needs at least one axis")
        if not self.spacing > 0:
            raise InvalidArgumentError(f"spacing must be positive, got {self.spacing}")
        if len(self.origin) != values.ndim:
            raise InvalidArgumentError("origin length must match the number of axes")
        if self.centering not in ("cell", "node"):
            raise InvalidArgumentError(f"unknown centering: {self.centering}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))

    @classmethod
    def from_function(
        cls,
        func: Callable[..., np.ndarray],
        shape: Sequence[int],
        spacing: float,
        origin: Sequence[float] | None = None,
        centering: Centering = "cell",
    ) -> "GridField":
        origin = tuple(origin) if origin is not None else (0.0,) * len(shape)
        template = cls(np.zeros(tuple(shape)), spacing, origin, centering)
        return cls(np.broadcast_to(func(*template.mesh()), template.shape).copy(), spacing, origin, centering)

    @property
    def ndim(self) -> int:
        return self.values.ndim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def extent(self) -> tuple[float, ...]:
        if self.centering == "cell":
            return tuple(n * self.spacing for n in self.shape)
        return tuple((n - 1) * self.spacing for n in self.shape)

    def axis(self, k: int) -> np.ndarray:
        offset = 0.5 if self.centering == "cell" else 0.0
        return self.origin[k] + (np.arange(self.shape[k]) + offset) * self.spacing

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*(self.axis(k) for k in range(self.ndim)), indexing="ij", sparse=True)

    def _weights(self, skip: int | None = None) -> np.ndarray | float:
        if self.centering == "cell":
            return 1.0
        weight: np.ndarray | float = 1.0
        for k, n in enumerate(self.shape):
            if k == skip:
                continue
            shape = [1] * self.ndim
            shape[k] = n
            weight = weight * _trapezoid_weights(n).reshape(shape)
        return weight

    def norm_squared(self) -> float:
        return float(np.sum(self._weights() * self.values**2) * self.spacing**self.ndim)

    def gradient_energy(self) -> float:
        """Discrete Dirichlet energy: squared neighbour differences over all grid edges."""

        total = 0.0
        for k in range(self.ndim):
            diffs = np.diff(self.values, axis=k) ** 2
            total += float(np.sum(self._weights(skip=k) * diffs))
        return total * self.spacing ** (self.ndim - 2)


__all__ = ["Centering", "GridField"]

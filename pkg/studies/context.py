from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List

import numpy as np

from core.cache import SpectrumCache
from core.schema import RunConfig


@dataclass
class StudyContext:
    config: RunConfig
    cache: SpectrumCache | None = None

    @property
    def seed(self) -> int:
        return self.config.seed

    @property
    def eigen_tol(self) -> float:
        return self.config.eigen_tol

    @property
    def out_dir(self) -> Path:
        return Path(self.config.out)

    def rng(self, *stream: int) -> np.random.Generator:
        """Generator for the run seed, optionally split into an independent sub-stream."""

        return np.random.default_rng([self.config.seed, *stream])


@dataclass
class StudyOutput:
    """Rows of the main CSV plus optional extra tables and per-instance JSON records."""

    rows: List[Dict[str, Any]]
    tables: Dict[str, List[Dict[str, Any]]] = field(default_factory=dict)
    records: Dict[str, Any] = field(default_factory=dict)


__all__ = ["StudyContext", "StudyOutput"]

from __future__ import annotations

import itertools
import math
from typing import Any, Dict, List

import numpy as np

from core.schema import FermiParams
from pointgas.freefermi import (
    SpectrumSlice,
    canonical_free_energy,
    f_density,
    slater_free_energy,
    zero_temperature_density,
)
from studies.context import StudyContext, StudyOutput

_ORACLE_N = range(1, 6)
_ORACLE_Q = range(1, 4)


def _density_rows(params: FermiParams) -> List[Dict[str, Any]]:
    rows = []
    for beta, rho, q in itertools.product(params.beta, params.rho, params.q):
        point = f_density(beta, rho, q)
        # f(beta, rho) = rho^(5/3) f(beta rho^(2/3), 1)
        scaled = f_density(beta * rho ** (2.0 / 3.0), 1.0, q)
        rows.append(
            {
                "kind": "density",
                "beta": beta,
                "rho": rho,
                "q": q,
                "mu": point.mu,
                "f": point.f,
                "pressure": point.pressure,
                "reference": rho ** (5.0 / 3.0) * scaled.f,
            }
        )
    return rows


def _zero_temperature_rows(params: FermiParams) -> List[Dict[str, Any]]:
    rows = []
    for q in params.q:
        point = f_density(params.eta, 1.0, q)
        rows.append(
            {
                "kind": "zero_temperature",
                "beta": params.eta,
                "rho": 1.0,
                "q": q,
                "mu": point.mu,
                "f": point.f,
                "pressure": point.pressure,
                "reference": zero_temperature_density(1.0, q),
            }
        )
    return rows


def oracle_spectrum(rng: np.random.Generator, modes: int) -> SpectrumSlice:
    levels = np.sort(rng.uniform(0.0, 4.0, size=modes))
    return SpectrumSlice(
        eigenvalues=levels,
        multiplicities=np.ones(modes, dtype=np.int64),
        bc="none",
        side=math.nan,
        cutoff=float(levels[-1]),
        kind="modes",
    )


def _oracle_rows(params: FermiParams, ctx: StudyContext) -> List[Dict[str, Any]]:
    spec = oracle_spectrum(ctx.rng(0), params.oracle_modes)
    rows = []
    for q, N in itertools.product(_ORACLE_Q, _ORACLE_N):
        rows.append(
            {
                "kind": "oracle",
                "beta": 1.0,
                "q": q,
                "N": N,
                "f": canonical_free_energy(spec, q, N, 1.0),
                "reference": slater_free_energy(spec, q, N, 1.0),
            }
        )
    return rows


def run(params: FermiParams, ctx: StudyContext) -> StudyOutput:
    rows = _density_rows(params) + _zero_temperature_rows(params) + _oracle_rows(params, ctx)
    return StudyOutput(rows)


__all__ = ["oracle_spectrum", "run"]

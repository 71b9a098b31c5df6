from __future__ import annotations

import logging
import math
from typing import Any, Dict, List

import numpy as np

from config import DEFAULT_C_ETA
from core.schema import Spectrum2Params
from pointgas.bounds import calibrate_entropy_constant, calibrate_kappa, tail_sum_bound
from pointgas.freefermi import SpectrumSlice, cube_free_energy, cube_spectrum
from pointgas.hardy import richardson
from pointgas.spectral2 import (
    SECTORS,
    TwoBodyBoxProblem,
    discrete_pair_free_energy,
    interacting_free_energy,
    sector_degeneracy,
    sector_spectrum,
)
from studies.context import StudyContext, StudyOutput

logger = logging.getLogger(__name__)

Spectra = Dict[str, SpectrumSlice]


def reference_level(L: float, walls: str) -> float:
    """Lowest free pair level in the continuum: two particles in the ground mode."""

    return 6.0 * math.pi**2 / L**2 if walls == "dirichlet" else 0.0


def spinless_reference_level(L: float, walls: str) -> float:
    """Lowest continuum level of two free fermions of one spin state: the two lowest cube states."""

    spec = cube_spectrum(L, walls, 7.0 * (math.pi / L) ** 2)
    states = np.repeat(spec.eigenvalues, spec.multiplicities)
    return float(states[0] + states[1])


def solve_sectors(params: Spectrum2Params, L: float, cells: int, ctx: StudyContext) -> Spectra:
    cutoff = reference_level(L, params.walls) + params.window / min(params.beta)
    spectra: Spectra = {}
    for sector in SECTORS:
        # the spatial problem is independent of q; q only sets the sector degeneracy
        problem = TwoBodyBoxProblem(L, 1, cells, sector, params.walls, weighted=True)

        def compute(problem: TwoBodyBoxProblem = problem) -> SpectrumSlice:
            return sector_spectrum(
                problem, cutoff, max_modes=params.max_modes, tol=ctx.eigen_tol, seed=ctx.seed
            )

        if ctx.cache is None:
            spectra[sector] = compute()
            continue
        key = {
            "L": L,
            "cells": cells,
            "sector": sector,
            "walls": params.walls,
            "cutoff": cutoff,
            "max_modes": params.max_modes,
            "tol": ctx.eigen_tol,
            "seed": ctx.seed,
        }
        spectra[sector] = ctx.cache.get_or_compute("pair", key, compute)
    return spectra


def _free_energy_rows(
    params: Spectrum2Params, L: float, cells: int, spectra: Spectra, ctx: StudyContext
) -> List[Dict[str, Any]]:
    rows = []
    for beta in params.beta:
        common = dict(walls=params.walls, c_entropy=params.c_entropy, max_modes=params.max_modes,
                      tol=ctx.eigen_tol, seed=ctx.seed)
        est = interacting_free_energy(beta, L, params.q, cells, max(s.cutoff for s in spectra.values()),
                                      spectra=spectra, **common)
        free = cube_free_energy(beta, 2, L, params.q, params.walls, method="canonical")
        rows.append(
            {
                "kind": "free_energy",
                "L": L,
                "cells": cells,
                "beta": beta,
                "q": params.q,
                "F_g": est.value,
                "F_g_lower": est.lower,
                "F_g_upper": est.upper,
                "tail_fraction": est.tail_bound,
                "F_free": free,
                "F_grid": discrete_pair_free_energy(beta, L, params.q, cells, params.walls),
                "gap_per_particle": None if est.value is None else 0.5 * (free - est.value),
            }
        )
        spinless = interacting_free_energy(beta, L, 1, cells, spectra["antisymmetric"].cutoff,
                                           spectra={"antisymmetric": spectra["antisymmetric"]}, **common)
        rows.append(
            {
                "kind": "spinless",
                "L": L,
                "cells": cells,
                "beta": beta,
                "q": 1,
                "F_g": spinless.value,
                "F_g_lower": spinless.lower,
                "F_g_upper": spinless.upper,
                "tail_fraction": spinless.tail_bound,
                "F_free": None,
                "F_grid": discrete_pair_free_energy(beta, L, 1, cells, params.walls),
                "gap_per_particle": None,
            }
        )
    return rows


def _tail_rows(params: Spectrum2Params, L: float, cells: int, spectra: Spectra) -> List[Dict[str, Any]]:
    parts = [(spec, sector_degeneracy(params.q, sector)) for sector, spec in spectra.items()]
    parts = [(spec, weight) for spec, weight in parts if weight > 0]
    rows = []
    for beta in params.beta:
        threshold = DEFAULT_C_ETA * 2 * math.log(2) / beta
        report = tail_sum_bound(beta, threshold, 2, parts, c_eta=DEFAULT_C_ETA)
        rows.append(
            {
                "L": L,
                "cells": cells,
                "beta": beta,
                "E_bar": threshold,
                "bound": report.bound,
                "true_tail": report.true_tail,
                "margin": report.margin,
                "complete": report.complete,
            }
        )
    return rows


def _calibration_row(params: Spectrum2Params, L: float, cells: int, spectra: Spectra) -> Dict[str, Any]:
    window = min(spec.cutoff for spec in spectra.values())
    energies, weights = [], []
    for sector, spec in spectra.items():
        weight = sector_degeneracy(params.q, sector)
        mask = spec.eigenvalues <= window
        if weight:
            energies.append(spec.eigenvalues[mask])
            weights.append(np.full(int(mask.sum()), float(weight)))
    E = np.concatenate(energies)
    positive = E[E > 0]
    c_entropy = calibrate_entropy_constant(
        E, np.concatenate(weights), 2, 2.0 / L**3, params.q, e_floor=float(positive.min())
    )
    antisymmetric = spectra["antisymmetric"].eigenvalues
    kappa = calibrate_kappa(float(antisymmetric[0]), [2], 1, L) if antisymmetric.size else None
    return {"L": L, "cells": cells, "c_entropy_min": c_entropy, "kappa_max": kappa, "window": window}


def _spinless_rows(
    params: Spectrum2Params, rows: List[Dict[str, Any]], levels: List[Dict[str, Any]]
) -> List[Dict[str, Any]]:
    """q = 1 ground level and F_g extrapolated in h^2 from the two finest grids, against the free continuum."""

    ladder = sorted(params.cells)
    if len(ladder) < 2:
        return []
    coarse, fine = ladder[-2:]
    ratio = fine / coarse
    out = []
    for L in params.L:
        ground = {
            r["cells"]: r["energy"]
            for r in levels
            if r["L"] == L and r["sector"] == "antisymmetric" and r["index"] == 0
        }
        continuum = spinless_reference_level(L, params.walls)
        out.append(
            {
                "quantity": "ground_level",
                "L": L,
                "beta": None,
                "coarse": ground[coarse],
                "fine": ground[fine],
                "extrapolated": richardson([ground[coarse], ground[fine]], ratio, order=2),
                "continuum": continuum,
                "scale": max(abs(continuum), 1.0),
            }
        )
        for beta in params.beta:
            F = {
                r["cells"]: r["F_g"]
                for r in rows
                if r["kind"] == "spinless" and r["L"] == L and r["beta"] == beta
            }
            continuum = cube_free_energy(beta, 2, L, 1, params.walls, method="canonical")
            known = F[coarse] is not None and F[fine] is not None
            out.append(
                {
                    "quantity": "free_energy",
                    "L": L,
                    "beta": beta,
                    "coarse": F[coarse],
                    "fine": F[fine],
                    "extrapolated": richardson([F[coarse], F[fine]], ratio, order=2) if known else None,
                    "continuum": continuum,
                    "scale": max(abs(continuum), 1.0 / beta),
                }
            )
    return out


def run(params: Spectrum2Params, ctx: StudyContext) -> StudyOutput:
    rows: List[Dict[str, Any]] = []
    tails: List[Dict[str, Any]] = []
    calibration: List[Dict[str, Any]] = []
    levels: List[Dict[str, Any]] = []
    for L in params.L:
        for cells in sorted(params.cells):
            spectra = solve_sectors(params, L, cells, ctx)
            logger.info(
                "L=%g cells=%d: %s", L, cells, {sector: len(spec) for sector, spec in spectra.items()}
            )
            rows.extend(_free_energy_rows(params, L, cells, spectra, ctx))
            tails.extend(_tail_rows(params, L, cells, spectra))
            calibration.append(_calibration_row(params, L, cells, spectra))
            for sector, spec in spectra.items():
                levels.extend(
                    {"L": L, "cells": cells, "sector": sector, "index": i, "energy": float(e),
                     "degeneracy": sector_degeneracy(params.q, sector)}
                    for i, e in enumerate(spec.eigenvalues)
                )
    tables = {
        "tail": tails,
        "calibration": calibration,
        "levels": levels,
        "spinless": _spinless_rows(params, rows, levels),
    }
    return StudyOutput(rows, tables=tables)


__all__ = ["reference_level", "run", "solve_sectors", "spinless_reference_level"]

from __future__ import annotations

import logging
import math
from typing import Any, Callable, Dict, List, Tuple

import numpy as np

from core.schema import TwoBodyParams
from pointgas.freefermi import SpectrumSlice
from pointgas.spectral2 import (
    RadialProblem,
    boundary_term_check,
    radial_exact_levels,
    radial_form_energy,
    radial_spectrum,
)
from studies.context import StudyContext, StudyOutput

logger = logging.getLogger(__name__)

BOUNDARY_EPS = (1e-1, 1e-2, 1e-3)

Profile = Tuple[Callable[[float], float], Callable[[float], float]]


def boundary_profiles(R: float) -> Dict[str, Profile]:
    """A profile that is finite at the origin and one that vanishes there like r."""

    k = math.pi / (2.0 * R)
    return {
        "finite": (lambda r: math.cos(k * r), lambda r: -k * math.sin(k * r)),
        "vanishing": (
            lambda r: r * math.cos(k * r),
            lambda r: math.cos(k * r) - k * r * math.sin(k * r),
        ),
    }


def _spectrum(p: RadialProblem, modes: int, ctx: StudyContext) -> SpectrumSlice:
    if ctx.cache is None:
        return radial_spectrum(p, modes)
    key = {"a_inv": p.a_inv, "R": p.R, "cells": p.cells, "outer": p.outer, "modes": modes}
    return ctx.cache.get_or_compute("radial", key, lambda: radial_spectrum(p, modes))


def _level_rows(params: TwoBodyParams, ctx: StudyContext) -> List[Dict[str, Any]]:
    exact = None
    if params.outer == "dirichlet":
        exact = radial_exact_levels(params.a_inv, params.R, params.modes)
    rows = []
    for cells in sorted(params.cells):
        spec = _spectrum(RadialProblem(params.a_inv, params.R, cells, params.outer), params.modes, ctx)
        for index, value in enumerate(spec.eigenvalues):
            reference = None if exact is None else float(exact[index])
            rows.append(
                {
                    "kind": "level",
                    "cells": cells,
                    "index": index,
                    "value": float(value),
                    "exact": reference,
                    "rel_error": None if reference is None else abs(value - reference) / reference,
                    "eps": None,
                    "profile": None,
                    "residual": None,
                    "inner_sphere": None,
                }
            )
    return rows


def _zero_mode_row(params: TwoBodyParams) -> Dict[str, Any]:
    p = RadialProblem(params.a_inv, params.R, max(params.cells), "neumann")
    energy = radial_form_energy(p, np.ones(p.cells + 1))
    return {
        "kind": "zero_mode",
        "cells": p.cells,
        "index": None,
        "value": energy,
        "exact": 0.0,
        "rel_error": None,
        "eps": None,
        "profile": None,
        "residual": None,
        "inner_sphere": None,
    }


def _boundary_rows(params: TwoBodyParams) -> List[Dict[str, Any]]:
    p = RadialProblem(params.a_inv, params.R, max(params.cells), params.outer)
    rows = []
    for name, (f, df) in boundary_profiles(params.R).items():
        for eps in BOUNDARY_EPS:
            report = boundary_term_check(p, f, df, eps)
            scale = max(1.0, abs(report.form), abs(report.whole_space), abs(report.substituted))
            rows.append(
                {
                    "kind": "boundary",
                    "cells": None,
                    "index": None,
                    "value": report.form,
                    "exact": None,
                    "rel_error": None,
                    "eps": eps,
                    "profile": name,
                    "residual": max(abs(report.whole_space_residual), abs(report.substituted_residual)) / scale,
                    "inner_sphere": report.inner_sphere,
                }
            )
    return rows


def run(params: TwoBodyParams, ctx: StudyContext) -> StudyOutput:
    rows = _level_rows(params, ctx)
    rows.append(_zero_mode_row(params))
    rows.extend(_boundary_rows(params))
    logger.info("twobody a_inv=%g R=%g: %d rows", params.a_inv, params.R, len(rows))
    return StudyOutput(rows)


__all__ = ["BOUNDARY_EPS", "boundary_profiles", "run"]

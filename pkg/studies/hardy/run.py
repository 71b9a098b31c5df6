from __future__ import annotations

import logging
from typing import Any, Dict, List, Sequence

from config import HARDY_BALL_C0, HARDY_BALL_C1, HARDY_C0, HARDY_C1
from core.schema import HardyParams
from pointgas.hardy import (
    RayleighProblem,
    best_constants,
    is_exterior,
    lemma2_sample_points,
    projected_problem,
    richardson,
    solve_rayleigh,
)
from studies.context import StudyContext, StudyOutput

logger = logging.getLogger(__name__)

_ORIGIN = (0.0, 0.0, 0.0)

# lemma -> (domain, outer boundary, default c0, default c1)
_LEMMAS: Dict[str, tuple[str, str, float, float]] = {
    "ball": ("ball", "natural", HARDY_BALL_C0, HARDY_BALL_C1),
    "box": ("cube", "natural", HARDY_C0, HARDY_C1),
    "classic": ("ball", "dirichlet", 1.0, 0.0),
}


def singular_points(params: HardyParams, ctx: StudyContext) -> List[tuple[float, float, float]]:
    if params.lemma == "box":
        return lemma2_sample_points(params.ell, params.samples, ctx.rng())
    return [_ORIGIN]


def _ladder_rows(
    params: HardyParams, y: Sequence[float], index: int, c0: float, c1: float
) -> List[Dict[str, Any]]:
    domain, outer, _, _ = _LEMMAS[params.lemma]
    rows = []
    for cells in params.cells:
        result = solve_rayleigh(RayleighProblem(domain, params.ell, tuple(y), cells, c0, c1, outer))
        rows.append(
            {
                "kind": "grid",
                "point": index,
                "y0": y[0],
                "y1": y[1],
                "y2": y[2],
                "cells": cells,
                "c0": c0,
                "c1": c1,
                "lambda_min": result.value,
                "residual": result.residual,
                "unknowns": result.unknowns,
            }
        )
    return rows


def _projected_row(params: HardyParams, y: Sequence[float], index: int, c0: float, c1: float) -> Dict[str, Any]:
    """Finest-grid solve with an exterior y moved onto the cube."""

    domain, outer, _, _ = _LEMMAS[params.lemma]
    p = projected_problem(RayleighProblem(domain, params.ell, tuple(y), max(params.cells), c0, c1, outer))
    result = solve_rayleigh(p)
    return {
        "kind": "projected",
        "point": index,
        "y0": p.y[0],
        "y1": p.y[1],
        "y2": p.y[2],
        "cells": p.cells,
        "c0": c0,
        "c1": c1,
        "lambda_min": result.value,
        "residual": result.residual,
        "unknowns": result.unknowns,
    }


def run(params: HardyParams, ctx: StudyContext) -> StudyOutput:
    _, _, default_c0, default_c1 = _LEMMAS[params.lemma]
    c0 = default_c0 if params.c0 is None else params.c0
    c1 = default_c1 if params.c1 is None else params.c1
    ladder = sorted(params.cells)
    params = params.model_copy(update={"cells": ladder})

    points = singular_points(params, ctx)
    rows: List[Dict[str, Any]] = []
    for index, y in enumerate(points):
        grid_rows = _ladder_rows(params, y, index, c0, c1)
        rows.extend(grid_rows)
        if len(ladder) >= 2:
            values = [r["lambda_min"] for r in grid_rows]
            rows.append(
                {
                    "kind": "extrapolated",
                    "point": index,
                    "y0": y[0],
                    "y1": y[1],
                    "y2": y[2],
                    "cells": None,
                    "c0": c0,
                    "c1": c1,
                    "lambda_min": richardson(values, ladder[-1] / ladder[-2]),
                    "residual": None,
                    "unknowns": None,
                }
            )
        if params.lemma == "box" and is_exterior(y, params.ell):
            rows.append(_projected_row(params, y, index, c0, c1))
    logger.info("hardy %s: %d singular points on ladder %s", params.lemma, len(points), ladder)
    tables = {}
    if params.frontier_c0:
        tables["frontier"] = _frontier_rows(params, points, c1)
    return StudyOutput(rows, tables=tables)


def _frontier_rows(
    params: HardyParams, points: Sequence[Sequence[float]], c1: float
) -> List[Dict[str, Any]]:
    """Extrapolated critical c1 per c0, worst over the singular points. Reported, not graded."""

    domain, outer, _, _ = _LEMMAS[params.lemma]
    best = best_constants(domain, points, params.cells, params.frontier_c0, [c1], ell=params.ell, outer=outer)
    return [
        {"c0": c0, "c1_critical": critical, "c1": c1, "feasible": best.feasible(c0, c1)}
        for c0, critical in sorted(best.frontier.items())
    ]


__all__ = ["run", "singular_points"]

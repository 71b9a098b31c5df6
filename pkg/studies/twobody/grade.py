from __future__ import annotations

from collections import defaultdict

from core.grading import GradeResult, check, combine
from core.schema import TwoBodyParams
from studies.context import StudyOutput

_LEVEL_RTOL = 1e-3
_ZERO_MODE_TOL = 1e-10
_IDENTITY_RTOL = 1e-6


def grade(params: TwoBodyParams, output: StudyOutput) -> GradeResult:
    checks = []
    levels = [r for r in output.rows if r["kind"] == "level"]
    finest = max(params.cells)

    if params.outer == "dirichlet":
        worst = max(r["rel_error"] for r in levels if r["cells"] == finest)
        checks.append(check(f"levels vs exact cells={finest}", _LEVEL_RTOL - worst, rel_error=worst))

    by_index = defaultdict(list)
    for row in sorted(levels, key=lambda r: r["cells"]):
        by_index[row["index"]].append(row["value"])
    # nested P1 grids can only lower each level
    rise = max(
        (later - earlier for values in by_index.values() for earlier, later in zip(values, values[1:])),
        default=0.0,
    )
    checks.append(check("levels non-increasing under refinement", -rise, tolerance=1e-12, rise=rise))

    for row in output.rows:
        if row["kind"] == "zero_mode":
            checks.append(check("neumann zero mode", _ZERO_MODE_TOL - abs(row["value"]), energy=row["value"]))

    boundary = [r for r in output.rows if r["kind"] == "boundary"]
    if boundary:
        residual = max(r["residual"] for r in boundary)
        checks.append(check("integration by parts identities", _IDENTITY_RTOL - residual, residual=residual))
        for profile, should_vanish in (("vanishing", True), ("finite", False)):
            terms = [r["inner_sphere"] for r in sorted(boundary, key=lambda r: -r["eps"]) if r["profile"] == profile]
            steps = [b - a for a, b in zip(terms, terms[1:])]
            # the inner sphere term shrinks with eps only for profiles vanishing at the origin
            margin = -max(steps) if should_vanish else min(steps)
            checks.append(check(f"inner sphere term {profile}", margin, terms=terms))
    return combine(checks)


__all__ = ["grade"]

from __future__ import annotations

from core.grading import GradeResult, check, combine
from core.schema import HardyParams
from studies.context import StudyOutput

# Relative residual accepted from the Rayleigh solves.
_RESIDUAL_TOL = 1e-5
# Relative slack on lambda(y) >= lambda(projected y).
_PROJECTION_RTOL = 1e-6


def grade(params: HardyParams, output: StudyOutput) -> GradeResult:
    finest = max(params.cells)
    checks = []
    grid = [r for r in output.rows if r["kind"] == "grid"]
    for row in grid:
        if row["cells"] != finest:
            continue
        checks.append(
            check(
                f"lambda_min point={row['point']} cells={finest}",
                row["lambda_min"] - params.threshold,
                lambda_min=row["lambda_min"],
            )
        )
    extrapolated = [r["lambda_min"] for r in output.rows if r["kind"] == "extrapolated"]
    if extrapolated:
        worst = min(extrapolated)
        checks.append(check("extrapolated lambda_min", worst - params.threshold, lambda_min=worst))
    finest_by_point = {r["point"]: r for r in grid if r["cells"] == finest}
    projected = [r for r in output.rows if r["kind"] == "projected"]
    for row in projected:
        exterior = finest_by_point[row["point"]]["lambda_min"]
        checks.append(
            check(
                f"exterior point={row['point']} above its projection",
                exterior - row["lambda_min"],
                tolerance=_PROJECTION_RTOL * abs(row["lambda_min"]),
                exterior=exterior,
                projected=row["lambda_min"],
            )
        )
    solved = grid + projected
    if solved:
        residual = max(r["residual"] for r in solved)
        checks.append(check("rayleigh residuals", _RESIDUAL_TOL - residual, residual=residual))
    return combine(checks)


__all__ = ["grade"]

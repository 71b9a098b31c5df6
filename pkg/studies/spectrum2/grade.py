from __future__ import annotations

from collections import defaultdict

from core.grading import GradeResult, check, combine
from core.schema import Spectrum2Params
from studies.context import StudyOutput


def grade(params: Spectrum2Params, output: StudyOutput) -> GradeResult:
    finest = max(params.cells)
    checks = []
    free_rows = [r for r in output.rows if r["kind"] == "free_energy"]
    for row in free_rows:
        # F_g_upper drops the tail, so it bounds F_g from above even when no value is reported
        slack = params.tolerance * abs(row["F_free"])
        checks.append(
            check(
                f"F_g <= F L={row['L']} beta={row['beta']} cells={row['cells']}",
                row["F_free"] - row["F_g_upper"],
                tolerance=slack,
                F_g=row["F_g"],
                upper=row["F_g_upper"],
                F=row["F_free"],
            )
        )

    trend = defaultdict(list)
    for row in sorted((r for r in free_rows if r["cells"] == finest), key=lambda r: r["L"]):
        if row["gap_per_particle"] is not None:
            trend[row["beta"]].append(row["gap_per_particle"])
    for beta, gaps in trend.items():
        if len(gaps) < 2:
            continue
        rise = max(b - a for a, b in zip(gaps, gaps[1:]))
        checks.append(check(f"gap per particle decreasing in L beta={beta}", -rise, gaps=gaps))

    for row in output.tables.get("spinless", []):
        if row["extrapolated"] is None:
            continue
        name = f"spinless {row['quantity']} vs continuum L={row['L']}"
        if row["beta"] is not None:
            name += f" beta={row['beta']}"
        rel = abs(row["extrapolated"] - row["continuum"]) / row["scale"]
        checks.append(check(name, params.trivial_rtol - rel, rel=rel, extrapolated=row["extrapolated"]))

    margins = [r["margin"] for r in output.tables.get("tail", []) if r["margin"] is not None and r["complete"]]
    if margins:
        checks.append(check("tail sum bound", min(margins), cases=len(margins)))
    return combine(checks)


__all__ = ["grade"]

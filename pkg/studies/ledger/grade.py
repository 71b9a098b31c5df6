from __future__ import annotations

from core.grading import GradeResult, check, combine
from core.schema import LedgerParams
from studies.context import StudyOutput

_TAIL_RTOL = 1e-6


def _steps(values: list[float]) -> list[float]:
    return [b - a for a, b in zip(values, values[1:])]


def grade(params: LedgerParams, output: StudyOutput) -> GradeResult:
    checks = []
    for row in output.rows:
        tag = f"N={row['N']} rho={row['rho']} beta={row['beta']}"
        checks.append(check(f"delta below 1/4 {tag}", 0.25 - row["delta"], blocking=row["blocking"]))
        if not row["feasible"]:
            continue
        checks.append(check(f"F_lower <= F_free {tag}", row["F_free"] - row["F_lower"], consistent=row["consistent"]))
        checks.append(
            check(
                f"tail term negligible {tag}",
                _TAIL_RTOL * abs(row["F_free"]) - row["tail_term"],
                tail=row["tail_term"],
                series_holds=row["tail_series_holds"],
                c_eta_min=row["c_eta_min"],
            )
        )
        checks.append(check(f"first delta term dominates {tag}", row["delta_first"] - row["delta_second"]))

    delta = [r["delta"] for r in output.tables.get("delta", [])]
    if len(delta) > 1:
        checks.append(check("delta decreasing in N", -max(_steps(delta)), delta=delta))
    deficit = output.tables.get("deficit", [])
    large = [r["per_particle"] for r in deficit if r["ladder"] == "large"]
    small = [r["per_particle"] for r in deficit if r["ladder"] == "small"]
    if len(large) > 1:
        checks.append(check("per-particle deficit decreasing at large N", -max(_steps(large)), values=large))
    if len(small) > 1:
        checks.append(check("per-particle deficit increasing at small N", min(_steps(small)), values=small))
    return combine(checks)


__all__ = ["grade"]

from __future__ import annotations

from core.grading import GradeResult, check, combine
from core.schema import OccupationsParams
from studies.context import StudyOutput


def grade(params: OccupationsParams, output: StudyOutput) -> GradeResult:
    checks = []
    rows = output.rows
    if rows:
        lower = min(r["lower_margin"] / max(abs(r["middle"]), 1e-300) for r in rows)
        upper = min(r["upper_margin"] / max(abs(r["middle"]), 1e-300) for r in rows)
        failed = sum(not r["passed"] for r in rows)
        checks.append(check("sandwich lower side", lower, failed=failed, cases=len(rows)))
        checks.append(check("sandwich upper side", upper, failed=failed, cases=len(rows)))

    for row in output.tables.get("mu_opt", []):
        if row["kind"] == "scan":
            checks.append(check("mu-optimisation constant positive", row["value"], argmin=[row["A"], row["q"]]))
        else:
            checks.append(check(f"mu-optimisation A=8q q={row['q']}", -abs(row["value"] - row["expected"])))

    counting = output.tables.get("counting", [])
    if counting:
        mismatches = sum(r["mismatches"] for r in counting)
        checks.append(check("ground-state identity", -mismatches, mismatches=mismatches))
        broken = sum(1 for r in counting if r["entropy_holds"] is False)
        checks.append(check("binomial entropy bound", -broken, broken=broken))

    occupation = output.tables.get("occupation", [])
    if occupation:
        bad = sum(1 for r in occupation if not r["inverts"])
        checks.append(check("max occupation inverts the kinetic bound", -bad, bad=bad))
    return combine(checks)


__all__ = ["grade"]

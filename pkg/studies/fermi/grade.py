from __future__ import annotations

from core.grading import GradeResult, check, combine
from core.schema import FermiParams
from studies.context import StudyOutput

_ZERO_T_RTOL = 1e-2
_SCALING_RTOL = 1e-6
_ORACLE_RTOL = 1e-10


def _relative(value: float, reference: float) -> float:
    return abs(value - reference) / max(abs(reference), 1.0)


def grade(params: FermiParams, output: StudyOutput) -> GradeResult:
    checks = []
    for row in output.rows:
        kind = row["kind"]
        if kind == "density":
            gap = abs(row["f"] - row["reference"]) / abs(row["f"])
            checks.append(
                check(f"scaling beta={row['beta']} rho={row['rho']} q={row['q']}", _SCALING_RTOL - gap, rel=gap)
            )
        elif kind == "zero_temperature":
            gap = abs(row["f"] - row["reference"]) / row["reference"]
            checks.append(check(f"zero temperature q={row['q']}", _ZERO_T_RTOL - gap, rel=gap))
    oracle = [_relative(row["f"], row["reference"]) for row in output.rows if row["kind"] == "oracle"]
    if oracle:
        worst = max(oracle)
        checks.append(check("canonical recursion vs enumeration", _ORACLE_RTOL - worst, cases=len(oracle), rel=worst))
    return combine(checks)


__all__ = ["grade"]

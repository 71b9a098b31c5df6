from __future__ import annotations

import itertools
import logging
import math
from typing import Any, Dict, List

from core.schema import OccupationsParams
from pointgas.bounds import (
    SandwichCase,
    entropy_bound_boxes,
    ground_state_count,
    ground_state_totals,
    kinetic_lower_bound,
    max_occupation,
    mu_opt_bound,
    mu_opt_constant,
    norm_sandwich_check,
    random_sandwich_case,
    sandwich_field,
)
from pointgas.geometry import OccupationVector, enumerate_occupations, make_partition
from studies.context import StudyContext, StudyOutput

logger = logging.getLogger(__name__)

RESOLUTIONS = (0, 1)
# sizes small enough to enumerate every occupation
_ENUMERATION_N = 4
_ENUMERATION_M = 4


def distant_singletons() -> SandwichCase:
    """Two particles alone in opposite corner boxes of a 3 x 3 x 3 partition, constant psi."""

    p = make_partition(3.0, 3)
    counts = [0] * p.M
    counts[0] = counts[-1] = 1
    n = OccupationVector(tuple(counts))
    return SandwichCase(p, n, sandwich_field(p, n, 4, lambda *x: 1.0 + 0.0 * sum(x)))


def _sandwich_row(label: str, instance: int, resolution: int, case: SandwichCase, eps: float) -> Dict[str, Any]:
    report = norm_sandwich_check(case.psi, case.occupation, case.partition, eps)
    return {
        "case": label,
        "instance": instance,
        "resolution": resolution,
        "m": case.partition.m,
        "N": case.occupation.N,
        "eps": eps,
        "lower": report.lower,
        "middle": report.middle,
        "upper": report.upper,
        "lower_margin": report.lower_margin,
        "upper_margin": report.upper_margin,
        "passed": report.passed,
    }


def _sandwich_rows(params: OccupationsParams, ctx: StudyContext) -> List[Dict[str, Any]]:
    rows = []
    for instance in range(params.samples):
        for resolution in RESOLUTIONS:
            case = random_sandwich_case(ctx.rng(instance), resolution)
            rows.extend(_sandwich_row("random", instance, resolution, case, eps) for eps in params.eps)
    singletons = distant_singletons()
    rows.extend(_sandwich_row("distant", 0, 0, singletons, eps) for eps in params.eps)
    return rows


def _mu_opt_rows(params: OccupationsParams) -> List[Dict[str, Any]]:
    scan = mu_opt_constant(params.A_max, params.q_max)
    rows = [
        {
            "kind": "scan",
            "A": scan.argmin[0],
            "q": scan.argmin[1],
            "value": scan.c_star,
            "expected": None,
        }
    ]
    for q in range(1, params.q_max + 1):
        rows.append({"kind": "spot", "A": 8 * q, "q": q, "value": mu_opt_bound(8 * q, q), "expected": 7 * q})
    return rows


def _counting_rows(params: OccupationsParams) -> List[Dict[str, Any]]:
    rows = []
    for q, M in itertools.product(range(1, params.count_q + 1), range(1, params.count_M + 1)):
        totals = ground_state_totals(params.count_N, M, q)
        mismatches = sum(1 for N, total in enumerate(totals) if total != math.comb(q * M, N))
        holds = all(entropy_bound_boxes(N, M, q).holds for N in range(1, min(params.count_N, q * M) + 1))
        rows.append({"method": "dp", "q": q, "M": M, "mismatches": mismatches, "entropy_holds": holds})
    for q, M in itertools.product(range(1, params.count_q + 1), range(1, _ENUMERATION_M + 1)):
        mismatches = 0
        for N in range(_ENUMERATION_N + 1):
            total = sum(ground_state_count(n, q) for n in enumerate_occupations(N, M, cap=q))
            mismatches += total != math.comb(q * M, N)
        rows.append({"method": "enumeration", "q": q, "M": M, "mismatches": mismatches, "entropy_holds": None})
    return rows


def _occupation_rows(params: OccupationsParams) -> List[Dict[str, Any]]:
    rows = []
    for q, E in itertools.product(range(1, params.count_q + 1), params.energies):
        bound = max_occupation(E, params.ell, q, params.kappa)
        inside = bound.n_bar == q or kinetic_lower_bound([bound.n_bar], q, params.ell, params.kappa) < E
        outside = kinetic_lower_bound([bound.n_bar + 1], q, params.ell, params.kappa) >= E
        rows.append(
            {
                "q": q,
                "E": E,
                "n_bar": bound.n_bar,
                "surrogate": bound.surrogate,
                "inverts": inside and outside,
            }
        )
    return rows


def run(params: OccupationsParams, ctx: StudyContext) -> StudyOutput:
    rows = _sandwich_rows(params, ctx)
    logger.info("norm sandwich: %d evaluations, %d failed", len(rows), sum(not r["passed"] for r in rows))
    return StudyOutput(
        rows,
        tables={
            "mu_opt": _mu_opt_rows(params),
            "counting": _counting_rows(params),
            "occupation": _occupation_rows(params),
        },
    )


__all__ = ["RESOLUTIONS", "distant_singletons", "run"]
